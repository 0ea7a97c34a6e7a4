/* C interface to the MAET toolkit.
 *
 * Every function returns a maet_status. On failure the message of the most
 * recent error on the calling thread is available from maet_last_error().
 * Objects are opaque handles released with their *_free function; strings
 * returned through char** are released with maet_string_free. */
#ifndef MAET_H
#define MAET_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MAET_API __declspec(dllexport)
#else
#define MAET_API __attribute__((visibility("default")))
#endif

typedef enum maet_status {
  MAET_OK = 0,
  MAET_ERR_INVALID_ARGUMENT = 1,
  MAET_ERR_PARITY = 2,
  MAET_ERR_GRID = 3,
  MAET_ERR_NOT_CONVERGED = 4,
  MAET_ERR_IO = 5,
  MAET_ERR_SINGULAR = 6,
  MAET_ERR_INTERNAL = 7,
  MAET_ERR_OUT_OF_DOMAIN = 8
} maet_status;

typedef struct maet_field maet_field;
typedef struct maet_config maet_config;
typedef struct maet_phantom_spec maet_phantom_spec;
typedef struct maet_measurements maet_measurements;

typedef struct maet_metrics {
  double relative_l2;
  double max_abs;
  double relative_l2_interior;
} maet_metrics;

typedef enum maet_slice_format { MAET_SLICE_PNG = 0, MAET_SLICE_CSV = 1 } maet_slice_format;

MAET_API const char* maet_version(void);
MAET_API const char* maet_status_string(maet_status status);
MAET_API const char* maet_last_error(void);
MAET_API void maet_string_free(char* s);

/* Scalar fields on the n^3 node grid. */
MAET_API maet_status maet_field_read(const char* path, maet_field** out);
MAET_API maet_status maet_field_write(const maet_field* f, const char* path);
MAET_API void maet_field_free(maet_field* f);
MAET_API size_t maet_field_n(const maet_field* f);
/* Copies min(count, n^3) values, x fastest. */
MAET_API maet_status maet_field_values(const maet_field* f, double* out, size_t count);
MAET_API maet_status maet_field_metrics(const maet_field* recon, const maet_field* truth, double margin,
                                        maet_metrics* out);

/* Pipeline configuration; keys as in the JSON form. */
MAET_API maet_status maet_config_new(maet_config** out);
MAET_API maet_status maet_config_from_json(const char* json, maet_config** out);
MAET_API maet_status maet_config_to_json(const maet_config* cfg, char** out);
/* Sets one key from a JSON value, e.g. ("n", "65") or ("tat_backend", "\"series\""). */
MAET_API maet_status maet_config_set(maet_config* cfg, const char* key, const char* json_value);
MAET_API void maet_config_free(maet_config* cfg);

/* kind: "smooth-bumps" or "smoothed-balls". */
MAET_API maet_status maet_phantom_spec_default(const char* kind, maet_phantom_spec** out);
MAET_API maet_status maet_phantom_spec_from_json(const char* json, maet_phantom_spec** out);
MAET_API maet_status maet_phantom_spec_to_json(const maet_phantom_spec* spec, char** out);
MAET_API void maet_phantom_spec_free(maet_phantom_spec* spec);
/* Either output may be NULL. */
MAET_API maet_status maet_make_phantom(const maet_phantom_spec* spec, size_t n, maet_field** log_sigma,
                                       maet_field** sigma);

/* Lead potentials, currents and curls for a conductivity, written to
 * out_dir as potential_k*.bin, current_k*_{x,y,z}.bin, curl_k*_{x,y,z}.bin.
 * report (may be NULL) receives solver diagnostics as JSON. */
MAET_API maet_status maet_forward(const maet_field* sigma, const maet_config* cfg, const char* out_dir,
                                  char** report);

/* Noiseless data from the curl files of a forward directory. */
MAET_API maet_status maet_synthesize(const char* forward_dir, const maet_config* cfg, maet_measurements** out);
MAET_API maet_status maet_measurements_load(const char* dir, maet_measurements** out);
MAET_API maet_status maet_measurements_save(const maet_measurements* m, const char* dir);
MAET_API maet_status maet_measurements_add_noise(const maet_measurements* in, double level, uint64_t seed,
                                                 maet_measurements** out);
MAET_API size_t maet_measurements_sample_count(const maet_measurements* m);
MAET_API void maet_measurements_free(maet_measurements* m);

/* TAT inversion, current and conductivity recovery. Writes the recovered
 * curls, currents, gradient and log_sigma.bin into out_dir; log_sigma and
 * report may be NULL. */
MAET_API maet_status maet_reconstruct(const maet_measurements* data, const maet_config* cfg, const char* out_dir,
                                      maet_field** log_sigma, char** report);

/* All stages with artifacts and manifest.json in out_dir. metrics (may be
 * NULL) receives the contents of metrics.json. */
MAET_API maet_status maet_run_pipeline(const maet_phantom_spec* spec, const maet_config* cfg, const char* out_dir,
                                       char** metrics);

/* Plane x_axis = coordinate. The gray range is the slice min/max unless
 * use_range is nonzero. */
MAET_API maet_status maet_export_slice(const maet_field* f, int axis, double coordinate, int use_range, double lo,
                                       double hi, maet_slice_format format, const char* path);
/* Line along x_axis through the two fixed coordinates (lower axis first). */
MAET_API maet_status maet_export_profile(const maet_field* f, int axis, double fixed_a, double fixed_b,
                                         const char* path);

#ifdef __cplusplus
}
#endif

#endif /* MAET_H */
