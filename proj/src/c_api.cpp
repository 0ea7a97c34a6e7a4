#include "maet/maet.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <new>
#include <string>

#include <json.hpp>

#include "maet/export.hpp"
#include "maet/field_io.hpp"
#include "maet/pipeline.hpp"

struct maet_field {
  maet::ScalarField3 f;
};
struct maet_config {
  maet::PipelineConfig c;
};
struct maet_phantom_spec {
  maet::PhantomSpec s;
};
struct maet_measurements {
  maet::MeasurementSet m;
};

namespace {

thread_local std::string g_last_error;

maet_status to_status(maet::ErrorCode c) {
  switch (c) {
    case maet::ErrorCode::InvalidArgument: return MAET_ERR_INVALID_ARGUMENT;
    case maet::ErrorCode::ParityMismatch: return MAET_ERR_PARITY;
    case maet::ErrorCode::GridMismatch: return MAET_ERR_GRID;
    case maet::ErrorCode::NotConverged: return MAET_ERR_NOT_CONVERGED;
    case maet::ErrorCode::Io: return MAET_ERR_IO;
    case maet::ErrorCode::Singular: return MAET_ERR_SINGULAR;
    case maet::ErrorCode::Internal: return MAET_ERR_INTERNAL;
    case maet::ErrorCode::OutOfDomain: return MAET_ERR_OUT_OF_DOMAIN;
  }
  return MAET_ERR_INTERNAL;
}

template <class F>
maet_status guard(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return MAET_OK;
  } catch (const maet::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MAET_ERR_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return MAET_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MAET_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  maet::require(p != nullptr, maet::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* maet_version(void) { return "1.0.0"; }

const char* maet_status_string(maet_status status) {
  switch (status) {
    case MAET_OK: return "ok";
    case MAET_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MAET_ERR_PARITY: return "parity mismatch";
    case MAET_ERR_GRID: return "grid mismatch";
    case MAET_ERR_NOT_CONVERGED: return "not converged";
    case MAET_ERR_IO: return "i/o error";
    case MAET_ERR_SINGULAR: return "singular system";
    case MAET_ERR_INTERNAL: return "internal error";
    case MAET_ERR_OUT_OF_DOMAIN: return "out of domain";
  }
  return "unknown status";
}

const char* maet_last_error(void) { return g_last_error.c_str(); }

void maet_string_free(char* s) { std::free(s); }

maet_status maet_field_read(const char* path, maet_field** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new maet_field{maet::read_field(path)};
  });
}

maet_status maet_field_write(const maet_field* f, const char* path) {
  return guard([&] {
    need(f, "field");
    need(path, "path");
    maet::write_field(path, f->f);
  });
}

void maet_field_free(maet_field* f) { delete f; }

size_t maet_field_n(const maet_field* f) { return f ? f->f.n() : 0; }

maet_status maet_field_values(const maet_field* f, double* out, size_t count) {
  return guard([&] {
    need(f, "field");
    need(out, "out");
    const auto v = f->f.values();
    std::copy_n(v.begin(), std::min(count, v.size()), out);
  });
}

maet_status maet_field_metrics(const maet_field* recon, const maet_field* truth, double margin, maet_metrics* out) {
  return guard([&] {
    need(recon, "recon");
    need(truth, "truth");
    need(out, "out");
    const maet::Metrics m = maet::metrics(recon->f, truth->f, margin);
    *out = maet_metrics{m.relative_l2, m.max_abs, m.relative_l2_interior};
  });
}

maet_status maet_config_new(maet_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new maet_config{};
  });
}

maet_status maet_config_from_json(const char* json, maet_config** out) {
  return guard([&] {
    need(json, "json");
    need(out, "out");
    maet::PipelineConfig c = maet::pipeline_config_from_json(json);
    c.validate();
    *out = new maet_config{c};
  });
}

maet_status maet_config_to_json(const maet_config* cfg, char** out) {
  return guard([&] {
    need(cfg, "config");
    need(out, "out");
    *out = dup_string(maet::to_json(cfg->c));
  });
}

maet_status maet_config_set(maet_config* cfg, const char* key, const char* json_value) {
  return guard([&] {
    need(cfg, "config");
    need(key, "key");
    need(json_value, "value");
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(maet::to_json(cfg->c));
    nlohmann::ordered_json v;
    try {
      v = nlohmann::ordered_json::parse(json_value);
    } catch (const std::exception& e) {
      maet::fail(maet::ErrorCode::InvalidArgument, std::string("config value for '") + key + "' is not JSON");
    }
    j[key] = v;
    maet::PipelineConfig c = maet::pipeline_config_from_json(j.dump());
    c.validate();
    cfg->c = c;
  });
}

void maet_config_free(maet_config* cfg) { delete cfg; }

maet_status maet_phantom_spec_default(const char* kind, maet_phantom_spec** out) {
  return guard([&] {
    need(kind, "kind");
    need(out, "out");
    const maet::PhantomKind k = maet::phantom_kind_from_string(kind);
    *out = new maet_phantom_spec{k == maet::PhantomKind::SmoothBumps ? maet::smooth_bumps_default()
                                                                     : maet::smoothed_balls_default()};
  });
}

maet_status maet_phantom_spec_from_json(const char* json, maet_phantom_spec** out) {
  return guard([&] {
    need(json, "json");
    need(out, "out");
    *out = new maet_phantom_spec{maet::phantom_spec_from_json(json)};
  });
}

maet_status maet_phantom_spec_to_json(const maet_phantom_spec* spec, char** out) {
  return guard([&] {
    need(spec, "spec");
    need(out, "out");
    *out = dup_string(maet::to_json(spec->s));
  });
}

void maet_phantom_spec_free(maet_phantom_spec* spec) { delete spec; }

maet_status maet_make_phantom(const maet_phantom_spec* spec, size_t n, maet_field** log_sigma, maet_field** sigma) {
  return guard([&] {
    need(spec, "spec");
    maet::Phantom p = maet::make_phantom(spec->s, n);
    if (log_sigma) *log_sigma = new maet_field{std::move(p.log_sigma)};
    if (sigma) *sigma = new maet_field{std::move(p.conductivity.sigma)};
  });
}

maet_status maet_forward(const maet_field* sigma, const maet_config* cfg, const char* out_dir, char** report) {
  return guard([&] {
    need(sigma, "sigma");
    need(cfg, "config");
    need(out_dir, "out_dir");
    const maet::Conductivity cond = maet::make_conductivity(sigma->f, cfg->c.margin);
    const maet::LeadSystem leads = maet::solve_leads(cond, cfg->c.solver);
    maet::write_forward(out_dir, leads);
    if (report) *report = dup_string(maet::forward_report_json(leads));
  });
}

maet_status maet_synthesize(const char* forward_dir, const maet_config* cfg, maet_measurements** out) {
  return guard([&] {
    need(forward_dir, "forward_dir");
    need(cfg, "config");
    need(out, "out");
    maet::LeadSystem leads;
    for (int k = 1; k <= 3; ++k)
      leads.curl[k - 1] = maet::read_vector_field(forward_dir, "curl_k" + std::to_string(k));
    maet::PipelineConfig c = cfg->c;
    c.n = leads.curl[0].n();
    *out = new maet_measurements{maet::run_synthesis(leads, c)};
  });
}

maet_status maet_measurements_load(const char* dir, maet_measurements** out) {
  return guard([&] {
    need(dir, "dir");
    need(out, "out");
    *out = new maet_measurements{maet::load_measurements(dir)};
  });
}

maet_status maet_measurements_save(const maet_measurements* m, const char* dir) {
  return guard([&] {
    need(m, "measurements");
    need(dir, "dir");
    maet::save_measurements(m->m, dir);
  });
}

maet_status maet_measurements_add_noise(const maet_measurements* in, double level, uint64_t seed,
                                        maet_measurements** out) {
  return guard([&] {
    need(in, "measurements");
    need(out, "out");
    *out = new maet_measurements{maet::add_noise(in->m, level, seed)};
  });
}

size_t maet_measurements_sample_count(const maet_measurements* m) { return m ? m->m.sample_count() : 0; }

void maet_measurements_free(maet_measurements* m) { delete m; }

maet_status maet_reconstruct(const maet_measurements* data, const maet_config* cfg, const char* out_dir,
                             maet_field** log_sigma, char** report) {
  return guard([&] {
    need(data, "measurements");
    need(cfg, "config");
    need(out_dir, "out_dir");
    maet::PipelineConfig c = cfg->c;
    c.n = data->m.n;
    c.m = data->m.acq.m;
    c.n_t = data->m.acq.n_t;
    c.dt = data->m.acq.dt;
    c.c = data->m.acq.c;
    c.rho = data->m.acq.rho;
    c.b_abs = data->m.acq.b_abs;
    const maet::Reconstruction r = maet::run_reconstruction(data->m, c);
    maet::write_reconstruction(out_dir, r);
    if (report) *report = dup_string(maet::reconstruction_report_json(r));
    if (log_sigma) *log_sigma = new maet_field{r.log_sigma};
  });
}

maet_status maet_run_pipeline(const maet_phantom_spec* spec, const maet_config* cfg, const char* out_dir,
                              char** metrics) {
  return guard([&] {
    need(spec, "spec");
    need(cfg, "config");
    need(out_dir, "out_dir");
    maet::run_pipeline(spec->s, cfg->c, out_dir);
    if (metrics) {
      std::ifstream in(std::filesystem::path(out_dir) / "metrics.json");
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      *metrics = dup_string(text);
    }
  });
}

maet_status maet_export_slice(const maet_field* f, int axis, double coordinate, int use_range, double lo, double hi,
                              maet_slice_format format, const char* path) {
  return guard([&] {
    need(f, "field");
    need(path, "path");
    maet::SliceSpec s;
    s.axis = axis;
    s.coordinate = coordinate;
    if (use_range) s.range = std::make_pair(lo, hi);
    maet::export_slice(f->f, s, format == MAET_SLICE_CSV ? maet::SliceFormat::Csv : maet::SliceFormat::Png, path);
  });
}

maet_status maet_export_profile(const maet_field* f, int axis, double fixed_a, double fixed_b, const char* path) {
  return guard([&] {
    need(f, "field");
    need(path, "path");
    maet::LineSpec l;
    l.axis = axis;
    l.fixed = {fixed_a, fixed_b};
    maet::export_profile(f->f, l, path);
  });
}

}  // extern "C"
