#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "maet/acoustic.hpp"
#include "maet/conductivity_recovery.hpp"
#include "maet/current_recovery.hpp"
#include "maet/field.hpp"
#include "maet/forward_em.hpp"
#include "maet/phantom.hpp"
#include "maet/tat.hpp"

namespace maet {

struct PipelineConfig {
  std::size_t n = 33;
  std::size_t m = 0;    // 0: m = n
  std::size_t n_t = 0;  // 0: shortest covering count
  double dt = 0.0;      // 0: h / (2c)
  double c = 1.0;
  double rho = 1.0;
  double b_abs = 1.0;
  double noise_level = 0.0;
  std::uint64_t seed = 1;
  SolverOptions solver;
  double margin = 0.1;
  /// Cutoff of the raised-cosine low-pass applied to the reconstructed
  /// curls; 0 disables it.
  double spectral_filter = 0.0;
  double eps_det = 1e-6;
  double eps_par = 1e-6;
  TatBackend tat_backend = TatBackend::Series;
  SynthesisBackend synthesis_backend = SynthesisBackend::Spectral;
  int time_padding = 4;
  double cfl = 0.5;
  bool leray_projection = true;
  bool save_measurements = true;

  /// Acquisition resolved from the zero defaults; validated.
  Acquisition acquisition() const;
  TatOptions tat_options() const;
  ConductivityOptions conductivity_options() const;
  /// Throws InvalidArgument on inconsistent settings.
  void validate() const;
};

std::string to_json(const PipelineConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig pipeline_config_from_json(const std::string& text);

std::string to_json(const PhantomSpec& spec);
/// `kind` alone selects the default item list for that kind.
PhantomSpec phantom_spec_from_json(const std::string& text);

std::string to_string(SynthesisBackend b);
SynthesisBackend synthesis_backend_from_string(const std::string& s);

struct Metrics {
  double relative_l2 = 0.0;
  double max_abs = 0.0;
  double relative_l2_interior = 0.0;  // over nodes at distance >= margin from the boundary
};

/// Errors of `recon` against `truth`. A zero truth gives absolute norms.
Metrics metrics(const ScalarField3& recon, const ScalarField3& truth, double margin = 0.1);

struct ForwardStage {
  Phantom phantom;
  LeadSystem leads;
};

struct Reconstruction {
  std::array<VectorField3, 3> curls;     // from the TAT step
  std::array<VectorField3, 3> currents;  // recovered J^(k)
  VectorField3 gradient;                 // recovered grad ln sigma
  ScalarField3 log_sigma;
  std::array<TatReport, 9> tat_reports;
  std::array<CurrentRecoveryReport, 3> current_reports;
  GradientSolveReport gradient_report;
};

ForwardStage run_forward(const PhantomSpec& spec, const PipelineConfig& cfg);
/// Noiseless data.
MeasurementSet run_synthesis(const LeadSystem& leads, const PipelineConfig& cfg);

struct StageTimings {
  std::vector<std::pair<std::string, double>> seconds;  // in execution order
  double reconstruction_seconds() const;  // tat + current + conductivity
};

/// TAT inversion, current recovery and conductivity recovery, timed per
/// stage when `timings` is given.
Reconstruction run_reconstruction(const MeasurementSet& data, const PipelineConfig& cfg,
                                  StageTimings* timings = nullptr);

/// potential_k*.bin, current_k*_{x,y,z}.bin and curl_k*_{x,y,z}.bin in `dir`.
std::vector<std::filesystem::path> write_forward(const std::filesystem::path& dir, const LeadSystem& leads);
/// Potential solver iterations and residuals, curl leakage.
std::string forward_report_json(const LeadSystem& leads);

/// tat/, current/ and conductivity/ subdirectories of `dir`.
std::vector<std::filesystem::path> write_reconstruction(const std::filesystem::path& dir, const Reconstruction& r);
/// TAT, current-recovery and gradient-solve reports.
std::string reconstruction_report_json(const Reconstruction& r);

struct PipelineResult {
  ForwardStage forward;
  Reconstruction recon;
  Metrics metrics;
  /// Relative L2 errors of the intermediate fields against forward_em.
  std::array<double, 3> curl_error{};
  std::array<double, 3> current_error{};
  StageTimings timings;
  std::filesystem::path manifest;
};

/// Runs every stage and writes the artifacts, metrics.json, timings.json
/// and manifest.json into `out_dir`. Stage failures are rethrown with the
/// stage name prefixed.
PipelineResult run_pipeline(const PhantomSpec& spec, const PipelineConfig& cfg, const std::filesystem::path& out_dir);

/// Lowercase hex SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& path);

/// Writes manifest.json listing `artifacts` (relative to `dir`) with sizes
/// and hashes, plus the given config and phantom JSON.
std::filesystem::path write_manifest(const std::filesystem::path& dir, const std::vector<std::filesystem::path>& artifacts,
                                     const std::string& config_json, const std::string& phantom_json);

}  // namespace maet
