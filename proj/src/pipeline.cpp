#include "maet/pipeline.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "maet/export.hpp"
#include "maet/field_io.hpp"
#include "maet/spectral.hpp"

namespace maet {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

double rel_l2(const VectorField3& a, const VectorField3& b) {
  double num = 0.0, den = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < a[c].size(); ++i) {
      const double d = a[c][i] - b[c][i];
      num += d * d;
      den += b[c][i] * b[c][i];
    }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

template <class F>
auto timed_stage(const char* name, StageTimings* timings, F&& fn) -> decltype(fn()) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto out = fn();
    if (timings)
      timings->seconds.emplace_back(
          name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return out;
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage ") + name + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Internal, std::string("stage ") + name + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << text << '\n';
  require(static_cast<bool>(out), ErrorCode::Io, "write failed for " + path.string());
}

ojson tat_report_json(const TatReport& r) {
  return ojson{{"backend", to_string(r.backend)}, {"steps", r.steps},      {"solver_dt", r.solver_dt},
               {"margin", r.margin},              {"energy", r.energy},    {"masked_fraction", r.masked_fraction}};
}

ojson current_report_json(const CurrentRecoveryReport& r) {
  return ojson{{"k", r.k},
               {"input_divergence", r.input_divergence},
               {"projected_fraction", r.projected_fraction},
               {"divergence_residual", r.divergence_residual},
               {"boundary_flux_residual", r.boundary_flux_residual},
               {"plane_flux_residual", r.plane_flux_residual}};
}

}  // namespace

Acquisition PipelineConfig::acquisition() const {
  require(n >= 5, ErrorCode::InvalidArgument, "config: n must be at least 5");
  require(c > 0.0 && rho > 0.0 && b_abs > 0.0, ErrorCode::InvalidArgument, "config: c, rho, |B| must be positive");
  Acquisition acq = default_acquisition(n, c);
  if (m != 0) acq.m = m;
  if (dt != 0.0) {
    require(dt > 0.0, ErrorCode::InvalidArgument, "config: dt must be positive");
    acq.dt = dt;
    acq.n_t = static_cast<std::size_t>(std::ceil(kSqrt3 / (c * dt) - 1e-9)) + 1;
  }
  if (n_t != 0) acq.n_t = n_t;
  acq.rho = rho;
  acq.b_abs = b_abs;
  validate_acquisition(acq, n);
  return acq;
}

TatOptions PipelineConfig::tat_options() const {
  TatOptions o;
  o.backend = tat_backend;
  o.margin = margin;
  o.cfl = cfl;
  o.time_padding = time_padding;
  return o;
}

ConductivityOptions PipelineConfig::conductivity_options() const {
  ConductivityOptions o;
  o.margin = margin;
  o.eps_det_rel = eps_det;
  o.eps_par = eps_par;
  return o;
}

void PipelineConfig::validate() const {
  acquisition();
  require(std::isfinite(noise_level) && noise_level >= 0.0, ErrorCode::InvalidArgument,
          "config: noise level must be non-negative");
  require(margin >= 0.0 && margin < 0.5, ErrorCode::InvalidArgument, "config: margin must lie in [0, 0.5)");
  require(spectral_filter >= 0.0 && spectral_filter <= 1.0, ErrorCode::InvalidArgument,
          "config: spectral filter cutoff must lie in [0, 1]");
  require(eps_det >= 0.0 && eps_par >= 0.0, ErrorCode::InvalidArgument, "config: thresholds must be non-negative");
  require(time_padding >= 1, ErrorCode::InvalidArgument, "config: time padding must be at least 1");
  require(cfl > 0.0 && cfl <= 1.0, ErrorCode::InvalidArgument, "config: CFL number must lie in (0, 1]");
  require(solver.tolerance > 0.0 && solver.max_iterations > 0, ErrorCode::InvalidArgument,
          "config: solver tolerance and iteration limit must be positive");
}

std::string to_string(SynthesisBackend b) { return b == SynthesisBackend::Spectral ? "spectral" : "quadrature"; }

SynthesisBackend synthesis_backend_from_string(const std::string& s) {
  if (s == "spectral") return SynthesisBackend::Spectral;
  if (s == "quadrature") return SynthesisBackend::Quadrature;
  fail(ErrorCode::InvalidArgument, "unknown synthesis backend '" + s + "'");
}

std::string to_json(const PipelineConfig& cfg) {
  ojson j;
  j["n"] = cfg.n;
  j["m"] = cfg.m;
  j["n_t"] = cfg.n_t;
  j["dt"] = cfg.dt;
  j["c"] = cfg.c;
  j["rho"] = cfg.rho;
  j["b_abs"] = cfg.b_abs;
  j["noise_level"] = cfg.noise_level;
  j["seed"] = cfg.seed;
  j["solver_tolerance"] = cfg.solver.tolerance;
  j["solver_max_iterations"] = cfg.solver.max_iterations;
  j["margin"] = cfg.margin;
  j["spectral_filter"] = cfg.spectral_filter;
  j["eps_det"] = cfg.eps_det;
  j["eps_par"] = cfg.eps_par;
  j["tat_backend"] = to_string(cfg.tat_backend);
  j["synthesis_backend"] = to_string(cfg.synthesis_backend);
  j["time_padding"] = cfg.time_padding;
  j["cfl"] = cfg.cfl;
  j["leray_projection"] = cfg.leray_projection;
  j["save_measurements"] = cfg.save_measurements;
  return j.dump(2);
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("config: invalid JSON: ") + e.what());
  }
  require(j.is_object(), ErrorCode::InvalidArgument, "config: expected a JSON object");
  PipelineConfig cfg;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n") cfg.n = v.get<std::size_t>();
      else if (key == "m") cfg.m = v.get<std::size_t>();
      else if (key == "n_t") cfg.n_t = v.get<std::size_t>();
      else if (key == "dt") cfg.dt = v.get<double>();
      else if (key == "c") cfg.c = v.get<double>();
      else if (key == "rho") cfg.rho = v.get<double>();
      else if (key == "b_abs") cfg.b_abs = v.get<double>();
      else if (key == "noise_level") cfg.noise_level = v.get<double>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "solver_tolerance") cfg.solver.tolerance = v.get<double>();
      else if (key == "solver_max_iterations") cfg.solver.max_iterations = v.get<int>();
      else if (key == "margin") cfg.margin = v.get<double>();
      else if (key == "spectral_filter") cfg.spectral_filter = v.get<double>();
      else if (key == "eps_det") cfg.eps_det = v.get<double>();
      else if (key == "eps_par") cfg.eps_par = v.get<double>();
      else if (key == "tat_backend") cfg.tat_backend = tat_backend_from_string(v.get<std::string>());
      else if (key == "synthesis_backend") cfg.synthesis_backend = synthesis_backend_from_string(v.get<std::string>());
      else if (key == "time_padding") cfg.time_padding = v.get<int>();
      else if (key == "cfl") cfg.cfl = v.get<double>();
      else if (key == "leray_projection") cfg.leray_projection = v.get<bool>();
      else if (key == "save_measurements") cfg.save_measurements = v.get<bool>();
      else fail(ErrorCode::InvalidArgument, "config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
  return cfg;
}

std::string to_json(const PhantomSpec& spec) {
  ojson j;
  j["kind"] = to_string(spec.kind);
  j["margin"] = spec.margin;
  if (spec.kind == PhantomKind::SmoothedBalls) j["edge_width"] = spec.edge_width;
  ojson items = ojson::array();
  for (const auto& it : spec.items)
    items.push_back(ojson{{"center", it.center}, {"amplitude", it.amplitude}, {"radius", it.radius}});
  j["items"] = std::move(items);
  return j.dump(2);
}

PhantomSpec phantom_spec_from_json(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("phantom: invalid JSON: ") + e.what());
  }
  require(j.is_object() && j.contains("kind"), ErrorCode::InvalidArgument, "phantom: expected an object with 'kind'");
  const PhantomKind kind = phantom_kind_from_string(j["kind"].get<std::string>());
  PhantomSpec spec = kind == PhantomKind::SmoothBumps ? smooth_bumps_default() : smoothed_balls_default();
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "kind") continue;
      if (key == "margin") spec.margin = v.get<double>();
      else if (key == "edge_width") spec.edge_width = v.get<double>();
      else if (key == "items") {
        spec.items.clear();
        for (const auto& it : v) {
          PhantomItem p;
          p.center = it.at("center").get<std::array<double, 3>>();
          p.amplitude = it.at("amplitude").get<double>();
          p.radius = it.at("radius").get<double>();
          spec.items.push_back(p);
        }
      } else {
        fail(ErrorCode::InvalidArgument, "phantom: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("phantom: ") + e.what());
  }
  return spec;
}

Metrics metrics(const ScalarField3& recon, const ScalarField3& truth, double margin) {
  require(recon.n() == truth.n(), ErrorCode::GridMismatch, "metrics: grid mismatch");
  const std::size_t n = truth.n();
  double num = 0.0, den = 0.0, num_i = 0.0, den_i = 0.0, mx = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const double t = truth(i, j, k), d = recon(i, j, k) - t;
        num += d * d;
        den += t * t;
        mx = std::max(mx, std::abs(d));
        if (in_interior_region(i, j, k, n, margin)) {
          num_i += d * d;
          den_i += t * t;
        }
      }
  Metrics m;
  m.relative_l2 = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  m.relative_l2_interior = den_i > 0.0 ? std::sqrt(num_i / den_i) : std::sqrt(num_i);
  m.max_abs = mx;
  return m;
}

double StageTimings::reconstruction_seconds() const {
  double s = 0.0;
  for (const auto& [name, t] : seconds)
    if (name == "tat" || name == "current" || name == "conductivity") s += t;
  return s;
}

ForwardStage run_forward(const PhantomSpec& spec, const PipelineConfig& cfg) {
  ForwardStage out;
  out.phantom = make_phantom(spec, cfg.n);
  out.leads = solve_leads(out.phantom.conductivity, cfg.solver);
  for (const auto& r : out.leads.reports)
    require(r.converged, ErrorCode::NotConverged,
            "potential solve for lead " + std::to_string(r.k) + " did not converge");
  return out;
}

MeasurementSet run_synthesis(const LeadSystem& leads, const PipelineConfig& cfg) {
  SynthesisOptions o;
  o.backend = cfg.synthesis_backend;
  return synthesize(leads, cfg.acquisition(), o);
}

Reconstruction run_reconstruction(const MeasurementSet& data, const PipelineConfig& cfg, StageTimings* timings) {
  cfg.validate();
  Reconstruction r;
  r.curls = timed_stage("tat", timings, [&] {
    auto curls = reconstruct_curls(data, cfg.n, cfg.tat_options(), &r.tat_reports);
    if (cfg.spectral_filter > 0.0)
      for (auto& c : curls)
        for (int a = 0; a < 3; ++a) c[a] = spectral_filter(c[a], cfg.spectral_filter);
    return curls;
  });
  r.currents = timed_stage("current", timings, [&] {
    std::array<VectorField3, 3> j;
    CurrentRecoveryOptions o;
    o.leray_projection = cfg.leray_projection;
    for (int k = 1; k <= 3; ++k) j[k - 1] = recover_current(r.curls[k - 1], k, o, &r.current_reports[k - 1]);
    return j;
  });
  r.gradient = timed_stage("conductivity", timings, [&] {
    auto g = solve_gradient(r.currents, r.curls, cfg.conductivity_options(), &r.gradient_report);
    r.log_sigma = recover_log_sigma(g);
    return g;
  });
  return r;
}

std::vector<fs::path> write_forward(const fs::path& dir, const LeadSystem& leads) {
  fs::create_directories(dir);
  std::vector<fs::path> out;
  for (int k = 1; k <= 3; ++k) {
    const std::string s = std::to_string(k);
    out.push_back(dir / ("potential_k" + s + ".bin"));
    write_field(out.back(), leads.w[k - 1]);
    for (const auto& p : write_vector_field(dir, "current_k" + s, leads.current(k))) out.push_back(p);
    for (const auto& p : write_vector_field(dir, "curl_k" + s, leads.curl[k - 1])) out.push_back(p);
  }
  return out;
}

std::string forward_report_json(const LeadSystem& leads) {
  ojson solves = ojson::array();
  for (const auto& r : leads.reports)
    solves.push_back(ojson{{"k", r.k}, {"iterations", r.iterations}, {"residual", r.residual},
                           {"converged", r.converged}});
  ojson j;
  j["potential_solves"] = std::move(solves);
  j["curl_leakage"] = leads.curl_leakage;
  return j.dump(2);
}

std::vector<fs::path> write_reconstruction(const fs::path& dir, const Reconstruction& r) {
  std::vector<fs::path> out;
  auto append = [&](const auto& paths) { out.insert(out.end(), std::begin(paths), std::end(paths)); };
  const fs::path t = dir / "tat", c = dir / "current", s = dir / "conductivity";
  for (const auto& d : {t, c, s}) fs::create_directories(d);
  for (int k = 1; k <= 3; ++k) {
    const std::string ks = std::to_string(k);
    append(write_vector_field(t, "curl_k" + ks, r.curls[k - 1]));
    append(write_vector_field(c, "current_k" + ks, r.currents[k - 1]));
  }
  append(write_vector_field(s, "gradient", r.gradient));
  out.push_back(s / "log_sigma.bin");
  write_field(out.back(), r.log_sigma);
  out.push_back(s / "gradient_report.json");
  write_text(out.back(), r.gradient_report.to_json());
  return out;
}

std::string reconstruction_report_json(const Reconstruction& r) {
  ojson j;
  ojson tat = ojson::array();
  for (const auto& t : r.tat_reports) tat.push_back(tat_report_json(t));
  j["tat"] = std::move(tat);
  ojson cur = ojson::array();
  for (const auto& c : r.current_reports) cur.push_back(current_report_json(c));
  j["current_recovery"] = std::move(cur);
  j["gradient_solve"] = ojson::parse(r.gradient_report.to_json());
  return j.dump(2);
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path.string() + " for hashing");
  std::unique_ptr<EVP_MD_CTX, void (*)(EVP_MD_CTX*)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  require(ctx && EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) == 1, ErrorCode::Internal,
          "SHA-256 initialisation failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = in.gcount();
    if (got > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(got));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

fs::path write_manifest(const fs::path& dir, const std::vector<fs::path>& artifacts, const std::string& config_json,
                        const std::string& phantom_json) {
  ojson j;
  j["format"] = "maet-run";
  j["version"] = 1;
  j["config"] = ojson::parse(config_json);
  j["phantom"] = ojson::parse(phantom_json);
  ojson list = ojson::array();
  for (const auto& p : artifacts) {
    const fs::path full = p.is_absolute() ? p : dir / p;
    list.push_back(ojson{{"path", fs::relative(full, dir).generic_string()},
                         {"bytes", fs::file_size(full)},
                         {"sha256", sha256_file(full)}});
  }
  j["artifacts"] = std::move(list);
  const fs::path out = dir / "manifest.json";
  write_text(out, j.dump(2));
  return out;
}

PipelineResult run_pipeline(const PhantomSpec& spec, const PipelineConfig& cfg, const fs::path& dir) {
  cfg.validate();
  const fs::path out_dir = fs::absolute(dir);
  PipelineResult res;
  std::vector<fs::path> artifacts;
  auto mkdir = [&](const char* sub) {
    const fs::path p = out_dir / sub;
    fs::create_directories(p);
    return p;
  };
  auto add = [&](const auto& paths) { artifacts.insert(artifacts.end(), std::begin(paths), std::end(paths)); };
  auto add_field = [&](const fs::path& path, const ScalarField3& f) {
    write_field(path, f);
    artifacts.push_back(path);
  };

  res.forward = timed_stage("forward", &res.timings, [&] { return run_forward(spec, cfg); });
  const ForwardStage& fwd = res.forward;
  {
    const fs::path d = mkdir("phantom");
    add_field(d / "log_sigma.bin", fwd.phantom.log_sigma);
    add_field(d / "sigma.bin", fwd.phantom.conductivity.sigma);
    add(write_forward(mkdir("forward"), fwd.leads));
  }

  MeasurementSet data = timed_stage("synthesis", &res.timings, [&] { return run_synthesis(fwd.leads, cfg); });
  if (cfg.noise_level > 0.0)
    data = timed_stage("noise", &res.timings, [&] { return add_noise(data, cfg.noise_level, cfg.seed); });
  if (cfg.save_measurements) add(save_measurements(data, mkdir("measurements")));

  res.recon = run_reconstruction(data, cfg, &res.timings);
  data = MeasurementSet{};
  const Reconstruction& rec = res.recon;
  add(write_reconstruction(out_dir, rec));
  for (int k = 1; k <= 3; ++k) {
    res.curl_error[k - 1] = rel_l2(rec.curls[k - 1], fwd.leads.curl[k - 1]);
    res.current_error[k - 1] = rel_l2(rec.currents[k - 1], fwd.leads.current(k));
  }

  res.metrics = metrics(rec.log_sigma, fwd.phantom.log_sigma, cfg.margin);

  {
    // Figure-style exports: the central slice and a line profile through
    // the phantom features.
    const fs::path e = mkdir("exports");
    const bool balls = spec.kind == PhantomKind::SmoothedBalls;
    const double plane = balls ? 0.25 : 0.5;
    double lo = std::min(0.0, max_abs(fwd.phantom.log_sigma) * -1.0);
    double hi = max_abs(fwd.phantom.log_sigma);
    if (balls) lo = 0.0;
    if (!(hi > lo)) hi = lo + 1.0;
    SliceSpec ss;
    ss.axis = 2;
    ss.coordinate = plane;
    ss.range = std::make_pair(lo, hi);
    export_slice(rec.log_sigma, ss, SliceFormat::Png, e / "log_sigma_recon.png");
    export_slice(fwd.phantom.log_sigma, ss, SliceFormat::Png, e / "log_sigma_truth.png");
    for (const char* name : {"log_sigma_recon.png", "log_sigma_truth.png"}) {
      artifacts.push_back(e / name);
      artifacts.push_back(e / (std::string(name) + ".json"));
    }
    LineSpec ls;
    ls.axis = 1;
    ls.fixed = {0.25, plane};
    export_profile(rec.log_sigma, ls, e / "profile_recon.csv");
    export_profile(fwd.phantom.log_sigma, ls, e / "profile_truth.csv");
    artifacts.push_back(e / "profile_recon.csv");
    artifacts.push_back(e / "profile_truth.csv");
  }

  {
    ojson m;
    m["log_sigma"] = ojson{{"relative_l2", res.metrics.relative_l2},
                           {"max_abs", res.metrics.max_abs},
                           {"relative_l2_interior", res.metrics.relative_l2_interior}};
    m["curl_relative_l2"] = res.curl_error;
    m["current_relative_l2"] = res.current_error;
    m["forward"] = ojson::parse(forward_report_json(fwd.leads));
    m["reconstruction"] = ojson::parse(reconstruction_report_json(rec));
    write_text(out_dir / "metrics.json", m.dump(2));
    artifacts.push_back(out_dir / "metrics.json");
  }

  ojson t;
  for (const auto& [name, sec] : res.timings.seconds) t[name] = sec;
  t["reconstruction"] = res.timings.reconstruction_seconds();
  write_text(out_dir / "timings.json", t.dump(2));

  res.manifest = write_manifest(out_dir, artifacts, to_json(cfg), to_json(spec));
  return res;
}

}  // namespace maet
