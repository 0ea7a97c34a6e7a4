// maet: command-line front end over the C interface.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "maet/maet.h"

namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  int code;
  Failure(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

void check(maet_status s) {
  if (s != MAET_OK) throw Failure(static_cast<int>(s), std::string(maet_status_string(s)) + ": " + maet_last_error());
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Field = Handle<maet_field, maet_field_free>;
using Config = Handle<maet_config, maet_config_free>;
using Spec = Handle<maet_phantom_spec, maet_phantom_spec_free>;
using Data = Handle<maet_measurements, maet_measurements_free>;

std::string take(char* s) {
  std::string out = s ? s : "";
  maet_string_free(s);
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure(MAET_ERR_IO, "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text << '\n';
  if (!out) throw Failure(MAET_ERR_IO, "cannot write " + path.string());
}

// Options shared by the subcommands that take a pipeline configuration.
struct ConfigArgs {
  std::string file;
  std::optional<std::size_t> grid;
  std::optional<double> noise_level;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;

  void add(CLI::App* app, bool with_grid, bool with_noise) {
    app->add_option("--config", file, "JSON configuration file")->check(CLI::ExistingFile);
    if (with_grid) app->add_option("--grid", grid, "Volume grid size n");
    if (with_noise) {
      app->add_option("--noise-level", noise_level, "Relative L2 noise level per series");
      app->add_option("--seed", seed, "Noise seed");
    }
    app->add_option("--set", sets, "Override a config key: key=<json value>");
  }

  void build(Config& cfg) const {
    if (file.empty())
      check(maet_config_new(cfg.out()));
    else
      check(maet_config_from_json(read_text(file).c_str(), cfg.out()));
    if (grid) check(maet_config_set(cfg.get(), "n", std::to_string(*grid).c_str()));
    if (noise_level) {
      std::ostringstream v;
      v.precision(17);
      v << *noise_level;
      check(maet_config_set(cfg.get(), "noise_level", v.str().c_str()));
    }
    if (seed) check(maet_config_set(cfg.get(), "seed", std::to_string(*seed).c_str()));
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw Failure(MAET_ERR_INVALID_ARGUMENT, "--set expects key=value, got " + s);
      check(maet_config_set(cfg.get(), s.substr(0, eq).c_str(), s.substr(eq + 1).c_str()));
    }
  }
};

struct SpecArgs {
  std::string kind = "smooth-bumps";
  std::string file;

  void add(CLI::App* app) {
    app->add_option("--kind", kind, "smooth-bumps or smoothed-balls")->check(CLI::IsMember({"smooth-bumps", "smoothed-balls"}));
    app->add_option("--spec", file, "Phantom JSON file (overrides --kind)")->check(CLI::ExistingFile);
  }

  void build(Spec& spec) const {
    if (file.empty())
      check(maet_phantom_spec_default(kind.c_str(), spec.out()));
    else
      check(maet_phantom_spec_from_json(read_text(file).c_str(), spec.out()));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MAET forward simulation and reconstruction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", maet_version());

  std::string out_dir, out_file;

  // phantom
  auto* phantom = app.add_subcommand("phantom", "Sample a phantom: log_sigma.bin, sigma.bin, phantom.json");
  SpecArgs phantom_spec;
  phantom_spec.add(phantom);
  std::size_t phantom_grid = 33;
  phantom->add_option("--grid", phantom_grid, "Volume grid size n");
  phantom->add_option("--out-dir", out_dir, "Output directory")->required();

  // forward
  auto* forward = app.add_subcommand("forward", "Lead potentials, currents and curls for a conductivity");
  std::string sigma_path;
  forward->add_option("--sigma", sigma_path, "Conductivity field file")->required()->check(CLI::ExistingFile);
  ConfigArgs forward_cfg;
  forward_cfg.add(forward, true, false);
  forward->add_option("--out-dir", out_dir, "Output directory")->required();

  // synthesize
  auto* synth = app.add_subcommand("synthesize", "Noiseless measurements from a forward directory");
  std::string forward_dir;
  synth->add_option("--forward-dir", forward_dir, "Output of 'forward'")->required()->check(CLI::ExistingDirectory);
  ConfigArgs synth_cfg;
  synth_cfg.add(synth, false, false);
  synth->add_option("--out-dir", out_dir, "Measurement directory")->required();

  // noise
  auto* noise = app.add_subcommand("noise", "Add per-series uniform noise to a measurement set");
  std::string data_dir;
  double noise_level = 0.0;
  std::uint64_t noise_seed = 1;
  noise->add_option("--measurements", data_dir, "Measurement directory")->required()->check(CLI::ExistingDirectory);
  noise->add_option("--noise-level", noise_level, "Relative L2 noise level per series")->required();
  noise->add_option("--seed", noise_seed, "Noise seed");
  noise->add_option("--out-dir", out_dir, "Output measurement directory")->required();

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "TAT inversion, current and conductivity recovery");
  recon->add_option("--measurements", data_dir, "Measurement directory")->required()->check(CLI::ExistingDirectory);
  ConfigArgs recon_cfg;
  recon_cfg.add(recon, false, false);
  recon->add_option("--out-dir", out_dir, "Output directory")->required();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "All stages with artifacts, metrics and manifest");
  SpecArgs pipe_spec;
  pipe_spec.add(pipe);
  ConfigArgs pipe_cfg;
  pipe_cfg.add(pipe, true, true);
  pipe->add_option("--out-dir", out_dir, "Run directory")->required();

  // metrics
  auto* met = app.add_subcommand("metrics", "Error norms of a reconstruction against the truth");
  std::string recon_path, truth_path;
  double margin = 0.1;
  met->add_option("--recon", recon_path, "Reconstructed field")->required()->check(CLI::ExistingFile);
  met->add_option("--truth", truth_path, "Reference field")->required()->check(CLI::ExistingFile);
  met->add_option("--margin", margin, "Boundary band excluded from the interior norm");
  met->add_option("--out", out_file, "Write JSON here instead of stdout");

  // slice
  auto* slice = app.add_subcommand("slice", "Export a plane as PNG or CSV");
  std::string field_path, format = "png";
  int axis = 2;
  double coord = 0.5;
  std::vector<double> range;
  slice->add_option("--field", field_path, "Field file")->required()->check(CLI::ExistingFile);
  slice->add_option("--axis", axis, "Plane normal axis (0, 1, 2)")->check(CLI::Range(0, 2));
  slice->add_option("--coord", coord, "Plane coordinate in [0, 1]");
  slice->add_option("--range", range, "Gray-scale range lo hi")->expected(2);
  slice->add_option("--format", format, "png or csv")->check(CLI::IsMember({"png", "csv"}));
  slice->add_option("--out", out_file, "Output file")->required();

  // profile
  auto* prof = app.add_subcommand("profile", "Export a line profile as CSV");
  std::vector<double> fixed{0.25, 0.5};
  int line_axis = 1;
  prof->add_option("--field", field_path, "Field file")->required()->check(CLI::ExistingFile);
  prof->add_option("--axis", line_axis, "Axis the line runs along (0, 1, 2)")->check(CLI::Range(0, 2));
  prof->add_option("--fixed", fixed, "Coordinates of the two other axes, lower axis first")->expected(2);
  prof->add_option("--out", out_file, "Output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*phantom) {
      Spec spec;
      phantom_spec.build(spec);
      Field ls, sg;
      check(maet_make_phantom(spec.get(), phantom_grid, ls.out(), sg.out()));
      fs::create_directories(out_dir);
      check(maet_field_write(ls.get(), (fs::path(out_dir) / "log_sigma.bin").c_str()));
      check(maet_field_write(sg.get(), (fs::path(out_dir) / "sigma.bin").c_str()));
      char* js = nullptr;
      check(maet_phantom_spec_to_json(spec.get(), &js));
      write_text(fs::path(out_dir) / "phantom.json", take(js));
    } else if (*forward) {
      Config cfg;
      forward_cfg.build(cfg);
      Field sg;
      check(maet_field_read(sigma_path.c_str(), sg.out()));
      fs::create_directories(out_dir);
      char* rep = nullptr;
      check(maet_forward(sg.get(), cfg.get(), out_dir.c_str(), &rep));
      write_text(fs::path(out_dir) / "forward_report.json", take(rep));
    } else if (*synth) {
      Config cfg;
      synth_cfg.build(cfg);
      Data d;
      check(maet_synthesize(forward_dir.c_str(), cfg.get(), d.out()));
      check(maet_measurements_save(d.get(), out_dir.c_str()));
    } else if (*noise) {
      Data in, out;
      check(maet_measurements_load(data_dir.c_str(), in.out()));
      check(maet_measurements_add_noise(in.get(), noise_level, noise_seed, out.out()));
      check(maet_measurements_save(out.get(), out_dir.c_str()));
    } else if (*recon) {
      Config cfg;
      recon_cfg.build(cfg);
      Data d;
      check(maet_measurements_load(data_dir.c_str(), d.out()));
      fs::create_directories(out_dir);
      char* rep = nullptr;
      check(maet_reconstruct(d.get(), cfg.get(), out_dir.c_str(), nullptr, &rep));
      write_text(fs::path(out_dir) / "reconstruction_report.json", take(rep));
    } else if (*pipe) {
      Spec spec;
      pipe_spec.build(spec);
      Config cfg;
      pipe_cfg.build(cfg);
      char* m = nullptr;
      check(maet_run_pipeline(spec.get(), cfg.get(), out_dir.c_str(), &m));
      std::cout << take(m);
    } else if (*met) {
      Field r, t;
      check(maet_field_read(recon_path.c_str(), r.out()));
      check(maet_field_read(truth_path.c_str(), t.out()));
      maet_metrics m{};
      check(maet_field_metrics(r.get(), t.get(), margin, &m));
      std::ostringstream js;
      js.precision(17);
      js << "{\n  \"relative_l2\": " << m.relative_l2 << ",\n  \"max_abs\": " << m.max_abs
         << ",\n  \"relative_l2_interior\": " << m.relative_l2_interior << "\n}";
      if (out_file.empty())
        std::cout << js.str() << '\n';
      else
        write_text(out_file, js.str());
    } else if (*slice) {
      Field f;
      check(maet_field_read(field_path.c_str(), f.out()));
      const bool use_range = range.size() == 2;
      check(maet_export_slice(f.get(), axis, coord, use_range ? 1 : 0, use_range ? range[0] : 0.0,
                              use_range ? range[1] : 0.0, format == "csv" ? MAET_SLICE_CSV : MAET_SLICE_PNG,
                              out_file.c_str()));
    } else if (*prof) {
      Field f;
      check(maet_field_read(field_path.c_str(), f.out()));
      check(maet_export_profile(f.get(), line_axis, fixed[0], fixed[1], out_file.c_str()));
    }
  } catch (const Failure& e) {
    std::cerr << "maet: " << e.what() << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "maet: " << e.what() << '\n';
    return MAET_ERR_INTERNAL;
  }
  return 0;
}
