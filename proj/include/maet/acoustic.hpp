#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "maet/field.hpp"
#include "maet/forward_em.hpp"

namespace maet {

/// Acquisition geometry and physical scale factors.
struct Acquisition {
  std::size_t m = 0;    // face source points per axis
  std::size_t n_t = 0;  // time samples t_s = s * dt, s = 0..n_t-1
  double dt = 0.0;
  double c = 1.0;
  double rho = 1.0;
  double b_abs = 1.0;  // |B|
};

/// m = n, dt = h / (2c) and the shortest n_t with (n_t - 1) dt c >= sqrt(3).
Acquisition default_acquisition(std::size_t n, double c = 1.0);

/// Throws if the acquisition cannot cover t in [0, sqrt(3)/c] or m is not
/// in [2, n].
void validate_acquisition(const Acquisition& acq, std::size_t n);

/// Face index f = 2a + s: the face x_a = s. Points form an m x m node grid
/// over the two remaining axes, the lower-numbered axis fastest.
std::array<double, 3> face_point(int face, std::size_t point, std::size_t m);

/// Time series on all six faces for one (k, j) pair, stored face-major,
/// point-major, time-minor.
struct FaceSeries {
  std::size_t m = 0;
  std::size_t n_t = 0;
  std::vector<double> data;

  FaceSeries() = default;
  FaceSeries(std::size_t m_, std::size_t n_t_) : m(m_), n_t(n_t_), data(6 * m_ * m_ * n_t_, 0.0) {}

  std::size_t points_per_face() const { return m * m; }
  std::size_t series_count() const { return 6 * m * m; }
  std::size_t offset(int face, std::size_t point) const {
    return (static_cast<std::size_t>(face) * m * m + point) * n_t;
  }
  double* series(std::size_t index) { return data.data() + index * n_t; }
  const double* series(std::size_t index) const { return data.data() + index * n_t; }
  double& at(int face, std::size_t point, std::size_t t) { return data[offset(face, point) + t]; }
  double at(int face, std::size_t point, std::size_t t) const { return data[offset(face, point) + t]; }
};

struct NoiseRecord {
  double level = 0.0;
  std::uint64_t seed = 0;
};

struct MeasurementSet {
  std::size_t n = 0;  // volume grid the data were simulated on
  Acquisition acq;
  std::optional<NoiseRecord> noise;
  std::array<FaceSeries, 9> pairs;  // index 3 (k-1) + (j-1)

  FaceSeries& pair(int k, int j) { return pairs[static_cast<std::size_t>(3 * (k - 1) + (j - 1))]; }
  const FaceSeries& pair(int k, int j) const { return pairs[static_cast<std::size_t>(3 * (k - 1) + (j - 1))]; }
  std::size_t sample_count() const;
};

/// Average of h (extended by zero outside the unit cube) over the sphere
/// |x - center| = r: Fibonacci point set with ceil(4 pi (r/h)^2 q) points
/// and tricubic Lagrange interpolation.
double spherical_mean(const ScalarField3& h, const std::array<double, 3>& center, double r,
                      double oversampling = 4.0);

enum class SynthesisBackend {
  /// Exact wave propagation of the band-limited field in a periodic box
  /// large enough that no image reaches the faces before the signal ends.
  Spectral,
  /// Direct spherical means per (point, time); O(n^2) per sample.
  Quadrature,
};

struct SynthesisOptions {
  SynthesisBackend backend = SynthesisBackend::Spectral;
  double oversampling = 4.0;  // quadrature backend only
  /// Return dM/dt instead of M (spectral backend only).
  bool time_derivative = false;
};

/// Series M(y, t) = (c t / rho) * mean_{|x-y| = ct} (b_abs * h) on all faces.
FaceSeries synthesize_pair(const ScalarField3& h, const Acquisition& acq, const SynthesisOptions& opts = {});

/// All nine families: h_{jk} = |B| * (C^(k))_j.
MeasurementSet synthesize(const LeadSystem& leads, const Acquisition& acq, const SynthesisOptions& opts = {});

/// Per-series uniform noise rescaled to level * ||series||_2; series that are
/// identically zero stay zero. Deterministic for a fixed seed.
MeasurementSet add_noise(const MeasurementSet& data, double level, std::uint64_t seed);

/// Deterministic per-series seed derived from a master seed.
std::uint64_t series_seed(std::uint64_t master, std::uint64_t series_index);

/// Directory layout: manifest.json and series_k{k}_j{j}.bin.
std::vector<std::filesystem::path> save_measurements(const MeasurementSet& data, const std::filesystem::path& dir);
MeasurementSet load_measurements(const std::filesystem::path& dir);

}  // namespace maet
