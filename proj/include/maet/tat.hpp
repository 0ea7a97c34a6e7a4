#pragma once

#include <array>
#include <string>
#include <vector>

#include "maet/acoustic.hpp"
#include "maet/field.hpp"

namespace maet {

/// Fourth-order centered differences inside, fourth-order one-sided
/// differences at the two samples nearest each end. Needs at least 5 samples.
std::vector<double> time_differentiate(const std::vector<double>& series, double dt);

/// Applies time_differentiate to every series of a face set.
FaceSeries time_differentiate(const FaceSeries& data, double dt);

enum class TatBackend {
  /// Expansion in the Dirichlet eigenfunctions of the cube, with
  /// coefficients from boundary integrals of the time cosine transform of
  /// the data. O(n^3 log n).
  Series,
  /// Backward leapfrog from a zero terminal state, Dirichlet faces driven
  /// by the time-differentiated data. O(n^4).
  TimeReversal,
};

std::string to_string(TatBackend b);
TatBackend tat_backend_from_string(const std::string& s);

struct TimeReversalConfig {
  std::size_t n = 0;
  std::size_t steps = 0;
  double cfl = 0.5;
  double terminal_time = 0.0;  // sqrt(3) / c
  double dt = 0.0;             // solver step, terminal_time / steps
};

/// Smallest step count with c dt <= cfl * h / sqrt(3). Rejects cfl outside
/// (0, 1], which would make the leapfrog scheme unstable.
TimeReversalConfig make_time_reversal_config(std::size_t n, double c, double cfl = 0.5);

struct TatOptions {
  TatBackend backend = TatBackend::Series;
  double margin = 0.1;  // output is zeroed outside the interior region
  double cfl = 0.5;     // time reversal only
  int time_padding = 4;  // series only: oversampling of the frequency grid
};

struct TatReport {
  TatBackend backend = TatBackend::Series;
  std::size_t n = 0;
  std::size_t steps = 0;    // solver steps (time reversal) or frequency samples (series)
  double solver_dt = 0.0;
  double margin = 0.0;
  double energy = 0.0;      // trapezoid L2 norm of the returned field
  double masked_fraction = 0.0;  // share of the L2 norm removed by the mask
};

/// Backward wave solve for the field P = dM/dt, returning P(., 0). The
/// result equals (c/rho) |B| h wherever the data are exact.
ScalarField3 time_reverse(const FaceSeries& data, const Acquisition& acq, const TimeReversalConfig& cfg,
                          double margin, TatReport* report = nullptr);

/// Same quantity by the eigenfunction series.
ScalarField3 series_inversion(const FaceSeries& data, const Acquisition& acq, std::size_t n, double margin,
                              int time_padding = 4, TatReport* report = nullptr);

/// Dispatches on options.backend.
ScalarField3 invert_pair(const FaceSeries& data, const Acquisition& acq, std::size_t n, const TatOptions& opts = {},
                         TatReport* report = nullptr);

/// C = rho / (c |B|) * (h_1, h_2, h_3), tagged with curl parity.
VectorField3 assemble_curl(const ScalarField3& h1, const ScalarField3& h2, const ScalarField3& h3, double rho,
                           double b_abs, double c = 1.0);

/// Third curl component from the first two, using div C = 0 and C = 0 on
/// the plane x_3 = 0: C_3 = -int_0^{x_3} (d1 C_1 + d2 C_2) dx_3'.
ScalarField3 complete_curl_two_directions(const ScalarField3& c1, const ScalarField3& c2);

/// All nine inversions; curls[k-1] is C^(k) on an n-node grid.
std::array<VectorField3, 3> reconstruct_curls(const MeasurementSet& data, std::size_t n, const TatOptions& opts = {},
                                              std::array<TatReport, 9>* reports = nullptr);

}  // namespace maet
