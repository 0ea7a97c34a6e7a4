#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "maet/field.hpp"

namespace maet {

/// Conductivity sigma on the node grid (all-even parity). Construction
/// validates positivity and sigma == 1 inside the boundary margin.
struct Conductivity {
  ScalarField3 sigma;
  double margin = 0.1;
};

Conductivity make_conductivity(ScalarField3 sigma, double margin = 0.1);

/// Nodes whose distance to the boundary is at least `margin`.
bool in_interior_region(std::size_t i, std::size_t j, std::size_t k, std::size_t n, double margin);

/// Constant normal boundary current per face; face index is 2*axis + side
/// (side 0: x_axis = 0, side 1: x_axis = 1).
struct BoundaryCurrent {
  int k = 1;
  std::array<double, 6> face_value{};
  /// Integral of the current over the whole boundary of the unit cube.
  double total() const;
};

BoundaryCurrent boundary_current(int k);

struct SolverOptions {
  double tolerance = 1e-10;
  int max_iterations = 500;
};

struct SolveReport {
  int k = 0;
  int iterations = 0;
  double residual = 0.0;  // relative, ||b - A w|| / ||b||
  bool converged = false;
};

/// Potential for lead k, normalized so that a unit net current crosses
/// every plane x_k = const (sigma == 1 gives w = x_k - 1/2). Zero mean.
ScalarField3 solve_potential(const Conductivity& sigma, int k, const SolverOptions& opts = {},
                             SolveReport* report = nullptr);

/// Deviation J0 = sigma * grad(w) - e_k with current parity.
VectorField3 compute_current_deviation(const ScalarField3& sigma, const ScalarField3& w, int k);

/// Full current e_k + J0. Component k carries the constant and is tagged
/// all-even; the other two components keep current parity.
VectorField3 full_current(const VectorField3& j0, int k);

/// Nodes within `dilation` grid steps (Chebyshev distance) of a node where
/// sigma != 1.
std::vector<std::uint8_t> curl_support_mask(const ScalarField3& sigma, int dilation = 2);

struct LeadSystem {
  std::array<ScalarField3, 3> w;
  std::array<VectorField3, 3> j0;   // current deviations, current parity
  std::array<VectorField3, 3> curl;  // C^(k) = curl J^(k), curl parity
  std::array<SolveReport, 3> reports;
  std::vector<std::uint8_t> support;  // curl_support_mask of sigma
  /// Relative L2 norm of the spectral curl discarded outside `support`.
  std::array<double, 3> curl_leakage{};

  VectorField3 current(int k) const { return full_current(j0[k - 1], k); }
};

LeadSystem solve_leads(const Conductivity& sigma, const SolverOptions& opts = {});

/// Spectral curl of each J0, restricted to `leads.support`. The exact curl
/// vanishes wherever sigma is locally constant; at desk resolution the
/// spectral curl leaks a small tail outside, which is cut off here. The
/// relative size of the discarded part is written to `leakage` if given.
std::array<VectorField3, 3> compute_curls(const LeadSystem& leads, std::array<double, 3>* leakage = nullptr);

/// Net finite-volume current through each staggered plane x_k = (i + 1/2) h.
std::vector<double> plane_fluxes(const ScalarField3& sigma, const ScalarField3& w, int k);

/// Relative L2 norm of the discrete flux-divergence residual.
double divergence_residual(const ScalarField3& sigma, const ScalarField3& w, int k);

}  // namespace maet
