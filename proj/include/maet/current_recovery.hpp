#pragma once

#include <vector>

#include "maet/field.hpp"

namespace maet {

/// Removes the gradient part of a field with curl parity: C - grad(phi) with
/// Laplace(phi) = div C and phi = 0 on the boundary.
VectorField3 leray_project(const VectorField3& c);

struct CurrentRecoveryOptions {
  bool leray_projection = true;
};

struct CurrentRecoveryReport {
  int k = 0;
  double input_divergence = 0.0;   // |div C| / |C| before projection
  double projected_fraction = 0.0;  // |C - P C| / |C|
  double divergence_residual = 0.0;  // |div J| / |J - e_k|
  double boundary_flux_residual = 0.0;  // max over faces of |J . n - I_k . n|
  double plane_flux_residual = 0.0;  // max over planes x_k = const of |flux - 1|
};

/// J^(k) = e_k + J0 where Laplace(J0) = -curl C, component by component in
/// the mixed sine/cosine basis, so that J . n equals the injected current
/// on every face. The e_k component is tagged all-even.
VectorField3 recover_current(const VectorField3& curl_field, int k, const CurrentRecoveryOptions& opts = {},
                             CurrentRecoveryReport* report = nullptr);

/// Trapezoid-rule net current through each node plane x_k = i h.
std::vector<double> current_plane_fluxes(const VectorField3& j, int k);

/// Largest deviation of the normal current from the pattern of unit net
/// current along e_k: J_k = 1 on the x_k faces, J_a = 0 on the other faces.
double boundary_flux_residual(const VectorField3& j, int k);

}  // namespace maet
