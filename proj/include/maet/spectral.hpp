#pragma once

#include "maet/field.hpp"

namespace maet {

/// Mixed cosine/sine transform. Cosine axes use a DCT-I over all n nodes,
/// sine axes a DST-I over the n-2 interior nodes. The coefficients are the
/// amplitudes of the basis functions cos(pi l x) / sin(pi l x).
Spectrum3 transform(const ScalarField3& f);
ScalarField3 inverse_transform(const Spectrum3& s);
ScalarField3 inverse_transform(const Spectrum3& s, ParitySig parity, std::size_t n);

/// Sum of |a|^2 times the per-mode basis norms; equals trapezoid_norm_sq of
/// the synthesized field.
double weighted_coefficient_norm_sq(const Spectrum3& s);

/// Spectral derivative along `axis`; flips the parity on that axis.
Spectrum3 differentiate(const Spectrum3& s, int axis);
ScalarField3 partial(const ScalarField3& f, int axis);

/// Gradient of an all-even scalar field.
VectorField3 gradient(const ScalarField3& f);
/// Gradient for any parity signature.
VectorField3 gradient_any(const ScalarField3& f);

VectorField3 curl(const VectorField3& v);
ScalarField3 divergence(const VectorField3& v);
ScalarField3 laplacian(const ScalarField3& f);

/// Solve Laplace(u) = rhs with u = 0 on the boundary; rhs must be all-odd.
ScalarField3 poisson_dirichlet(const ScalarField3& rhs);

/// Component-wise Poisson solve for a field with current parity.
VectorField3 poisson_mixed(const VectorField3& rhs);

/// Antiderivative along `axis` of a field that is odd on that axis, fixed
/// to vanish on the plane x_axis = 0. The result is even on `axis`.
ScalarField3 antiderivative(const ScalarField3& f, int axis);

/// Isotropic raised-cosine low-pass. Modes with |(l,m,q)|/(n-1) <= cutoff are
/// kept, the weight falls to zero at radius 1.
ScalarField3 spectral_filter(const ScalarField3& f, double cutoff);

}  // namespace maet
