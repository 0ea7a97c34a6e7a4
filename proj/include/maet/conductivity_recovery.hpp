#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "maet/field.hpp"

namespace maet {

using Vec3 = std::array<double, 3>;

/// Solves X.(A x B) = r1, X.(A x C) = r2, X.(B x C) = r3 by Cramer's rule:
/// X = (r3 A - r2 B + r1 C) / det[A B C]. Throws Singular when
/// |det| <= eps_det.
Vec3 cramer_solve(const Vec3& a, const Vec3& b, const Vec3& c, double r1, double r2, double r3,
                  double eps_det = 0.0);

/// Default singularity threshold for three currents: 1e-6 times the cube of
/// the geometric mean of their lengths.
double determinant_threshold(const Vec3& j1, const Vec3& j2, const Vec3& j3, double rel = 1e-6);

/// grad ln sigma from three currents and their curls, through the averaged
/// equations X.(Ja x Jb) = (Ca.Jb - Cb.Ja)/2. Throws Singular below eps_det.
Vec3 gradient_full(const std::array<Vec3, 3>& j, const std::array<Vec3, 3>& c, double eps_det = 0.0);

/// Two-current system. Rows Ja x Jb, (Ja.Jb)Ja - |Ja|^2 Jb and
/// (Ja.Jb)Jb - |Jb|^2 Ja, solved by Gaussian elimination. Empty when
/// |Ja x Jb| <= eps_par |Ja| |Jb|.
std::optional<Vec3> gradient_truncated(const Vec3& ja, const Vec3& jb, const Vec3& ca, const Vec3& cb,
                                       double eps_par = 1e-6);

enum class GradientMethod : std::uint8_t {
  Outside = 0,  // not solved (inside the boundary band)
  Full,
  Truncated12,
  Truncated13,
  Truncated23,
  Skipped,
};

std::string to_string(GradientMethod m);

struct GradientSolveReport {
  std::size_t n = 0;
  std::vector<GradientMethod> method;  // per node
  std::vector<double> determinant;     // J1.(J2 x J3), per node
  std::size_t full = 0, truncated = 0, skipped = 0, outside = 0;
  std::array<std::size_t, 3> truncated_pairs{};  // (1,2), (1,3), (2,3)
  double min_abs_det = 0.0;  // over solved nodes

  std::string to_json() const;
};

struct ConductivityOptions {
  double margin = 0.1;        // grad ln sigma is taken to vanish within this distance of the boundary
  double eps_det_rel = 1e-6;
  double eps_par = 1e-6;
};

/// Raised-cosine weight of a node: 0 within margin/2 of the boundary, 1 at
/// distance >= margin.
double taper_weight(std::size_t i, std::size_t j, std::size_t k, std::size_t n, double margin);

/// Pointwise solve at every node with positive taper weight, falling back to
/// the best-conditioned pair and then to neighbour averaging. The result is
/// tapered and tagged with curl parity.
VectorField3 solve_gradient(const std::array<VectorField3, 3>& currents, const std::array<VectorField3, 3>& curls,
                            const ConductivityOptions& opts = {}, GradientSolveReport* report = nullptr);

/// Laplace(ln sigma) = div G with ln sigma = 0 on the boundary. G must carry
/// curl parity. The result is tagged all-even, like a phantom's ln sigma.
ScalarField3 recover_log_sigma(const VectorField3& gradient);

/// solve_gradient followed by recover_log_sigma.
ScalarField3 reconstruct_log_sigma(const std::array<VectorField3, 3>& currents,
                                   const std::array<VectorField3, 3>& curls, const ConductivityOptions& opts = {},
                                   GradientSolveReport* report = nullptr);

}  // namespace maet
