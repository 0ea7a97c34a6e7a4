#include "maet/current_recovery.hpp"

#include <algorithm>
#include <cmath>

#include "maet/forward_em.hpp"
#include "maet/spectral.hpp"

namespace maet {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

VectorField3 leray_project(const VectorField3& c) {
  require(c.has_signature(curl_signature()), ErrorCode::ParityMismatch, "leray_project: input must carry curl parity");
  const ScalarField3 phi = poisson_dirichlet(divergence(c));
  VectorField3 out = c;
  out -= gradient_any(phi);
  return out;
}

VectorField3 recover_current(const VectorField3& curl_field, int k, const CurrentRecoveryOptions& opts,
                             CurrentRecoveryReport* report) {
  require(k >= 1 && k <= 3, ErrorCode::InvalidArgument, "recover_current: k must lie in 1..3");
  require(curl_field.has_signature(curl_signature()), ErrorCode::ParityMismatch,
          "recover_current: curl field must carry curl parity");
  for (int a = 0; a < 3; ++a)
    require(curl_field[a].all_finite(), ErrorCode::InvalidArgument, "recover_current: non-finite curl");

  const double cnorm = norm2(curl_field);
  VectorField3 c = opts.leray_projection ? leray_project(curl_field) : curl_field;
  VectorField3 rhs = curl(c);
  rhs *= -1.0;
  const VectorField3 j0 = poisson_mixed(rhs);
  VectorField3 j = full_current(j0, k);

  if (report) {
    report->k = k;
    report->input_divergence = ratio(norm2(divergence(curl_field)), cnorm);
    VectorField3 removed = curl_field;
    removed -= c;
    report->projected_fraction = ratio(norm2(removed), cnorm);
    report->divergence_residual = ratio(norm2(divergence(j0)), norm2(j0));
    report->boundary_flux_residual = boundary_flux_residual(j, k);
    double worst = 0.0;
    for (double f : current_plane_fluxes(j, k)) worst = std::max(worst, std::abs(f - 1.0));
    report->plane_flux_residual = worst;
  }
  return j;
}

std::vector<double> current_plane_fluxes(const VectorField3& j, int k) {
  require(k >= 1 && k <= 3, ErrorCode::InvalidArgument, "current_plane_fluxes: k must lie in 1..3");
  const std::size_t n = j.n();
  const int a = k - 1, b = (a + 1) % 3, c = (a + 2) % 3;
  const double h = 1.0 / static_cast<double>(n - 1);
  auto w = [n](std::size_t i) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; };
  std::vector<double> flux(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    double acc = 0.0;
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t p = 0; p < n; ++p) {
        std::size_t idx[3];
        idx[a] = s;
        idx[b] = p;
        idx[c] = q;
        acc += w(p) * w(q) * j[a](idx[0], idx[1], idx[2]);
      }
    flux[s] = acc * h * h;
  }
  return flux;
}

double boundary_flux_residual(const VectorField3& j, int k) {
  require(k >= 1 && k <= 3, ErrorCode::InvalidArgument, "boundary_flux_residual: k must lie in 1..3");
  const std::size_t n = j.n();
  double worst = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double target = (a == k - 1) ? 1.0 : 0.0;
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    for (std::size_t side : {std::size_t{0}, n - 1})
      for (std::size_t q = 0; q < n; ++q)
        for (std::size_t p = 0; p < n; ++p) {
          std::size_t idx[3];
          idx[a] = side;
          idx[b] = p;
          idx[c] = q;
          worst = std::max(worst, std::abs(j[a](idx[0], idx[1], idx[2]) - target));
        }
  }
  return worst;
}

}  // namespace maet
