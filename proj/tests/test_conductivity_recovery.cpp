#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "maet/conductivity_recovery.hpp"
#include "maet/forward_em.hpp"
#include "maet/phantom.hpp"
#include "maet/spectral.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace maet;

namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dotv(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double normv(const Vec3& a) { return std::sqrt(dotv(a, a)); }
double distv(const Vec3& a, const Vec3& b) { return normv({a[0] - b[0], a[1] - b[1], a[2] - b[2]}); }

Vec3 random_vec(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng), u(rng), u(rng)};
}


// Least squares over the six dotted equations, each pair sharing a row.
Vec3 lsq6(const std::array<Vec3, 3>& j, const std::array<Vec3, 3>& c) {
  Eigen::Matrix<double, 6, 3> a;
  Eigen::Matrix<double, 6, 1> b;
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int p = 0; p < 3; ++p) {
    const int s = pairs[p][0], t = pairs[p][1];
    const Vec3 row = cross(j[s], j[t]);
    for (int i = 0; i < 3; ++i) a(2 * p, i) = a(2 * p + 1, i) = row[i];
    b(2 * p) = dotv(c[s], j[t]);
    b(2 * p + 1) = -dotv(c[t], j[s]);
  }
  const Eigen::Vector3d x = a.colPivHouseholderQr().solve(b);
  return {x(0), x(1), x(2)};
}

double rel_l2_region(const ScalarField3& a, const ScalarField3& b, double margin) {
  const std::size_t n = a.n();
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        if (!in_interior_region(i, j, k, n, margin)) continue;
        const double d = a(i, j, k) - b(i, j, k);
        num += d * d;
        den += b(i, j, k) * b(i, j, k);
      }
  return std::sqrt(num / den);
}

double rel_l2_region(const VectorField3& a, const VectorField3& b, double margin) {
  const std::size_t n = a.n();
  double num = 0.0, den = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          if (!in_interior_region(i, j, k, n, margin)) continue;
          const double d = a[c](i, j, k) - b[c](i, j, k);
          num += d * d;
          den += b[c](i, j, k) * b[c](i, j, k);
        }
  return std::sqrt(num / den);
}

ScalarField3 as_odd(ScalarField3 f) {
  f.set_parity(kAllOdd);
  f.enforce_parity();
  return f;
}

// Uniform currents e_k with curls g x e_k, for a fixed g, on an n-grid.
void uniform_system(std::size_t n, const Vec3& g, std::array<VectorField3, 3>& jf, std::array<VectorField3, 3>& cf) {
  for (int k = 0; k < 3; ++k) {
    jf[k] = VectorField3(ScalarField3(n, kAllEven), ScalarField3(n, kAllEven), ScalarField3(n, kAllEven));
    cf[k] = VectorField3(ScalarField3(n, kAllEven), ScalarField3(n, kAllEven), ScalarField3(n, kAllEven));
    Vec3 e{};
    e[k] = 1.0;
    const Vec3 c = cross(g, e);
    for (int a = 0; a < 3; ++a) {
      for (auto& v : jf[k][a].storage()) v = e[a];
      for (auto& v : cf[k][a].storage()) v = c[a];
    }
  }
}

}  // namespace

TEST_CASE("cramer_solve") {
  const Vec3 x = cramer_solve({1, 0, 0}, {0, 1, 0}, {0, 0, 1}, 0.3, -0.7, 1.1);
  CHECK(x[0] == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(x[1] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(x[2] == doctest::Approx(0.3).epsilon(1e-15));

  std::mt19937_64 rng(21);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Vec3 a = random_vec(rng), b = random_vec(rng), c = random_vec(rng);
    const Vec3 r = random_vec(rng);
    const Vec3 s = cramer_solve(a, b, c, r[0], r[1], r[2]);
    const double scale = normv(s) * normv(a) * normv(b) + normv(r);
    worst = std::max({worst, std::abs(dotv(s, cross(a, b)) - r[0]) / scale,
                      std::abs(dotv(s, cross(a, c)) - r[1]) / scale, std::abs(dotv(s, cross(b, c)) - r[2]) / scale});
  }
  CHECK(worst <= 1e-12);
  CHECK_THROWS_AS(cramer_solve({1, 2, 3}, {2, 4, 6}, {0, 0, 1}, 1, 1, 1), Error);
  CHECK_THROWS_AS(cramer_solve({1, 0, 0}, {0, 1, 0}, {0, 0, 1e-9}, 1, 1, 1, 1e-6), Error);
}

TEST_CASE("gradient_full trivial cases") {
  const std::array<Vec3, 3> e{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  const Vec3 g{0.4, -1.3, 2.2};
  const std::array<Vec3, 3> c{cross(g, e[0]), cross(g, e[1]), cross(g, e[2])};
  CHECK(distv(gradient_full(e, c), g) <= 1e-15);
  const std::array<Vec3, 3> zero{};
  const Vec3 x = gradient_full(e, zero);
  CHECK(normv(x) == 0.0);
  CHECK_THROWS_AS(gradient_full({e[0], e[0], e[2]}, c, 1e-6), Error);
}

TEST_CASE("gradient_full matches dense least squares on 10^4 consistent systems") {
  std::mt19937_64 rng(22);
  double worst9 = 0.0, worst_formula = 0.0;
  int used = 0;
  while (used < 10000) {
    const std::array<Vec3, 3> j{random_vec(rng), random_vec(rng), random_vec(rng)};
    const double det = dotv(j[0], cross(j[1], j[2]));
    if (std::abs(det) < 1e-3) continue;
    ++used;
    const Vec3 g = random_vec(rng);
    const std::array<Vec3, 3> c{cross(g, j[0]), cross(g, j[1]), cross(g, j[2])};
    const Vec3 x = gradient_full(j, c, determinant_threshold(j[0], j[1], j[2]));
    worst9 = std::max(worst9, distv(x, testing::lsq9(j, c)) / normv(g));

    // Explicit form: M (C2.J3 - C3.J2, -C1.J3 + C3.J1, C1.J2 - C2.J1) / (2 det).
    const Vec3 v{dotv(c[1], j[2]) - dotv(c[2], j[1]), -dotv(c[0], j[2]) + dotv(c[2], j[0]),
                 dotv(c[0], j[1]) - dotv(c[1], j[0])};
    Vec3 y{};
    for (int i = 0; i < 3; ++i) y[i] = (j[0][i] * v[0] + j[1][i] * v[1] + j[2][i] * v[2]) / (2.0 * det);
    worst_formula = std::max(worst_formula, distv(x, y) / normv(g));
  }
  MESSAGE("gradient_full vs 9-equation least squares: " << worst9);
  CHECK(worst9 <= 1e-10);
  CHECK(worst_formula <= 1e-12);
}

TEST_CASE("gradient_full is the least-squares solution of the averaged system on inconsistent data") {
  std::mt19937_64 rng(23);
  double worst = 0.0;
  for (int t = 0; t < 2000; ++t) {
    const std::array<Vec3, 3> j{random_vec(rng), random_vec(rng), random_vec(rng)};
    if (std::abs(dotv(j[0], cross(j[1], j[2]))) < 1e-3) continue;
    const std::array<Vec3, 3> c{random_vec(rng), random_vec(rng), random_vec(rng)};
    const Vec3 x = gradient_full(j, c);
    const Vec3 y = lsq6(j, c);
    worst = std::max(worst, distv(x, y) / std::max(1.0, normv(y)));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("gradient_truncated") {
  const Vec3 g{-0.25, 0.5, 1.75};
  const Vec3 e1{1, 0, 0}, e2{0, 1, 0};
  const auto x = gradient_truncated(e1, e2, cross(g, e1), cross(g, e2));
  REQUIRE(x.has_value());
  CHECK(distv(*x, g) <= 1e-15);
  CHECK_FALSE(gradient_truncated(e1, {2, 0, 0}, {}, {}).has_value());
  CHECK_FALSE(gradient_truncated(e1, {1, 1e-9, 0}, {}, {}).has_value());
  CHECK_FALSE(gradient_truncated(e1, {0, 0, 0}, {}, {}).has_value());

  std::mt19937_64 rng(24);
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const std::array<Vec3, 3> j{random_vec(rng), random_vec(rng), random_vec(rng)};
    if (std::abs(dotv(j[0], cross(j[1], j[2]))) < 1e-3) continue;
    const Vec3 gg = random_vec(rng);
    const std::array<Vec3, 3> c{cross(gg, j[0]), cross(gg, j[1]), cross(gg, j[2])};
    const Vec3 full = gradient_full(j, c);
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& p : pairs) {
      if (normv(cross(j[p[0]], j[p[1]])) < 1e-2 * normv(j[p[0]]) * normv(j[p[1]])) continue;
      const auto tr = gradient_truncated(j[p[0]], j[p[1]], c[p[0]], c[p[1]]);
      REQUIRE(tr.has_value());
      worst = std::max(worst, distv(*tr, full) / normv(gg));
    }
  }
  MESSAGE("truncated vs full on consistent systems: " << worst);
  CHECK(worst <= 1e-10);
}

TEST_CASE("solve_gradient tags, fallbacks and neighbour fill") {
  const std::size_t n = 11;
  const Vec3 g{0.2, -0.1, 0.3};
  std::array<VectorField3, 3> jf, cf;
  uniform_system(n, g, jf, cf);
  const std::size_t mid = 5 + n * (5 + n * 5);
  const std::size_t other = 4 + n * (5 + n * 5);
  // Third current vanishes at `other`; all three are parallel at `mid`.
  for (int a = 0; a < 3; ++a) {
    jf[2][a][other] = 0.0;
    cf[2][a][other] = 0.0;
    for (int k = 0; k < 3; ++k) {
      jf[k][a][mid] = a == 0 ? 1.0 : 0.0;
      cf[k][a][mid] = 0.0;
    }
  }
  ConductivityOptions opts;
  opts.margin = 0.2;
  GradientSolveReport rep;
  const VectorField3 gf = solve_gradient(jf, cf, opts, &rep);
  CHECK(rep.method[mid] == GradientMethod::Skipped);
  CHECK(rep.method[other] == GradientMethod::Truncated12);
  CHECK(rep.skipped == 1);
  CHECK(rep.truncated == 1);
  CHECK(rep.truncated_pairs[0] == 1);
  CHECK(rep.full + rep.truncated + rep.skipped + rep.outside == n * n * n);
  CHECK(rep.determinant[other] == 0.0);
  CHECK(rep.min_abs_det == 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = i + n * (j + n * k);
        if (in_interior_region(i, j, k, n, opts.margin)) {
          CHECK(rep.method[idx] != GradientMethod::Outside);
          for (int a = 0; a < 3; ++a) CHECK(std::abs(gf[a][idx] - g[a]) <= 1e-14);
        }
      }
  CHECK(gf.has_signature(curl_signature()));
  CHECK(rep.to_json().find("\"skipped\": 1") != std::string::npos);
}

TEST_CASE("taper weight") {
  const std::size_t n = 41;
  CHECK(taper_weight(0, 20, 20, n, 0.1) == 0.0);
  CHECK(taper_weight(2, 20, 20, n, 0.1) == 0.0);
  CHECK(taper_weight(3, 20, 20, n, 0.1) == doctest::Approx(0.5));
  CHECK(taper_weight(4, 20, 20, n, 0.1) == 1.0);
  CHECK(taper_weight(20, 20, 36, n, 0.1) == 1.0);
  CHECK(taper_weight(20, 20, 37, n, 0.1) == doctest::Approx(0.5));
}

TEST_CASE("recover_log_sigma") {
  const std::size_t n = 33;
  const ScalarField3 zero = recover_log_sigma(VectorField3::zeros_curl(n));
  CHECK(max_abs(zero) == 0.0);
  CHECK(zero.parity() == kAllEven);

  const ScalarField3 f = as_odd(make_phantom(smooth_bumps_default(), n).log_sigma);
  const ScalarField3 u = recover_log_sigma(gradient_any(f));
  CHECK(testing::rel_diff(as_odd(u), f) <= 1e-10);
  CHECK_THROWS_AS(recover_log_sigma(VectorField3::zeros_current(n)), Error);
}

TEST_CASE("exact-field conductivity recovery on the smooth phantom") {
  const std::size_t n = 65;
  const Phantom ph = make_phantom(smooth_bumps_default(), n);
  const LeadSystem leads = solve_leads(ph.conductivity);
  const std::array<VectorField3, 3> j{leads.current(1), leads.current(2), leads.current(3)};
  GradientSolveReport rep;
  const VectorField3 g = solve_gradient(j, leads.curl, {}, &rep);
  const VectorField3 truth = gradient_any(as_odd(ph.log_sigma));
  const double gerr = rel_l2_region(g, truth, 0.1);
  const ScalarField3 u = recover_log_sigma(g);
  const double uerr = rel_l2_region(u, ph.log_sigma, 0.1);
  MESSAGE("gradient error " << gerr << ", ln sigma error " << uerr << ", full " << rep.full << ", truncated "
                            << rep.truncated << ", skipped " << rep.skipped << ", min |det| " << rep.min_abs_det);
  CHECK(gerr <= 1e-2);
  CHECK(uerr <= 2e-2);
  CHECK(rep.skipped == 0);

  double boundary = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t e : {std::size_t{0}, n - 1})
        boundary = std::max({boundary, std::abs(u(e, a, b)), std::abs(u(a, e, b)), std::abs(u(a, b, e))});
  CHECK(boundary == 0.0);

  SUBCASE("white-noise smoothing") {
    std::mt19937_64 rng(25);
    std::normal_distribution<double> nd(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      VectorField3 d = VectorField3::zeros_curl(n);
      for (int a = 0; a < 3; ++a) {
        for (auto& v : d[a].storage()) v = nd(rng);
        d[a].enforce_parity();
      }
      d *= norm2(truth) / norm2(d);
      const ScalarField3 du = recover_log_sigma(d);
      worst = std::max(worst, norm2(du) / norm2(ph.log_sigma));
    }
    MESSAGE("relative ln sigma perturbation from unit relative white noise: " << worst);
    CHECK(worst <= 0.2);
  }
}
