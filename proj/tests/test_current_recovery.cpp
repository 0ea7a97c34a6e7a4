#include <doctest.h>

#include <cmath>
#include <random>

#include "maet/current_recovery.hpp"
#include "maet/forward_em.hpp"
#include "maet/phantom.hpp"
#include "maet/spectral.hpp"
#include "support.hpp"

using namespace maet;

namespace {

// Band-limited well below the Nyquist modes, which differentiation drops.
VectorField3 smooth_curl(std::size_t n, std::mt19937_64& rng) {
  VectorField3 a(testing::random_smooth_field(n, current_parity(0), rng, 2.0),
                 testing::random_smooth_field(n, current_parity(1), rng, 2.0),
                 testing::random_smooth_field(n, current_parity(2), rng, 2.0));
  return curl(a);
}

// J - e_k, retagged with current parity.
VectorField3 deviation(const VectorField3& j, int k) {
  VectorField3 out = j;
  ScalarField3& c = out[k - 1];
  for (auto& v : c.storage()) v -= 1.0;
  c.set_parity(current_parity(k - 1));
  c.enforce_parity();
  return out;
}

}  // namespace

TEST_CASE("zero curl gives the uniform current") {
  for (int k = 1; k <= 3; ++k) {
    CurrentRecoveryReport rep;
    const VectorField3 j = recover_current(VectorField3::zeros_curl(17), k, {}, &rep);
    for (int a = 0; a < 3; ++a)
      for (double v : j[a].values()) CHECK(v == (a == k - 1 ? 1.0 : 0.0));
    CHECK(rep.boundary_flux_residual == 0.0);
    CHECK(rep.plane_flux_residual <= 1e-14);
  }
  CHECK_THROWS_AS(recover_current(VectorField3::zeros_current(9), 1), Error);
  CHECK_THROWS_AS(recover_current(VectorField3::zeros_curl(9), 4), Error);
}

TEST_CASE("Leray projection") {
  std::mt19937_64 rng(8);
  const std::size_t n = 17;
  const VectorField3 solenoidal = smooth_curl(n, rng);
  CHECK(testing::rel_diff(leray_project(solenoidal), solenoidal) <= 1e-12);
  VectorField3 mixed = solenoidal;
  mixed += gradient_any(testing::random_smooth_field(n, kAllOdd, rng, 2.0));
  const VectorField3 p = leray_project(mixed);
  CHECK(norm2(divergence(p)) <= 1e-10 * norm2(mixed));
  CHECK(testing::rel_diff(p, solenoidal) <= 1e-10);
  CHECK(testing::rel_diff(leray_project(p), p) <= 1e-12);
}

TEST_CASE("recovered current has the prescribed curl and no divergence") {
  std::mt19937_64 rng(9);
  const std::size_t n = 17;
  const VectorField3 c = smooth_curl(n, rng);
  for (int k = 1; k <= 3; ++k) {
    CurrentRecoveryReport rep;
    const VectorField3 j = recover_current(c, k, {}, &rep);
    CHECK(testing::rel_diff(curl(deviation(j, k)), c) <= 1e-10);
    CHECK(rep.divergence_residual <= 1e-10);
    CHECK(rep.boundary_flux_residual <= 1e-12);
    CHECK(rep.plane_flux_residual <= 1e-12);
    CHECK(j.has_signature({k == 1 ? kAllEven : current_parity(0), k == 2 ? kAllEven : current_parity(1),
                           k == 3 ? kAllEven : current_parity(2)}));
  }
}

TEST_CASE("module-isolation round trip on the smooth phantom") {
  const std::size_t n = 65;
  const LeadSystem leads = solve_leads(make_phantom(smooth_bumps_default(), n).conductivity);
  for (int k = 1; k <= 3; ++k) {
    CurrentRecoveryReport rep;
    const VectorField3 j = recover_current(leads.curl[k - 1], k, {}, &rep);
    const double err = testing::rel_diff(j, leads.current(k));
    MESSAGE("k=" << k << ": current error " << err << ", boundary flux " << rep.boundary_flux_residual
                 << ", plane flux " << rep.plane_flux_residual << ", input div " << rep.input_divergence);
    CHECK(err <= 5e-3);
    CHECK(rep.boundary_flux_residual <= 1e-6);
    CHECK(rep.plane_flux_residual <= 1e-6);
  }

  SUBCASE("bounded response to perturbed curls") {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> g(0.0, 1.0);
    const VectorField3& c = leads.curl[0];
    const VectorField3 j = recover_current(c, 1);
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      VectorField3 d = VectorField3::zeros_curl(n);
      for (int a = 0; a < 3; ++a) {
        for (auto& v : d[a].storage()) v = g(rng);
        d[a].enforce_parity();
      }
      d *= 0.2 * norm2(c) / norm2(d);
      VectorField3 cp = c;
      cp += d;
      const double rel_out = testing::rel_diff(recover_current(cp, 1), j);
      worst = std::max(worst, rel_out / 0.2);
    }
    // Smooth low-mode perturbation: the least damped direction.
    VectorField3 low = VectorField3::zeros_curl(n);
    low[2] = ScalarField3::sample(n, curl_parity(2), [](double x, double y, double) {
      return std::sin(3.14159265358979 * x) * std::sin(3.14159265358979 * y);
    });
    low[2].enforce_parity();
    low *= 0.2 * norm2(c) / norm2(low);
    VectorField3 cl = c;
    cl += low;
    worst = std::max(worst, testing::rel_diff(recover_current(cl, 1), j) / 0.2);
    MESSAGE("current recovery amplification (relative out / relative in): " << worst);
    CHECK(worst <= 1.5);
  }
}
