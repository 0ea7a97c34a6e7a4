#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>

#include "maet/acoustic.hpp"
#include "maet/forward_em.hpp"
#include "maet/phantom.hpp"
#include "support.hpp"

using namespace maet;

namespace {

constexpr double kPi = std::numbers::pi;

double gaussian(double x, double y, double z, const double c[3], double s) {
  const double d2 = (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]) + (z - c[2]) * (z - c[2]);
  return std::exp(-0.5 * d2 / (s * s));
}

// Shell integral as a dense sum over all nodes, with the sphere replaced by
// a sixth-order radial mollifier of width 1.5 grid steps.
double shell_sum_mean(const ScalarField3& h, const std::array<double, 3>& y, double r) {
  const std::size_t n = h.n();
  const double dx = h.spacing();
  const double sig = 1.5 * dx;
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const double v = h(i, j, k);
        if (v == 0.0) continue;
        const double q = (std::hypot(i * dx - y[0], j * dx - y[1], k * dx - y[2]) - r) / sig;
        if (std::abs(q) > 12.0) continue;
        const double kern = (15.0 - 10.0 * q * q + q * q * q * q) / 8.0 * std::exp(-0.5 * q * q) / (sig * std::sqrt(2 * kPi));
        acc += v * kern;
      }
  return acc * dx * dx * dx / (4 * kPi * r * r);
}

// Free-space leapfrog for u_tt = c^2 lap u, u(0) = 0, u_t(0) = h, on a
// padded box whose walls are far enough that reflections arrive after the
// last sample. Returns u at the requested cube nodes every `stride` steps.
std::vector<std::vector<double>> leapfrog_traces(const std::function<double(double, double, double)>& h0, double hf,
                                                 double pad, double dt, std::size_t steps, std::size_t stride,
                                                 const std::vector<std::array<double, 3>>& probes) {
  const long nb = static_cast<long>(std::lround((1.0 + 2.0 * pad) / hf)) + 1;
  const long off = static_cast<long>(std::lround(pad / hf));
  const std::size_t total = static_cast<std::size_t>(nb * nb * nb);
  auto at = [nb](long i, long j, long k) { return static_cast<std::size_t>(i + nb * (j + nb * k)); };
  std::vector<double> prev(total, 0.0), cur(total, 0.0), next(total, 0.0), h(total, 0.0);
  for (long k = 0; k < nb; ++k)
    for (long j = 0; j < nb; ++j)
      for (long i = 0; i < nb; ++i) h[at(i, j, k)] = h0((i - off) * hf, (j - off) * hf, (k - off) * hf);
  const double lam = dt * dt / (hf * hf);
  // Taylor start: u(dt) = dt h + dt^3/6 lap h.
  for (long k = 1; k < nb - 1; ++k)
    for (long j = 1; j < nb - 1; ++j)
      for (long i = 1; i < nb - 1; ++i) {
        const std::size_t p = at(i, j, k);
        const double lap = h[p - 1] + h[p + 1] + h[p - nb] + h[p + nb] + h[p - nb * nb] + h[p + nb * nb] - 6 * h[p];
        cur[p] = dt * h[p] + dt * lam * lap / 6.0;
      }
  std::vector<std::vector<double>> out(probes.size());
  auto record = [&](const std::vector<double>& u) {
    for (std::size_t q = 0; q < probes.size(); ++q) {
      const long i = std::lround(probes[q][0] / hf) + off, j = std::lround(probes[q][1] / hf) + off,
                 k = std::lround(probes[q][2] / hf) + off;
      out[q].push_back(u[at(i, j, k)]);
    }
  };
  record(prev);
  for (std::size_t s = 1; s <= steps; ++s) {
    if (s % stride == 0) record(cur);
    if (s == steps) break;
    for (long k = 1; k < nb - 1; ++k)
      for (long j = 1; j < nb - 1; ++j)
        for (long i = 1; i < nb - 1; ++i) {
          const std::size_t p = at(i, j, k);
          const double lap = cur[p - 1] + cur[p + 1] + cur[p - nb] + cur[p + nb] + cur[p - nb * nb] + cur[p + nb * nb] - 6 * cur[p];
          next[p] = 2 * cur[p] - prev[p] + lam * lap;
        }
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  return out;
}

MeasurementSet random_measurements(std::size_t m, std::size_t n_t, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MeasurementSet ms;
  ms.n = m;
  ms.acq = default_acquisition(m);
  ms.acq.n_t = n_t;
  for (auto& p : ms.pairs) {
    p = FaceSeries(m, n_t);
    for (double& v : p.data) v = u(rng);
  }
  // One identically zero series per pair.
  for (auto& p : ms.pairs)
    for (std::size_t t = 0; t < n_t; ++t) p.series(3)[t] = 0.0;
  return ms;
}

}  // namespace

TEST_CASE("default acquisition covers the diameter") {
  for (std::size_t n : {9u, 33u, 65u, 129u}) {
    const Acquisition acq = default_acquisition(n);
    CHECK(acq.m == n);
    CHECK(acq.dt == doctest::Approx(0.5 / static_cast<double>(n - 1)));
    CHECK(static_cast<double>(acq.n_t - 1) * acq.dt >= std::sqrt(3.0) - 1e-12);
    CHECK(static_cast<double>(acq.n_t - 2) * acq.dt < std::sqrt(3.0));
    CHECK_NOTHROW(validate_acquisition(acq, n));
  }
  CHECK(default_acquisition(65).n_t == 223);
  Acquisition short_acq = default_acquisition(17);
  short_acq.n_t = 20;
  CHECK_THROWS_AS(validate_acquisition(short_acq, 17), Error);
  Acquisition big_m = default_acquisition(17);
  big_m.m = 18;
  CHECK_THROWS_AS(validate_acquisition(big_m, 17), Error);
}

TEST_CASE("face points") {
  const auto y = face_point(1, 2 + 5 * 3, 5);  // x_1 = 1, y = 0.5, z = 0.75
  CHECK(y[0] == 1.0);
  CHECK(y[1] == 0.5);
  CHECK(y[2] == 0.75);
  const auto z = face_point(4, 1, 3);  // x_3 = 0, x = 0.5, y = 0
  CHECK(z[0] == 0.5);
  CHECK(z[1] == 0.0);
  CHECK(z[2] == 0.0);
  CHECK_THROWS_AS(face_point(6, 0, 3), Error);
}

TEST_CASE("spherical mean trivial cases") {
  const ScalarField3 zero(17, kAllEven);
  CHECK(spherical_mean(zero, {1.0, 0.5, 0.5}, 0.3) == 0.0);
  CHECK_THROWS_AS(spherical_mean(zero, {1.0, 0.5, 0.5}, 0.0), Error);
  auto ball = ScalarField3::sample(33, kAllEven, [](double x, double y, double z) {
    return std::hypot(x - 0.5, y - 0.5, z - 0.5) <= 0.2 ? 1.0 : 0.0;
  });
  // Sphere about (1, 0.5, 0.5) of radius 0.25 misses the ball (gap 0.3).
  CHECK(spherical_mean(ball, {1.0, 0.5, 0.5}, 0.25) == 0.0);
  CHECK(spherical_mean(ball, {1.0, 0.5, 0.5}, 0.5) > 0.0);
}

TEST_CASE("spherical mean matches a dense shell sum") {
  const std::size_t n = 65;
  const double R = 0.45;
  const double c[3] = {0.5, 0.45, 0.55};
  const ScalarField3 h = ScalarField3::sample(
      n, kAllEven, [&](double x, double y, double z) { return bump_profile(std::hypot(x - c[0], y - c[1], z - c[2]) / R); });
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    std::array<double, 3> y{u(rng), u(rng), u(rng)};
    y[trial / 2] = trial % 2 ? 1.0 : 0.0;
    const double d = std::hypot(y[0] - c[0], y[1] - c[1], y[2] - c[2]);
    double err = 0.0, scale = 0.0;
    for (int s = 0; s < 8; ++s) {
      const double r = std::max(0.02, d - R) + 2.0 * R * (s + u(rng)) / 8.0;
      const double ref = shell_sum_mean(h, y, r);
      err = std::max(err, std::abs(spherical_mean(h, y, r) - ref));
      scale = std::max(scale, std::abs(ref));
    }
    CHECK(err <= 1e-3 * scale);
  }
}

TEST_CASE("spherical mean matches the closed form for a Gaussian") {
  const double c[3] = {0.5, 0.5, 0.5};
  const double s = 0.08;
  const ScalarField3 h = ScalarField3::sample(65, kAllEven, [&](double x, double y, double z) { return gaussian(x, y, z, c, s); });
  const std::array<double, 3> y{0.0, 0.3, 0.6};
  const double d = std::hypot(0.5, 0.2, 0.1);
  double err = 0.0, scale = 0.0;
  for (double r = d - 0.3; r < d + 0.3; r += 0.01) {
    const double exact = s * s / (2 * r * d) * (std::exp(-(r - d) * (r - d) / (2 * s * s)) - std::exp(-(r + d) * (r + d) / (2 * s * s)));
    err = std::max(err, std::abs(spherical_mean(h, y, r) - exact));
    scale = std::max(scale, exact);
  }
  CHECK(err <= 1e-3 * scale);
}

TEST_CASE("null phantom gives identically zero data") {
  const auto sigma = make_conductivity(ScalarField3::sample(9, kAllEven, [](double, double, double) { return 1.0; }));
  const LeadSystem leads = solve_leads(sigma);
  const MeasurementSet ms = synthesize(leads, default_acquisition(9));
  CHECK(ms.sample_count() == 54 * 9 * 9 * ms.acq.n_t);
  for (const auto& p : ms.pairs)
    for (double v : p.data) CHECK(v == 0.0);
}

TEST_CASE("synthesis is linear") {
  std::mt19937_64 rng(3);
  const std::size_t n = 17;
  auto smooth = [&](double width) {
    ScalarField3 f = testing::random_smooth_field(n, kAllOdd, rng, width);
    return f;
  };
  const ScalarField3 a = smooth(3.0), b = smooth(3.0);
  Acquisition acq = default_acquisition(n);
  acq.m = 9;
  const FaceSeries fa = synthesize_pair(a, acq), fb = synthesize_pair(b, acq);
  const FaceSeries f2a = synthesize_pair(2.0 * a, acq), fab = synthesize_pair(a + b, acq);
  double scale = 0.0, e1 = 0.0, e2 = 0.0;
  for (std::size_t i = 0; i < fa.data.size(); ++i) {
    scale = std::max(scale, std::abs(fa.data[i]) + std::abs(fb.data[i]));
    e1 = std::max(e1, std::abs(f2a.data[i] - 2.0 * fa.data[i]));
    e2 = std::max(e2, std::abs(fab.data[i] - fa.data[i] - fb.data[i]));
  }
  CHECK(scale > 0.0);
  CHECK(e1 <= 1e-12 * scale);
  CHECK(e2 <= 1e-12 * scale);
}

TEST_CASE("first sample is zero and physical scale factors enter linearly") {
  const double c0[3] = {0.45, 0.5, 0.55};
  const ScalarField3 h = ScalarField3::sample(17, kAllEven, [&](double x, double y, double z) { return gaussian(x, y, z, c0, 0.1); });
  Acquisition acq = default_acquisition(17);
  const FaceSeries base = synthesize_pair(h, acq);
  for (std::size_t p = 0; p < base.series_count(); ++p) CHECK(base.series(p)[0] == 0.0);
  Acquisition scaled = acq;
  scaled.rho = 2.0;
  scaled.b_abs = 4.0;
  const FaceSeries s = synthesize_pair(h, scaled);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < base.data.size(); ++i) {
    err = std::max(err, std::abs(s.data[i] - 2.0 * base.data[i]));
    scale = std::max(scale, std::abs(base.data[i]));
  }
  CHECK(err <= 1e-12 * scale);
}

TEST_CASE("spectral synthesis agrees with the Gaussian closed form") {
  // M(y, t) = t * mean(h, y, t) with c = rho = |B| = 1.
  const double c0[3] = {0.5, 0.5, 0.5};
  const double s = 0.08;
  const std::size_t n = 33;
  const ScalarField3 h = ScalarField3::sample(n, kAllEven, [&](double x, double y, double z) { return gaussian(x, y, z, c0, s); });
  Acquisition acq = default_acquisition(n);
  acq.m = 5;
  const FaceSeries fs = synthesize_pair(h, acq);
  double err = 0.0, scale = 0.0;
  for (int f = 0; f < 6; ++f)
    for (std::size_t p = 0; p < 25; ++p) {
      const auto y = face_point(f, p, 5);
      const double d = std::hypot(y[0] - 0.5, y[1] - 0.5, y[2] - 0.5);
      for (std::size_t t = 1; t < acq.n_t; ++t) {
        const double r = static_cast<double>(t) * acq.dt;
        const double exact = r * s * s / (2 * r * d) *
                             (std::exp(-(r - d) * (r - d) / (2 * s * s)) - std::exp(-(r + d) * (r + d) / (2 * s * s)));
        err = std::max(err, std::abs(fs.at(f, p, t) - exact));
        scale = std::max(scale, std::abs(exact));
      }
    }
  MESSAGE("spectral synthesis vs closed form, max rel: " << err / scale);
  CHECK(err <= 1e-3 * scale);
}

TEST_CASE("spectral and quadrature backends agree") {
  const std::size_t n = 33;
  const ScalarField3 h = ScalarField3::sample(
      n, kAllEven, [](double x, double y, double z) { return bump_profile(std::hypot(x - 0.55, y - 0.5, z - 0.45) / 0.3); });
  Acquisition acq = default_acquisition(n);
  acq.m = 3;
  SynthesisOptions quad;
  quad.backend = SynthesisBackend::Quadrature;
  quad.oversampling = 2.0;
  const FaceSeries a = synthesize_pair(h, acq), b = synthesize_pair(h, acq, quad);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    num += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
    den += a.data[i] * a.data[i];
  }
  MESSAGE("spectral vs quadrature relative L2: " << std::sqrt(num / den));
  CHECK(std::sqrt(num / den) <= 1e-2);
  const ScalarField3 small = ScalarField3::sample(
      9, kAllEven, [](double x, double y, double z) { return bump_profile(std::hypot(x - 0.5, y - 0.5, z - 0.5) / 0.3); });
  Acquisition odd = default_acquisition(9);
  odd.m = 4;  // 3 does not divide 8
  CHECK_THROWS_AS(synthesize_pair(small, odd), Error);
  CHECK_NOTHROW(synthesize_pair(small, odd, quad));
}

TEST_CASE("series agree with a finite-difference wave solve") {
  const double c0[3] = {0.5, 0.45, 0.55};
  const double s = 0.12;
  auto h0 = [&](double x, double y, double z) { return gaussian(x, y, z, c0, s); };
  const std::size_t n = 33;
  const ScalarField3 h = ScalarField3::sample(n, kAllEven, h0);
  Acquisition acq = default_acquisition(n);
  acq.m = 5;
  const FaceSeries fs = synthesize_pair(h, acq);

  std::vector<std::array<double, 3>> probes;
  std::vector<std::pair<int, std::size_t>> ids;
  for (int f = 0; f < 6; ++f)
    for (std::size_t p : {0u, 7u, 12u, 18u}) {
      probes.push_back(face_point(f, p, 5));
      ids.emplace_back(f, p);
    }
  const double hf = 1.0 / 64;
  const std::size_t stride = 2;  // solver dt = acq.dt / 2
  const auto traces = leapfrog_traces(h0, hf, 0.9, acq.dt / stride, (acq.n_t - 1) * stride, stride, probes);
  double num = 0.0, den = 0.0;
  for (std::size_t q = 0; q < probes.size(); ++q)
    for (std::size_t t = 0; t < acq.n_t; ++t) {
      const double a = fs.at(ids[q].first, ids[q].second, t);
      num += (a - traces[q][t]) * (a - traces[q][t]);
      den += a * a;
    }
  MESSAGE("spectral synthesis vs leapfrog relative L2: " << std::sqrt(num / den));
  CHECK(std::sqrt(num / den) <= 1e-2);
}

TEST_CASE("smooth phantom series obeys the Huygens support interval") {
  const std::size_t n = 65;
  const PhantomSpec spec = smooth_bumps_default();
  const LeadSystem leads = solve_leads(make_phantom(spec, n).conductivity);
  Acquisition acq = default_acquisition(n);
  const FaceSeries fs = synthesize_pair(leads.curl[0][2], acq);  // (k, j) = (1, 3)
  const std::size_t point = 32 + 65 * 32;                          // y = (1, 0.5, 0.5)
  const auto y = face_point(1, point, 65);
  CHECK(y[1] == 0.5);
  double dmin = 1e9, dmax = 0.0;
  for (const auto& it : spec.items) {
    const double d = std::hypot(y[0] - it.center[0], y[1] - it.center[1], y[2] - it.center[2]);
    dmin = std::min(dmin, d - it.radius);
    dmax = std::max(dmax, d + it.radius);
  }
  double peak = 0.0;
  for (std::size_t t = 0; t < acq.n_t; ++t) peak = std::max(peak, std::abs(fs.at(1, point, t)));
  REQUIRE(peak > 0.0);
  // The curl is kept on nodes within 2 steps of supp(sigma - 1).
  const double slack = 3.0 / 64;
  double before = 0.0, after = 0.0;
  for (std::size_t t = 0; t < acq.n_t; ++t) {
    const double r = static_cast<double>(t) * acq.dt;
    if (r < dmin - slack) before = std::max(before, std::abs(fs.at(1, point, t)));
    if (r > dmax + slack) after = std::max(after, std::abs(fs.at(1, point, t)));
  }
  // Spectral propagation of the node values leaves a tail near 1e-6.
  MESSAGE("Huygens check: before " << before / peak << ", after " << after / peak);
  CHECK(before <= 1e-5 * peak);
  CHECK(after <= 1e-5 * peak);
  CHECK(std::abs(fs.at(1, point, acq.n_t - 1)) <= 1e-5 * peak);
}

TEST_CASE("noise model") {
  std::mt19937_64 rng(11);
  const MeasurementSet ms = random_measurements(3, 40, rng);
  const MeasurementSet same = add_noise(ms, 0.0, 5);
  for (int p = 0; p < 9; ++p) CHECK(same.pairs[p].data == ms.pairs[p].data);
  CHECK_THROWS_AS(add_noise(ms, -0.1, 5), Error);
  for (double level : {0.5, 1.0}) {
    const MeasurementSet noisy = add_noise(ms, level, 42);
    REQUIRE(noisy.noise.has_value());
    CHECK(noisy.noise->level == level);
    for (int p = 0; p < 9; ++p) {
      const FaceSeries& a = ms.pairs[p];
      const FaceSeries& b = noisy.pairs[p];
      for (std::size_t s = 0; s < a.series_count(); ++s) {
        double sig = 0.0, diff = 0.0;
        for (std::size_t t = 0; t < a.n_t; ++t) {
          sig += a.series(s)[t] * a.series(s)[t];
          diff += (b.series(s)[t] - a.series(s)[t]) * (b.series(s)[t] - a.series(s)[t]);
        }
        if (sig == 0.0)
          CHECK(diff == 0.0);
        else
          CHECK(std::sqrt(diff / sig) == doctest::Approx(level).epsilon(1e-12));
      }
    }
    const MeasurementSet again = add_noise(ms, level, 42);
    const MeasurementSet other = add_noise(ms, level, 43);
    for (int p = 0; p < 9; ++p) {
      CHECK(again.pairs[p].data == noisy.pairs[p].data);
      CHECK(other.pairs[p].data != noisy.pairs[p].data);
    }
  }
  CHECK(series_seed(1, 0) != series_seed(1, 1));
  CHECK(series_seed(1, 0) != series_seed(2, 0));
}

TEST_CASE("measurement directory round trip") {
  std::mt19937_64 rng(5);
  MeasurementSet ms = add_noise(random_measurements(4, 12, rng), 0.5, 9);
  const auto dir = std::filesystem::temp_directory_path() / "maet_meas_roundtrip";
  std::filesystem::remove_all(dir);
  const auto files = save_measurements(ms, dir);
  CHECK(files.size() == 10);
  const MeasurementSet back = load_measurements(dir);
  CHECK(back.n == ms.n);
  CHECK(back.acq.m == ms.acq.m);
  CHECK(back.acq.n_t == ms.acq.n_t);
  CHECK(back.acq.dt == ms.acq.dt);
  REQUIRE(back.noise.has_value());
  CHECK(back.noise->seed == 9);
  for (int p = 0; p < 9; ++p) CHECK(back.pairs[p].data == ms.pairs[p].data);
  // Truncated series file.
  std::filesystem::resize_file(dir / "series_k2_j3.bin", 16);
  CHECK_THROWS_AS(load_measurements(dir), Error);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(load_measurements(dir), Error);
}
