#include "support.hpp"

#include "maet/spectral.hpp"

namespace maet::testing {

ScalarField3 random_smooth_field(std::size_t n, ParitySig parity, std::mt19937_64& rng, double width) {
  std::normal_distribution<double> g(0.0, 1.0);
  Spectrum3 s{n, parity, std::vector<double>(n * n * n, 0.0)};
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t l = 0; l < n; ++l) {
        const std::size_t idx[3] = {l, m, q};
        bool forbidden = false;
        for (int a = 0; a < 3; ++a)
          if (parity[a] == Parity::Odd && (idx[a] == 0 || idx[a] == n - 1)) forbidden = true;
        if (forbidden) continue;
        const double k2 = static_cast<double>(l * l + m * m + q * q);
        s(l, m, q) = g(rng) * std::exp(-k2 / (width * width));
      }
  return inverse_transform(s);
}

namespace {
double trap_weight(std::size_t i, std::size_t n) {
  return (i == 0 || i + 1 == n) ? 0.5 : 1.0;
}
double mode_norm(Parity p, std::size_t l, std::size_t n) {
  const double N = static_cast<double>(n - 1);
  if (p == Parity::Even && (l == 0 || l == n - 1)) return N;
  return N / 2.0;
}
}  // namespace

Spectrum3 brute_force_projection(const ScalarField3& f) {
  const std::size_t n = f.n();
  const double h = f.spacing();
  const auto& p = f.parity();
  Spectrum3 s{n, p, std::vector<double>(n * n * n, 0.0)};
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t l = 0; l < n; ++l) {
        if ((p[0] == Parity::Odd && (l == 0 || l == n - 1)) || (p[1] == Parity::Odd && (m == 0 || m == n - 1)) ||
            (p[2] == Parity::Odd && (q == 0 || q == n - 1)))
          continue;
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) {
              const double w = trap_weight(i, n) * trap_weight(j, n) * trap_weight(k, n);
              acc += w * f(i, j, k) * basis_1d(p[0], l, i * h) * basis_1d(p[1], m, j * h) *
                     basis_1d(p[2], q, k * h);
            }
        s(l, m, q) = acc / (mode_norm(p[0], l, n) * mode_norm(p[1], m, n) * mode_norm(p[2], q, n));
      }
  return s;
}

ScalarField3 brute_force_synthesis(const Spectrum3& s) {
  const std::size_t n = s.n;
  ScalarField3 f(n, s.parity);
  const double h = f.spacing();
  const auto& p = s.parity;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t q = 0; q < n; ++q)
          for (std::size_t m = 0; m < n; ++m)
            for (std::size_t l = 0; l < n; ++l)
              acc += s(l, m, q) * basis_1d(p[0], l, i * h) * basis_1d(p[1], m, j * h) * basis_1d(p[2], q, k * h);
        f(i, j, k) = acc;
      }
  return f;
}

double rel_diff(const ScalarField3& a, const ScalarField3& b) {
  const double nb = norm2(b);
  return norm2(a - b) / (nb > 0.0 ? nb : 1.0);
}

double rel_diff(const VectorField3& a, const VectorField3& b) {
  VectorField3 d = a;
  d -= b;
  const double nb = norm2(b);
  return norm2(d) / (nb > 0.0 ? nb : 1.0);
}

}  // namespace maet::testing
