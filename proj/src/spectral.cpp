#include "maet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"

namespace maet {

namespace {

constexpr double kPi = std::numbers::pi;

struct AxisLayout {
  int len;     // transform length along the axis
  int offset;  // first node index included in the transform
  fftw_r2r_kind kind;
};

AxisLayout layout(Parity p, std::size_t n) {
  if (p == Parity::Even) return {static_cast<int>(n), 0, FFTW_REDFT00};
  return {static_cast<int>(n) - 2, 1, FFTW_RODFT00};
}

// Per-axis factor applied when going from DCT-I/DST-I output to basis amplitudes.
std::vector<double> forward_scale(Parity p, std::size_t n) {
  const double N = static_cast<double>(n - 1);
  std::vector<double> s(n, 1.0 / N);
  if (p == Parity::Even) {
    s[0] = 0.5 / N;
    s[n - 1] = 0.5 / N;
  } else {
    s[0] = 0.0;
    s[n - 1] = 0.0;
  }
  return s;
}

// Per-axis factor applied to amplitudes before the unnormalized inverse.
std::vector<double> inverse_scale(Parity p, std::size_t n) {
  std::vector<double> s(n, 0.5);
  if (p == Parity::Even) {
    s[0] = 1.0;
    s[n - 1] = 1.0;
  } else {
    s[0] = 0.0;
    s[n - 1] = 0.0;
  }
  return s;
}

struct Compact {
  AxisLayout ax[3];
  std::size_t size() const {
    return static_cast<std::size_t>(ax[0].len) * ax[1].len * ax[2].len;
  }
  std::vector<int> dims() const { return {ax[2].len, ax[1].len, ax[0].len}; }
  std::vector<fftw_r2r_kind> kinds() const { return {ax[2].kind, ax[1].kind, ax[0].kind}; }
};

Compact compact_for(const ParitySig& p, std::size_t n) {
  return {{layout(p[0], n), layout(p[1], n), layout(p[2], n)}};
}

bool is_zero(const Spectrum3& s) {
  return std::all_of(s.coef.begin(), s.coef.end(), [](double v) { return v == 0.0; });
}

void require_parity(const ScalarField3& f, const ParitySig& expected, const char* what) {
  if (f.parity() != expected)
    fail(ErrorCode::ParityMismatch,
         std::string(what) + ": expected parity " + to_string(expected) + ", got " + to_string(f.parity()));
}

// Adds `b` into `acc`, or replaces `acc` if it is still unset. Two nonzero
// terms must carry the same parity; an identically zero term fits any parity.
void accumulate(Spectrum3& acc, bool& have, const Spectrum3& b, double sign, const char* what) {
  if (!have) {
    acc = b;
    if (sign != 1.0)
      for (double& v : acc.coef) v *= sign;
    have = true;
    return;
  }
  if (acc.parity != b.parity) {
    if (is_zero(b)) return;
    if (!is_zero(acc))
      fail(ErrorCode::ParityMismatch, std::string(what) + ": inconsistent parity signature " +
                                          to_string(acc.parity) + " vs " + to_string(b.parity));
    acc.parity = b.parity;
    std::fill(acc.coef.begin(), acc.coef.end(), 0.0);
  }
  for (std::size_t i = 0; i < acc.coef.size(); ++i) acc.coef[i] += sign * b.coef[i];
}

// Per-axis basis norm on the trapezoid inner product.
double basis_weight(Parity p, std::size_t l, std::size_t n) {
  if (p == Parity::Even && (l == 0 || l == n - 1)) return 1.0;
  return 0.5;
}

}  // namespace

Spectrum3 transform(const ScalarField3& f) {
  const std::size_t n = f.n();
  require(n >= 3, ErrorCode::InvalidArgument, "transform: n must be at least 3");
  require(f.all_finite(), ErrorCode::InvalidArgument, "transform: non-finite input values");
  const Compact c = compact_for(f.parity(), n);
  fft::RealBuffer buf = fft::alloc_real(c.size());

  const std::size_t L0 = c.ax[0].len, L1 = c.ax[1].len, L2 = c.ax[2].len;
  for (std::size_t k = 0; k < L2; ++k)
    for (std::size_t j = 0; j < L1; ++j) {
      double* row = buf.get() + L0 * (j + L1 * k);
      for (std::size_t i = 0; i < L0; ++i)
        row[i] = f(i + c.ax[0].offset, j + c.ax[1].offset, k + c.ax[2].offset);
    }
  if (c.size() > 0) fft::r2r(c.dims(), c.kinds(), buf.get());

  Spectrum3 s{n, f.parity(), std::vector<double>(n * n * n, 0.0)};
  const auto s0 = forward_scale(f.parity()[0], n);
  const auto s1 = forward_scale(f.parity()[1], n);
  const auto s2 = forward_scale(f.parity()[2], n);
  for (std::size_t k = 0; k < L2; ++k)
    for (std::size_t j = 0; j < L1; ++j) {
      const double* row = buf.get() + L0 * (j + L1 * k);
      const std::size_t q = k + c.ax[2].offset, m = j + c.ax[1].offset;
      const double w = s1[m] * s2[q];
      for (std::size_t i = 0; i < L0; ++i) {
        const std::size_t l = i + c.ax[0].offset;
        s(l, m, q) = row[i] * s0[l] * w;
      }
    }
  return s;
}

ScalarField3 inverse_transform(const Spectrum3& s, ParitySig parity, std::size_t n) {
  require(s.n == n && s.coef.size() == n * n * n, ErrorCode::GridMismatch,
          "inverse_transform: coefficient array does not match n");
  require(s.parity == parity, ErrorCode::ParityMismatch, "inverse_transform: parity mismatch");
  const Compact c = compact_for(parity, n);
  fft::RealBuffer buf = fft::alloc_real(c.size());
  const auto s0 = inverse_scale(parity[0], n);
  const auto s1 = inverse_scale(parity[1], n);
  const auto s2 = inverse_scale(parity[2], n);

  const std::size_t L0 = c.ax[0].len, L1 = c.ax[1].len, L2 = c.ax[2].len;
  for (std::size_t k = 0; k < L2; ++k)
    for (std::size_t j = 0; j < L1; ++j) {
      double* row = buf.get() + L0 * (j + L1 * k);
      const std::size_t q = k + c.ax[2].offset, m = j + c.ax[1].offset;
      const double w = s1[m] * s2[q];
      for (std::size_t i = 0; i < L0; ++i) {
        const std::size_t l = i + c.ax[0].offset;
        row[i] = s(l, m, q) * s0[l] * w;
      }
    }
  if (c.size() > 0) fft::r2r(c.dims(), c.kinds(), buf.get());

  ScalarField3 f(n, parity);
  for (std::size_t k = 0; k < L2; ++k)
    for (std::size_t j = 0; j < L1; ++j) {
      const double* row = buf.get() + L0 * (j + L1 * k);
      for (std::size_t i = 0; i < L0; ++i)
        f(i + c.ax[0].offset, j + c.ax[1].offset, k + c.ax[2].offset) = row[i];
    }
  return f;
}

ScalarField3 inverse_transform(const Spectrum3& s) { return inverse_transform(s, s.parity, s.n); }

double weighted_coefficient_norm_sq(const Spectrum3& s) {
  const std::size_t n = s.n;
  double total = 0.0;
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t m = 0; m < n; ++m) {
      const double w = basis_weight(s.parity[1], m, n) * basis_weight(s.parity[2], q, n);
      for (std::size_t l = 0; l < n; ++l) {
        const double a = s(l, m, q);
        total += a * a * w * basis_weight(s.parity[0], l, n);
      }
    }
  return total;
}

Spectrum3 differentiate(const Spectrum3& s, int axis) {
  require(axis >= 0 && axis < 3, ErrorCode::InvalidArgument, "differentiate: axis out of range");
  const std::size_t n = s.n;
  Spectrum3 d{n, flipped(s.parity, axis), std::vector<double>(s.coef.size(), 0.0)};
  // d/dx cos(pi l x) = -pi l sin(pi l x); d/dx sin(pi l x) = pi l cos(pi l x).
  // The cosine Nyquist mode has no sine counterpart at the nodes and drops out.
  const double sign = s.parity[axis] == Parity::Even ? -1.0 : 1.0;
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t l = 0; l < n; ++l) {
        const std::size_t idx[3] = {l, m, q};
        const std::size_t mode = idx[axis];
        if (mode == 0 || mode == n - 1) continue;
        d(l, m, q) = sign * kPi * static_cast<double>(mode) * s(l, m, q);
      }
  return d;
}

ScalarField3 partial(const ScalarField3& f, int axis) { return inverse_transform(differentiate(transform(f), axis)); }

VectorField3 gradient_any(const ScalarField3& f) {
  const Spectrum3 s = transform(f);
  return VectorField3(inverse_transform(differentiate(s, 0)), inverse_transform(differentiate(s, 1)),
                      inverse_transform(differentiate(s, 2)));
}

VectorField3 gradient(const ScalarField3& f) {
  require_parity(f, kAllEven, "gradient");
  return gradient_any(f);
}

VectorField3 curl(const VectorField3& v) {
  const std::size_t n = v.n();
  for (int a = 0; a < 3; ++a) require(v[a].n() == n, ErrorCode::GridMismatch, "curl: components differ in n");
  const Spectrum3 s[3] = {transform(v[0]), transform(v[1]), transform(v[2])};
  VectorField3 out;
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    Spectrum3 acc;
    bool have = false;
    accumulate(acc, have, differentiate(s[c], b), 1.0, "curl");
    accumulate(acc, have, differentiate(s[b], c), -1.0, "curl");
    out[a] = inverse_transform(acc);
  }
  return out;
}

ScalarField3 divergence(const VectorField3& v) {
  const std::size_t n = v.n();
  for (int a = 0; a < 3; ++a)
    require(v[a].n() == n, ErrorCode::GridMismatch, "divergence: components differ in n");
  Spectrum3 acc;
  bool have = false;
  for (int a = 0; a < 3; ++a) accumulate(acc, have, differentiate(transform(v[a]), a), 1.0, "divergence");
  return inverse_transform(acc);
}

ScalarField3 laplacian(const ScalarField3& f) {
  Spectrum3 s = transform(f);
  const std::size_t n = s.n;
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t l = 0; l < n; ++l) s(l, m, q) *= SpectrumIndex{l, m, q}.eigenvalue();
  return inverse_transform(s);
}

ScalarField3 poisson_dirichlet(const ScalarField3& rhs) {
  require_parity(rhs, kAllOdd, "poisson_dirichlet");
  Spectrum3 s = transform(rhs);
  const std::size_t n = s.n;
  for (std::size_t q = 1; q + 1 < n; ++q)
    for (std::size_t m = 1; m + 1 < n; ++m)
      for (std::size_t l = 1; l + 1 < n; ++l) s(l, m, q) /= SpectrumIndex{l, m, q}.eigenvalue();
  return inverse_transform(s);
}

VectorField3 poisson_mixed(const VectorField3& rhs) {
  VectorField3 out;
  for (int a = 0; a < 3; ++a) {
    require_parity(rhs[a], current_parity(a), "poisson_mixed");
    Spectrum3 s = transform(rhs[a]);
    const std::size_t n = s.n;
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t m = 0; m < n; ++m)
        for (std::size_t l = 0; l < n; ++l) {
          const double lambda = SpectrumIndex{l, m, q}.eigenvalue();
          if (lambda == 0.0) {
            if (s(l, m, q) != 0.0)
              fail(ErrorCode::Internal, "poisson_mixed: nonzero coefficient on a zero-eigenvalue mode");
            continue;
          }
          s(l, m, q) /= lambda;
        }
    out[a] = inverse_transform(s);
  }
  return out;
}

ScalarField3 antiderivative(const ScalarField3& f, int axis) {
  require(axis >= 0 && axis < 3, ErrorCode::InvalidArgument, "antiderivative: axis out of range");
  require(f.parity()[axis] == Parity::Odd, ErrorCode::ParityMismatch,
          "antiderivative: field must be odd along the integration axis");
  const Spectrum3 s = transform(f);
  const std::size_t n = s.n;
  Spectrum3 out{n, flipped(s.parity, axis), std::vector<double>(s.coef.size(), 0.0)};
  // int_0^x sin(pi l t) dt = (1 - cos(pi l x)) / (pi l)
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t l = 0; l < n; ++l) {
        const std::size_t idx[3] = {l, m, q};
        const std::size_t mode = idx[axis];
        if (mode == 0 || mode == n - 1) continue;
        const double a = s(l, m, q) / (kPi * static_cast<double>(mode));
        out(l, m, q) -= a;
        std::size_t base[3] = {l, m, q};
        base[axis] = 0;
        out(base[0], base[1], base[2]) += a;
      }
  return inverse_transform(out);
}

ScalarField3 spectral_filter(const ScalarField3& f, double cutoff) {
  require(cutoff > 0.0 && cutoff <= 1.0, ErrorCode::InvalidArgument, "spectral_filter: cutoff must lie in (0,1]");
  Spectrum3 s = transform(f);
  const std::size_t n = s.n;
  const double N = static_cast<double>(n - 1);
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t l = 0; l < n; ++l) {
        const double r = std::sqrt(static_cast<double>(l * l + m * m + q * q)) / N;
        double w = 1.0;
        if (r >= 1.0)
          w = 0.0;
        else if (r > cutoff)
          w = 0.5 * (1.0 + std::cos(kPi * (r - cutoff) / (1.0 - cutoff)));
        s(l, m, q) *= w;
      }
  return inverse_transform(s);
}

}  // namespace maet
