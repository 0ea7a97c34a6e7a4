#include "maet/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace maet {

std::string to_string(const ParitySig& sig) {
  std::string s = "(";
  for (int a = 0; a < 3; ++a) {
    s += sig[a] == Parity::Even ? "even" : "odd";
    s += a < 2 ? "," : ")";
  }
  return s;
}

ScalarField3::ScalarField3(std::size_t n, ParitySig parity)
    : n_(n), parity_(parity), values_(n * n * n, 0.0) {
  require(n >= 3, ErrorCode::InvalidArgument, "grid size must be at least 3");
}

ScalarField3::ScalarField3(std::size_t n, ParitySig parity, std::vector<double> values)
    : n_(n), parity_(parity), values_(std::move(values)) {
  require(n >= 3, ErrorCode::InvalidArgument, "grid size must be at least 3");
  require(values_.size() == n * n * n, ErrorCode::InvalidArgument, "value count does not match n^3");
}

void ScalarField3::enforce_parity() {
  const std::size_t last = n_ - 1;
  for (int a = 0; a < 3; ++a) {
    if (parity_[a] != Parity::Odd) continue;
    for (std::size_t s = 0; s < n_; ++s)
      for (std::size_t t = 0; t < n_; ++t) {
        for (std::size_t b : {std::size_t{0}, last}) {
          std::size_t idx[3];
          idx[a] = b;
          idx[(a + 1) % 3] = s;
          idx[(a + 2) % 3] = t;
          (*this)(idx[0], idx[1], idx[2]) = 0.0;
        }
      }
  }
}

bool ScalarField3::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField3& ScalarField3::operator+=(const ScalarField3& o) {
  require_same_grid(*this, o, "field addition");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

ScalarField3& ScalarField3::operator-=(const ScalarField3& o) {
  require_same_grid(*this, o, "field subtraction");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

ScalarField3& ScalarField3::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField3 operator+(ScalarField3 a, const ScalarField3& b) { return a += b; }
ScalarField3 operator-(ScalarField3 a, const ScalarField3& b) { return a -= b; }
ScalarField3 operator*(double s, ScalarField3 a) { return a *= s; }

VectorField3 VectorField3::zeros(std::size_t n, const std::array<ParitySig, 3>& sig) {
  return VectorField3(ScalarField3(n, sig[0]), ScalarField3(n, sig[1]), ScalarField3(n, sig[2]));
}

VectorField3 VectorField3::zeros_current(std::size_t n) { return zeros(n, current_signature()); }
VectorField3 VectorField3::zeros_curl(std::size_t n) { return zeros(n, curl_signature()); }

VectorField3& VectorField3::operator+=(const VectorField3& o) {
  for (int a = 0; a < 3; ++a) c[a] += o.c[a];
  return *this;
}

VectorField3& VectorField3::operator-=(const VectorField3& o) {
  for (int a = 0; a < 3; ++a) c[a] -= o.c[a];
  return *this;
}

VectorField3& VectorField3::operator*=(double s) {
  for (auto& f : c) f *= s;
  return *this;
}

std::array<ParitySig, 3> current_signature() { return {current_parity(0), current_parity(1), current_parity(2)}; }
std::array<ParitySig, 3> curl_signature() { return {curl_parity(0), curl_parity(1), curl_parity(2)}; }

void require_same_grid(const ScalarField3& a, const ScalarField3& b, const char* what) {
  require(a.n() == b.n(), ErrorCode::GridMismatch,
          std::string(what) + ": grid mismatch (" + std::to_string(a.n()) + " vs " + std::to_string(b.n()) + ")");
}

void require_same_grid(const VectorField3& a, const VectorField3& b, const char* what) {
  for (int i = 0; i < 3; ++i) require_same_grid(a[i], b[i], what);
}

double SpectrumIndex::eigenvalue() const {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return -pi2 * static_cast<double>(l * l + m * m + q * q);
}

double dot(const ScalarField3& a, const ScalarField3& b) {
  require_same_grid(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const ScalarField3& f) { return std::sqrt(dot(f, f)); }

double norm2(const VectorField3& v) {
  double s = 0.0;
  for (const auto& f : v.c) s += dot(f, f);
  return std::sqrt(s);
}

double max_abs(const ScalarField3& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs(const VectorField3& v) {
  return std::max({max_abs(v[0]), max_abs(v[1]), max_abs(v[2])});
}

namespace {
double trapezoid_weight(std::size_t i, std::size_t n) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }
}  // namespace

double trapezoid_norm_sq(const ScalarField3& f) {
  const std::size_t n = f.n();
  const double h = f.spacing();
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j) {
      const double wjk = trapezoid_weight(j, n) * trapezoid_weight(k, n);
      for (std::size_t i = 0; i < n; ++i) {
        const double v = f(i, j, k);
        s += wjk * trapezoid_weight(i, n) * v * v;
      }
    }
  return s * h * h * h;
}

double trapezoid_mean(const ScalarField3& f) {
  const std::size_t n = f.n();
  const double h = f.spacing();
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j) {
      const double wjk = trapezoid_weight(j, n) * trapezoid_weight(k, n);
      for (std::size_t i = 0; i < n; ++i) s += wjk * trapezoid_weight(i, n) * f(i, j, k);
    }
  return s * h * h * h;
}

}  // namespace maet
