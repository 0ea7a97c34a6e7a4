#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "maet/error.hpp"

namespace maet {

/// Symmetric extension of a field across the planes x_a = 0 and x_a = 1.
/// Even extends to a cosine series, Odd to a sine series (zero on the planes).
enum class Parity : std::uint8_t { Even = 0, Odd = 1 };

using ParitySig = std::array<Parity, 3>;

inline constexpr ParitySig kAllEven{Parity::Even, Parity::Even, Parity::Even};
inline constexpr ParitySig kAllOdd{Parity::Odd, Parity::Odd, Parity::Odd};

inline Parity flip(Parity p) { return p == Parity::Even ? Parity::Odd : Parity::Even; }

inline ParitySig flipped(ParitySig sig, int axis) {
  sig[axis] = flip(sig[axis]);
  return sig;
}

/// Parity of component `a` of a current-type field: odd on axis a, even elsewhere.
inline ParitySig current_parity(int a) { return flipped(kAllEven, a); }

/// Parity of component `a` of a curl of a current-type field (equivalently
/// the gradient of an all-odd scalar): even on axis a, odd elsewhere.
inline ParitySig curl_parity(int a) { return flipped(kAllOdd, a); }

std::string to_string(const ParitySig& sig);

/// Node-sampled scalar field on the uniform grid x_i = i/(n-1) over [0,1]^3.
/// Storage is x-fastest: index = i + n*(j + n*k).
class ScalarField3 {
 public:
  ScalarField3() = default;
  ScalarField3(std::size_t n, ParitySig parity);
  ScalarField3(std::size_t n, ParitySig parity, std::vector<double> values);

  template <class F>
  static ScalarField3 sample(std::size_t n, ParitySig parity, F&& fn) {
    ScalarField3 f(n, parity);
    const double h = f.spacing();
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
          f(i, j, k) = fn(static_cast<double>(i) * h, static_cast<double>(j) * h,
                          static_cast<double>(k) * h);
    return f;
  }

  std::size_t n() const { return n_; }
  std::size_t size() const { return values_.size(); }
  const ParitySig& parity() const { return parity_; }
  void set_parity(ParitySig p) { parity_ = p; }
  double spacing() const { return 1.0 / static_cast<double>(n_ - 1); }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + n_ * (j + n_ * k);
  }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) { return values_[index(i, j, k)]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[index(i, j, k)];
  }
  double& operator[](std::size_t idx) { return values_[idx]; }
  double operator[](std::size_t idx) const { return values_[idx]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& storage() { return values_; }

  /// Zero the boundary planes of every odd axis so the parity invariant holds.
  void enforce_parity();
  bool all_finite() const;

  ScalarField3& operator+=(const ScalarField3& o);
  ScalarField3& operator-=(const ScalarField3& o);
  ScalarField3& operator*=(double s);

 private:
  std::size_t n_ = 0;
  ParitySig parity_ = kAllEven;
  std::vector<double> values_;
};

ScalarField3 operator+(ScalarField3 a, const ScalarField3& b);
ScalarField3 operator-(ScalarField3 a, const ScalarField3& b);
ScalarField3 operator*(double s, ScalarField3 a);

struct VectorField3 {
  std::array<ScalarField3, 3> c;

  VectorField3() = default;
  VectorField3(ScalarField3 x, ScalarField3 y, ScalarField3 z) : c{std::move(x), std::move(y), std::move(z)} {}

  static VectorField3 zeros(std::size_t n, const std::array<ParitySig, 3>& sig);
  static VectorField3 zeros_current(std::size_t n);
  static VectorField3 zeros_curl(std::size_t n);

  std::size_t n() const { return c[0].n(); }
  ScalarField3& operator[](int a) { return c[a]; }
  const ScalarField3& operator[](int a) const { return c[a]; }
  std::array<ParitySig, 3> signature() const { return {c[0].parity(), c[1].parity(), c[2].parity()}; }
  bool has_signature(const std::array<ParitySig, 3>& sig) const { return signature() == sig; }

  VectorField3& operator+=(const VectorField3& o);
  VectorField3& operator-=(const VectorField3& o);
  VectorField3& operator*=(double s);
};

std::array<ParitySig, 3> current_signature();
std::array<ParitySig, 3> curl_signature();

void require_same_grid(const ScalarField3& a, const ScalarField3& b, const char* what);
void require_same_grid(const VectorField3& a, const VectorField3& b, const char* what);

/// Mode triple (l, m, q) of the mixed sine/cosine basis on [0,1]^3.
struct SpectrumIndex {
  std::size_t l = 0, m = 0, q = 0;
  double eigenvalue() const;
};

/// Mode coefficients of a ScalarField3. Same layout as the field (l fastest);
/// on a sine axis the slots 0 and n-1 are always zero.
struct Spectrum3 {
  std::size_t n = 0;
  ParitySig parity = kAllEven;
  std::vector<double> coef;

  std::size_t index(std::size_t l, std::size_t m, std::size_t q) const { return l + n * (m + n * q); }
  double& operator()(std::size_t l, std::size_t m, std::size_t q) { return coef[index(l, m, q)]; }
  double operator()(std::size_t l, std::size_t m, std::size_t q) const { return coef[index(l, m, q)]; }
};

// Plain discrete norms over all nodes.
double dot(const ScalarField3& a, const ScalarField3& b);
double norm2(const ScalarField3& f);
double norm2(const VectorField3& v);
double max_abs(const ScalarField3& f);
double max_abs(const VectorField3& v);

/// Trapezoid-weighted squared L2 norm over [0,1]^3 (half weight on each
/// boundary plane); this is the norm in which the transforms are orthogonal.
double trapezoid_norm_sq(const ScalarField3& f);
double trapezoid_mean(const ScalarField3& f);

}  // namespace maet
