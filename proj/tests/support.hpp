#pragma once

// Shared helpers for the unit tests: random fields and direct (non-FFT)
// evaluations of the sine/cosine basis.

#include <cmath>
#include <numbers>
#include <random>

#include "maet/field.hpp"

namespace maet::testing {

inline double basis_1d(Parity p, std::size_t l, double x) {
  const double arg = std::numbers::pi * static_cast<double>(l) * x;
  return p == Parity::Even ? std::cos(arg) : std::sin(arg);
}

inline ScalarField3 random_field(std::size_t n, ParitySig parity, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField3 f(n, parity);
  for (auto& v : f.values()) v = u(rng);
  f.enforce_parity();
  return f;
}

inline VectorField3 random_vector(std::size_t n, const std::array<ParitySig, 3>& sig, std::mt19937_64& rng) {
  return VectorField3(random_field(n, sig[0], rng), random_field(n, sig[1], rng), random_field(n, sig[2], rng));
}

/// Field whose spectrum is random but decays like exp(-|k|^2/width^2),
/// which keeps finite-difference comparisons meaningful.
ScalarField3 random_smooth_field(std::size_t n, ParitySig parity, std::mt19937_64& rng, double width = 4.0);

/// Direct O(n^6) discrete projection onto the basis using trapezoid weights.
Spectrum3 brute_force_projection(const ScalarField3& f);

/// Direct O(n^6) synthesis of node values from basis amplitudes.
ScalarField3 brute_force_synthesis(const Spectrum3& s);

double rel_diff(const ScalarField3& a, const ScalarField3& b);
double rel_diff(const VectorField3& a, const VectorField3& b);

}  // namespace maet::testing
