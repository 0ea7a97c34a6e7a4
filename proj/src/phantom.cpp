#include "maet/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace maet {

double bump_profile(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double u = 0.5 * (1.0 - std::cos(std::numbers::pi * t));
  static constexpr double kBinom9[10] = {1, 9, 36, 84, 126, 126, 84, 36, 9, 1};
  double tail = 0.0;
  for (int j = 5; j <= 9; ++j) tail += kBinom9[j] * std::pow(u, j) * std::pow(1.0 - u, 9 - j);
  return 1.0 - tail;
}

double ball_profile(double r, double radius, double width) {
  if (width <= 0.0) return r <= radius ? 1.0 : 0.0;
  return bump_profile((r - (radius - 0.5 * width)) / width);
}

PhantomSpec smooth_bumps_default() {
  PhantomSpec s;
  s.kind = PhantomKind::SmoothBumps;
  s.items = {{{0.25, 0.25, 0.5}, 0.5, 0.15},
             {{0.25, 0.75, 0.5}, -0.5, 0.15},
             {{0.75, 0.25, 0.5}, -0.5, 0.15},
             {{0.75, 0.75, 0.5}, 0.5, 0.15}};
  return s;
}

PhantomSpec smooth_bumps_wide() {
  PhantomSpec s = smooth_bumps_default();
  for (auto& it : s.items) it.radius = 0.34;
  return s;
}

PhantomSpec smoothed_balls_default() {
  PhantomSpec s;
  s.kind = PhantomKind::SmoothedBalls;
  s.edge_width = 0.02;
  s.items = {{{0.25, 0.25, 0.25}, 1.0, 0.10},
             {{0.25, 0.25, 0.65}, 0.5, 0.08},
             {{0.25, 0.70, 0.25}, 0.75, 0.06},
             {{0.65, 0.25, 0.25}, 0.25, 0.04}};
  return s;
}

Phantom make_phantom(const PhantomSpec& spec, std::size_t n) {
  require(n >= 3, ErrorCode::InvalidArgument, "phantom grid must have n >= 3");
  require(spec.margin >= 0.0 && spec.margin < 0.5, ErrorCode::InvalidArgument, "margin must lie in [0, 0.5)");
  const bool balls = spec.kind == PhantomKind::SmoothedBalls;
  require(!balls || spec.edge_width >= 0.0, ErrorCode::InvalidArgument, "edge width must be non-negative");
  for (const auto& it : spec.items) {
    require(it.radius > 0.0 && std::isfinite(it.amplitude), ErrorCode::InvalidArgument,
            "phantom items need a positive radius and a finite amplitude");
    const double reach = balls ? it.radius + 0.5 * spec.edge_width : it.radius;
    for (double c : it.center)
      require(c - reach >= spec.margin - 1e-12 && c + reach <= 1.0 - spec.margin + 1e-12, ErrorCode::OutOfDomain,
              "phantom support reaches into the boundary margin");
  }

  ScalarField3 f = ScalarField3::sample(n, kAllEven, [&](double x, double y, double z) {
    double v = 0.0;
    for (const auto& it : spec.items) {
      const double r = std::hypot(x - it.center[0], y - it.center[1], z - it.center[2]);
      v += it.amplitude * (balls ? ball_profile(r, it.radius, spec.edge_width) : bump_profile(r / it.radius));
    }
    return v;
  });
  ScalarField3 sigma = f;
  for (auto& v : sigma.values()) v = std::exp(v);
  return Phantom{std::move(f), make_conductivity(std::move(sigma), spec.margin)};
}

std::string to_string(PhantomKind kind) {
  return kind == PhantomKind::SmoothBumps ? "smooth-bumps" : "smoothed-balls";
}

PhantomKind phantom_kind_from_string(const std::string& s) {
  if (s == "smooth-bumps") return PhantomKind::SmoothBumps;
  if (s == "smoothed-balls") return PhantomKind::SmoothedBalls;
  fail(ErrorCode::InvalidArgument, "unknown phantom kind '" + s + "'");
}

}  // namespace maet
