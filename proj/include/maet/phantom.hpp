#pragma once

#include <array>
#include <string>
#include <vector>

#include "maet/field.hpp"
#include "maet/forward_em.hpp"

namespace maet {

enum class PhantomKind { SmoothBumps, SmoothedBalls };

struct PhantomItem {
  std::array<double, 3> center{};
  double amplitude = 0.0;
  double radius = 0.0;  // support radius r0 for bumps, ball radius for balls
};

struct PhantomSpec {
  PhantomKind kind = PhantomKind::SmoothBumps;
  std::vector<PhantomItem> items;
  double edge_width = 0.02;  // balls only: width of the smoothed edge
  double margin = 0.1;       // sigma == 1 within this distance of the boundary
};

/// Radial profile phi(t) on t = r / r0: phi(0) = 1, phi(t) = 0 for t >= 1,
/// and derivatives 1..9 vanish at both ends. It is the degree-9 polynomial
///   phi = 1 - sum_{j=5}^{9} C(9,j) u^j (1-u)^(9-j),  u = (1 - cos(pi t)) / 2,
/// hence a trigonometric polynomial in t on [0,1].
double bump_profile(double t);

/// Smoothed indicator of a ball: 1 for r <= R - w/2, 0 for r >= R + w/2,
/// with bump_profile as the transition.
double ball_profile(double r, double radius, double width);

/// Four bumps of amplitude +-0.5 at in-plane centers (0.25|0.75)^2 on the
/// plane x3 = 0.5, with r0 = 0.15 so that the support clears the margin.
PhantomSpec smooth_bumps_default();

/// The same four bumps with r0 = 0.34. Its support leaves the
/// cube, so make_phantom rejects it; kept for reference.
PhantomSpec smooth_bumps_wide();

/// Four smoothed balls centred on the pairwise intersections of the planes
/// x1 = 0.25, x2 = 0.25, x3 = 0.25; ln(sigma) ranges over [0, 1].
PhantomSpec smoothed_balls_default();

struct Phantom {
  ScalarField3 log_sigma;
  Conductivity conductivity;
};

/// Samples ln(sigma) on the n-grid. Throws OutOfDomain if any item's support
/// reaches into the boundary margin.
Phantom make_phantom(const PhantomSpec& spec, std::size_t n);

std::string to_string(PhantomKind kind);
PhantomKind phantom_kind_from_string(const std::string& s);

}  // namespace maet
