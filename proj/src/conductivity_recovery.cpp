#include "maet/conductivity_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "maet/spectral.hpp"

namespace maet {

namespace {

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross3(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double len3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

// Gaussian elimination with partial pivoting; false if a pivot vanishes.
bool solve3(std::array<Vec3, 3> m, Vec3 rhs, Vec3& x) {
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (m[piv][col] == 0.0) return false;
    std::swap(m[piv], m[col]);
    std::swap(rhs[piv], rhs[col]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = m[r][col] / m[col][col];
      for (int q = col; q < 3; ++q) m[r][q] -= f * m[col][q];
      rhs[r] -= f * rhs[col];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double s = rhs[r];
    for (int q = r + 1; q < 3; ++q) s -= m[r][q] * x[q];
    x[r] = s / m[r][r];
  }
  return true;
}

Vec3 at(const VectorField3& v, std::size_t idx) { return {v[0][idx], v[1][idx], v[2][idx]}; }

constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};

}  // namespace

Vec3 cramer_solve(const Vec3& a, const Vec3& b, const Vec3& c, double r1, double r2, double r3, double eps_det) {
  const double det = dot3(a, cross3(b, c));
  if (!(std::abs(det) > eps_det)) fail(ErrorCode::Singular, "cramer_solve: determinant below threshold");
  Vec3 x;
  for (int i = 0; i < 3; ++i) x[i] = (r3 * a[i] - r2 * b[i] + r1 * c[i]) / det;
  return x;
}

double determinant_threshold(const Vec3& j1, const Vec3& j2, const Vec3& j3, double rel) {
  return rel * len3(j1) * len3(j2) * len3(j3);
}

Vec3 gradient_full(const std::array<Vec3, 3>& j, const std::array<Vec3, 3>& c, double eps_det) {
  const double r1 = 0.5 * (dot3(c[0], j[1]) - dot3(c[1], j[0]));
  const double r2 = 0.5 * (dot3(c[0], j[2]) - dot3(c[2], j[0]));
  const double r3 = 0.5 * (dot3(c[1], j[2]) - dot3(c[2], j[1]));
  return cramer_solve(j[0], j[1], j[2], r1, r2, r3, eps_det);
}

std::optional<Vec3> gradient_truncated(const Vec3& ja, const Vec3& jb, const Vec3& ca, const Vec3& cb,
                                       double eps_par) {
  const Vec3 axb = cross3(ja, jb);
  if (!(len3(axb) > eps_par * len3(ja) * len3(jb))) return std::nullopt;
  const double ab = dot3(ja, jb), aa = dot3(ja, ja), bb = dot3(jb, jb);
  std::array<Vec3, 3> m;
  for (int i = 0; i < 3; ++i) {
    m[0][i] = axb[i];
    m[1][i] = ab * ja[i] - aa * jb[i];
    m[2][i] = ab * jb[i] - bb * ja[i];
  }
  const Vec3 rhs{0.5 * (dot3(ca, jb) - dot3(cb, ja)), dot3(ca, axb), -dot3(cb, axb)};
  Vec3 x{};
  if (!solve3(m, rhs, x)) return std::nullopt;
  return x;
}

std::string to_string(GradientMethod m) {
  switch (m) {
    case GradientMethod::Outside: return "outside";
    case GradientMethod::Full: return "full";
    case GradientMethod::Truncated12: return "truncated-(1,2)";
    case GradientMethod::Truncated13: return "truncated-(1,3)";
    case GradientMethod::Truncated23: return "truncated-(2,3)";
    case GradientMethod::Skipped: return "skipped";
  }
  return "unknown";
}

std::string GradientSolveReport::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["full"] = full;
  j["truncated"] = truncated;
  j["truncated_pairs"] = {{"1,2", truncated_pairs[0]}, {"1,3", truncated_pairs[1]}, {"2,3", truncated_pairs[2]}};
  j["skipped"] = skipped;
  j["outside"] = outside;
  j["min_abs_det"] = min_abs_det;
  return j.dump(2);
}

double taper_weight(std::size_t i, std::size_t j, std::size_t k, std::size_t n, double margin) {
  const double h = 1.0 / static_cast<double>(n - 1);
  double d = 1.0;
  for (std::size_t idx : {i, j, k}) {
    const double x = static_cast<double>(idx) * h;
    d = std::min({d, x, 1.0 - x});
  }
  const double tol = 1e-12;
  if (d >= margin - tol) return 1.0;
  const double lo = 0.5 * margin;
  if (d <= lo + tol) return 0.0;
  return 0.5 * (1.0 - std::cos(std::numbers::pi * (d - lo) / lo));
}

VectorField3 solve_gradient(const std::array<VectorField3, 3>& currents, const std::array<VectorField3, 3>& curls,
                            const ConductivityOptions& opts, GradientSolveReport* report) {
  require(opts.margin >= 0.0 && opts.margin < 0.5, ErrorCode::InvalidArgument,
          "solve_gradient: margin must lie in [0, 0.5)");
  require(opts.eps_det_rel >= 0.0 && opts.eps_par >= 0.0, ErrorCode::InvalidArgument,
          "solve_gradient: thresholds must be non-negative");
  const std::size_t n = currents[0].n();
  require(n >= 3, ErrorCode::InvalidArgument, "solve_gradient: grid too small");
  for (int k = 0; k < 3; ++k) {
    require_same_grid(currents[k], currents[0], "solve_gradient currents");
    require_same_grid(curls[k], currents[0], "solve_gradient curls");
    for (int a = 0; a < 3; ++a)
      require(currents[k][a].all_finite() && curls[k][a].all_finite(), ErrorCode::InvalidArgument,
              "solve_gradient: non-finite input");
  }

  VectorField3 g = VectorField3::zeros_curl(n);
  const std::size_t total = n * n * n;
  std::vector<GradientMethod> method(total, GradientMethod::Outside);
  std::vector<double> det(total, 0.0);
  std::vector<double> weight(total, 0.0);
  double min_det = std::numeric_limits<double>::infinity();

  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = i + n * (j + n * k);
        const double w = taper_weight(i, j, k, n, opts.margin);
        weight[idx] = w;
        if (w <= 0.0) continue;
        const std::array<Vec3, 3> jv{at(currents[0], idx), at(currents[1], idx), at(currents[2], idx)};
        const std::array<Vec3, 3> cv{at(curls[0], idx), at(curls[1], idx), at(curls[2], idx)};
        const double d = dot3(jv[0], cross3(jv[1], jv[2]));
        det[idx] = d;
        min_det = std::min(min_det, std::abs(d));
        Vec3 x{};
        if (std::abs(d) > determinant_threshold(jv[0], jv[1], jv[2], opts.eps_det_rel)) {
          x = gradient_full(jv, cv);
          method[idx] = GradientMethod::Full;
        } else {
          int best = 0;
          double best_len = -1.0;
          for (int p = 0; p < 3; ++p) {
            const double l = len3(cross3(jv[kPairs[p][0]], jv[kPairs[p][1]]));
            if (l > best_len) best_len = l, best = p;
          }
          const int a = kPairs[best][0], b = kPairs[best][1];
          const auto t = gradient_truncated(jv[a], jv[b], cv[a], cv[b], opts.eps_par);
          if (t) {
            x = *t;
            method[idx] = static_cast<GradientMethod>(static_cast<int>(GradientMethod::Truncated12) + best);
          } else {
            method[idx] = GradientMethod::Skipped;
          }
        }
        for (int a = 0; a < 3; ++a) g[a][idx] = x[a];
      }

  // Skipped nodes take the mean of their known face neighbours, sweeping
  // until every skipped node is reached.
  std::vector<std::uint8_t> known(total);
  std::size_t pending = 0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    known[idx] = method[idx] != GradientMethod::Skipped;
    pending += !known[idx];
  }
  while (pending > 0) {
    std::vector<std::size_t> filled;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t idx = i + n * (j + n * k);
          if (known[idx]) continue;
          Vec3 acc{};
          int cnt = 0;
          auto visit = [&](std::size_t q) {
            if (!known[q]) return;
            for (int a = 0; a < 3; ++a) acc[a] += g[a][q];
            ++cnt;
          };
          if (i > 0) visit(idx - 1);
          if (i + 1 < n) visit(idx + 1);
          if (j > 0) visit(idx - n);
          if (j + 1 < n) visit(idx + n);
          if (k > 0) visit(idx - n * n);
          if (k + 1 < n) visit(idx + n * n);
          if (cnt == 0) continue;
          for (int a = 0; a < 3; ++a) g[a][idx] = acc[a] / cnt;
          filled.push_back(idx);
        }
    if (filled.empty()) break;  // nothing known anywhere: leave zeros
    for (std::size_t idx : filled) known[idx] = 1;
    pending -= filled.size();
  }

  for (int a = 0; a < 3; ++a) {
    auto& s = g[a].storage();
    for (std::size_t idx = 0; idx < total; ++idx) s[idx] *= weight[idx];
    g[a].enforce_parity();
  }

  if (report) {
    GradientSolveReport r;
    r.n = n;
    for (GradientMethod m : method) {
      switch (m) {
        case GradientMethod::Outside: ++r.outside; break;
        case GradientMethod::Full: ++r.full; break;
        case GradientMethod::Skipped: ++r.skipped; break;
        default:
          ++r.truncated;
          ++r.truncated_pairs[static_cast<int>(m) - static_cast<int>(GradientMethod::Truncated12)];
      }
    }
    r.min_abs_det = std::isfinite(min_det) ? min_det : 0.0;
    r.method = std::move(method);
    r.determinant = std::move(det);
    *report = std::move(r);
  }
  return g;
}

ScalarField3 recover_log_sigma(const VectorField3& gradient) {
  require(gradient.has_signature(curl_signature()), ErrorCode::ParityMismatch,
          "recover_log_sigma: gradient field must carry curl parity");
  for (int a = 0; a < 3; ++a)
    require(gradient[a].all_finite(), ErrorCode::InvalidArgument, "recover_log_sigma: non-finite gradient");
  ScalarField3 u = poisson_dirichlet(divergence(gradient));
  u.set_parity(kAllEven);
  return u;
}

ScalarField3 reconstruct_log_sigma(const std::array<VectorField3, 3>& currents,
                                   const std::array<VectorField3, 3>& curls, const ConductivityOptions& opts,
                                   GradientSolveReport* report) {
  return recover_log_sigma(solve_gradient(currents, curls, opts, report));
}

}  // namespace maet
