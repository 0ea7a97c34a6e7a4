#include "maet/forward_em.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "maet/spectral.hpp"

namespace maet {

namespace {

double cv_weight(std::size_t i, std::size_t n) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }

void require_k(int k) {
  require(k >= 1 && k <= 3, ErrorCode::InvalidArgument, "lead index k must be 1, 2 or 3 (got " + std::to_string(k) + ")");
}

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

// Node-based finite-volume discretization of -div(sigma grad u) with
// control volumes of half width at the boundary.
class FvOperator {
 public:
  explicit FvOperator(const ScalarField3& sigma) : n_(sigma.n()), h_(sigma.spacing()) {
    const std::size_t n = n_;
    for (int a = 0; a < 3; ++a) coef_[a].assign(n * n * n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t p = sigma.index(i, j, k);
          const std::size_t idx[3] = {i, j, k};
          for (int a = 0; a < 3; ++a) {
            if (idx[a] + 1 >= n) continue;
            const std::size_t stride = a == 0 ? 1 : (a == 1 ? n : n * n);
            const double sf = harmonic(sigma[p], sigma[p + stride]);
            const double area = cv_weight(idx[(a + 1) % 3], n) * cv_weight(idx[(a + 2) % 3], n);
            coef_[a][p] = sf * h_ * area;
          }
        }
  }

  // y = A u
  void apply(const std::vector<double>& u, std::vector<double>& y) const {
    const std::size_t n = n_;
    y.assign(u.size(), 0.0);
    const std::size_t strides[3] = {1, n, n * n};
    for (int a = 0; a < 3; ++a) {
      const std::size_t s = strides[a];
      const auto& c = coef_[a];
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t idx[3] = {i, j, k};
            if (idx[a] + 1 >= n) continue;
            const std::size_t p = i + n * (j + n * k);
            const double f = c[p] * (u[p] - u[p + s]);
            y[p] += f;
            y[p + s] -= f;
          }
    }
  }

  // Net current through the plane between node layers i and i+1 along `axis`.
  double plane_flux(const std::vector<double>& u, int axis, std::size_t layer) const {
    const std::size_t n = n_;
    const std::size_t strides[3] = {1, n, n * n};
    double total = 0.0;
    for (std::size_t t2 = 0; t2 < n; ++t2)
      for (std::size_t t1 = 0; t1 < n; ++t1) {
        std::size_t idx[3];
        idx[axis] = layer;
        idx[(axis + 1) % 3] = t1;
        idx[(axis + 2) % 3] = t2;
        const std::size_t p = idx[0] + n * (idx[1] + n * idx[2]);
        // sigma_f * (du / h) * h^2 * w1 * w2
        total += coef_[axis][p] * (u[p + strides[axis]] - u[p]);
      }
    return total;
  }

 private:
  std::size_t n_;
  double h_;
  std::array<std::vector<double>, 3> coef_;
};

std::vector<double> rhs_for(std::size_t n, int k) {
  const double h = 1.0 / static_cast<double>(n - 1);
  std::vector<double> b(n * n * n, 0.0);
  const int axis = k - 1;
  // Unit net current: sigma dw/dn = -1 on x_k = 0 and +1 on x_k = 1.
  for (std::size_t t2 = 0; t2 < n; ++t2)
    for (std::size_t t1 = 0; t1 < n; ++t1) {
      const double area = h * h * cv_weight(t1, n) * cv_weight(t2, n);
      for (std::size_t side = 0; side < 2; ++side) {
        std::size_t idx[3];
        idx[axis] = side == 0 ? 0 : n - 1;
        idx[(axis + 1) % 3] = t1;
        idx[(axis + 2) % 3] = t2;
        b[idx[0] + n * (idx[1] + n * idx[2])] += (side == 0 ? -1.0 : 1.0) * area;
      }
    }
  return b;
}

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Exact pseudo-inverse of the constant-coefficient operator, applied through
// the cosine transform: A_1 = D * (-Laplacian_h with Neumann reflection).
class NeumannPreconditioner {
 public:
  explicit NeumannPreconditioner(std::size_t n) : n_(n), mu_(n) {
    const double N = static_cast<double>(n - 1);
    const double h = 1.0 / N;
    for (std::size_t l = 0; l < n; ++l)
      mu_[l] = (2.0 - 2.0 * std::cos(std::numbers::pi * static_cast<double>(l) / N)) / (h * h);
    inv_d_.resize(n * n * n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
          inv_d_[i + n * (j + n * k)] = 1.0 / (h * h * h * cv_weight(i, n) * cv_weight(j, n) * cv_weight(k, n));
  }

  void apply(const std::vector<double>& r, std::vector<double>& z) const {
    const std::size_t n = n_;
    ScalarField3 v(n, kAllEven);
    for (std::size_t p = 0; p < r.size(); ++p) v[p] = r[p] * inv_d_[p];
    Spectrum3 s = transform(v);
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t m = 0; m < n; ++m)
        for (std::size_t l = 0; l < n; ++l) {
          const double ev = mu_[l] + mu_[m] + mu_[q];
          s(l, m, q) = ev > 0.0 ? s(l, m, q) / ev : 0.0;
        }
    const ScalarField3 out = inverse_transform(s);
    z.assign(out.values().begin(), out.values().end());
  }

 private:
  std::size_t n_;
  std::vector<double> mu_;
  std::vector<double> inv_d_;
};

void remove_mean(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  s /= static_cast<double>(v.size());
  for (double& x : v) x -= s;
}

}  // namespace

bool in_interior_region(std::size_t i, std::size_t j, std::size_t k, std::size_t n, double margin) {
  const double h = 1.0 / static_cast<double>(n - 1);
  const double tol = 1e-12;
  for (std::size_t idx : {i, j, k}) {
    const double x = static_cast<double>(idx) * h;
    if (x < margin - tol || x > 1.0 - margin + tol) return false;
  }
  return true;
}

Conductivity make_conductivity(ScalarField3 sigma, double margin) {
  require(margin >= 0.0 && margin < 0.5, ErrorCode::InvalidArgument, "margin must lie in [0, 0.5)");
  require(sigma.parity() == kAllEven, ErrorCode::ParityMismatch, "conductivity must carry all-even parity");
  require(sigma.all_finite(), ErrorCode::InvalidArgument, "conductivity has non-finite values");
  const std::size_t n = sigma.n();
  const double h = sigma.spacing();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const double s = sigma(i, j, k);
        require(s > 0.0, ErrorCode::InvalidArgument, "conductivity must be strictly positive");
        const double d = std::min({i * h, j * h, k * h, 1.0 - i * h, 1.0 - j * h, 1.0 - k * h});
        if (d < margin - 1e-12)
          require(std::abs(s - 1.0) <= 1e-12, ErrorCode::OutOfDomain,
                  "conductivity differs from 1 inside the boundary margin");
      }
  return Conductivity{std::move(sigma), margin};
}

double BoundaryCurrent::total() const {
  double s = 0.0;
  for (double v : face_value) s += v;  // every face has unit area
  return s;
}

BoundaryCurrent boundary_current(int k) {
  require_k(k);
  BoundaryCurrent bc;
  bc.k = k;
  bc.face_value[2 * (k - 1)] = -0.5;
  bc.face_value[2 * (k - 1) + 1] = 0.5;
  return bc;
}

ScalarField3 solve_potential(const Conductivity& cond, int k, const SolverOptions& opts, SolveReport* report) {
  require_k(k);
  require(opts.tolerance > 0.0 && opts.max_iterations > 0, ErrorCode::InvalidArgument, "invalid solver options");
  const BoundaryCurrent bc = boundary_current(k);
  require(std::abs(bc.total()) < 1e-14, ErrorCode::InvalidArgument, "boundary current is not compatible");

  const ScalarField3& sigma = cond.sigma;
  const std::size_t n = sigma.n();
  const FvOperator A(sigma);
  const NeumannPreconditioner M(n);
  const std::vector<double> b = rhs_for(n, k);
  const double bnorm = std::sqrt(dotv(b, b));

  std::vector<double> u(b.size(), 0.0), r, z, p, ap;
  double res = 1.0;
  int it = 0;
  // PCG with restarts: each pass starts from the true residual, so the
  // reported residual is never the drifting recursive estimate.
  while (it < opts.max_iterations) {
    A.apply(u, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    remove_mean(r);
    res = std::sqrt(dotv(r, r)) / bnorm;
    if (res <= opts.tolerance) break;
    M.apply(r, z);
    p = z;
    double rz = dotv(r, z);
    while (it < opts.max_iterations) {
      A.apply(p, ap);
      const double alpha = rz / dotv(p, ap);
      for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      remove_mean(r);
      ++it;
      if (std::sqrt(dotv(r, r)) / bnorm <= opts.tolerance) break;
      M.apply(r, z);
      const double rz_new = dotv(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
    }
  }
  A.apply(u, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  res = std::sqrt(dotv(r, r)) / bnorm;

  SolveReport rep{k, it, res, res <= opts.tolerance};
  if (report) *report = rep;
  if (!rep.converged) {
    std::ostringstream msg;
    msg << "potential solve for k=" << k << " did not converge: residual " << res << " after " << it << " iterations";
    fail(ErrorCode::NotConverged, msg.str());
  }
  ScalarField3 w(n, kAllEven, std::move(u));
  const double mean = trapezoid_mean(w);
  for (auto& v : w.values()) v -= mean;
  return w;
}

VectorField3 compute_current_deviation(const ScalarField3& sigma, const ScalarField3& w, int k) {
  require_k(k);
  require_same_grid(sigma, w, "compute_current");
  const std::size_t n = w.n();
  const int axis = k - 1;
  const double h = w.spacing();
  ScalarField3 w0 = w;
  w0.set_parity(kAllEven);
  for (std::size_t kk = 0; kk < n; ++kk)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx[3] = {i, j, kk};
        w0(i, j, kk) -= static_cast<double>(idx[axis]) * h - 0.5;
      }
  VectorField3 g = gradient(w0);
  for (int a = 0; a < 3; ++a) {
    const double e = a == axis ? 1.0 : 0.0;
    for (std::size_t p = 0; p < g[a].size(); ++p) g[a][p] = sigma[p] * (e + g[a][p]) - e;
    g[a].enforce_parity();
  }
  return g;
}

VectorField3 full_current(const VectorField3& j0, int k) {
  require_k(k);
  VectorField3 j = j0;
  for (auto& v : j[k - 1].values()) v += 1.0;
  j[k - 1].set_parity(kAllEven);
  return j;
}

std::vector<std::uint8_t> curl_support_mask(const ScalarField3& sigma, int dilation) {
  require(dilation >= 0, ErrorCode::InvalidArgument, "dilation must be non-negative");
  const std::size_t n = sigma.n();
  std::vector<std::uint8_t> mask(sigma.size(), 0);
  for (std::size_t p = 0; p < sigma.size(); ++p) mask[p] = sigma[p] != 1.0;
  // Separable max-filter, one axis at a time.
  const std::size_t strides[3] = {1, n, n * n};
  for (int a = 0; a < 3; ++a) {
    std::vector<std::uint8_t> next(mask.size(), 0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t idx[3] = {i, j, k};
          const std::size_t p = sigma.index(i, j, k);
          const long lo = std::max<long>(0, static_cast<long>(idx[a]) - dilation);
          const long hi = std::min<long>(static_cast<long>(n) - 1, static_cast<long>(idx[a]) + dilation);
          std::uint8_t v = 0;
          for (long t = lo; t <= hi && !v; ++t)
            v = mask[p + (t - static_cast<long>(idx[a])) * static_cast<long>(strides[a])];
          next[p] = v;
        }
    mask.swap(next);
  }
  return mask;
}

LeadSystem solve_leads(const Conductivity& sigma, const SolverOptions& opts) {
  LeadSystem ls;
  ls.support = curl_support_mask(sigma.sigma);
  for (int k = 1; k <= 3; ++k) {
    ls.w[k - 1] = solve_potential(sigma, k, opts, &ls.reports[k - 1]);
    ls.j0[k - 1] = compute_current_deviation(sigma.sigma, ls.w[k - 1], k);
  }
  ls.curl = compute_curls(ls, &ls.curl_leakage);
  return ls;
}

std::array<VectorField3, 3> compute_curls(const LeadSystem& leads, std::array<double, 3>* leakage) {
  std::array<VectorField3, 3> out;
  for (int k = 0; k < 3; ++k) {
    require(leads.j0[k].has_signature(current_signature()), ErrorCode::ParityMismatch,
            "current deviation must carry current parity");
    out[k] = curl(leads.j0[k]);
    double cut = 0.0, total = 0.0;
    if (!leads.support.empty()) {
      require(leads.support.size() == out[k][0].size(), ErrorCode::GridMismatch, "support mask size mismatch");
      for (int a = 0; a < 3; ++a)
        for (std::size_t p = 0; p < leads.support.size(); ++p) {
          double& v = out[k][a][p];
          total += v * v;
          if (!leads.support[p]) {
            cut += v * v;
            v = 0.0;
          }
        }
    }
    if (leakage) (*leakage)[k] = total > 0.0 ? std::sqrt(cut / total) : 0.0;
  }
  return out;
}

std::vector<double> plane_fluxes(const ScalarField3& sigma, const ScalarField3& w, int k) {
  require_k(k);
  require_same_grid(sigma, w, "plane_fluxes");
  const FvOperator A(sigma);
  std::vector<double> u(w.values().begin(), w.values().end());
  std::vector<double> out;
  for (std::size_t layer = 0; layer + 1 < w.n(); ++layer) out.push_back(A.plane_flux(u, k - 1, layer));
  return out;
}

double divergence_residual(const ScalarField3& sigma, const ScalarField3& w, int k) {
  require_k(k);
  require_same_grid(sigma, w, "divergence_residual");
  const FvOperator A(sigma);
  const std::vector<double> b = rhs_for(w.n(), k);
  std::vector<double> u(w.values().begin(), w.values().end()), au;
  A.apply(u, au);
  for (std::size_t i = 0; i < au.size(); ++i) au[i] = b[i] - au[i];
  return std::sqrt(dotv(au, au) / dotv(b, b));
}

}  // namespace maet
