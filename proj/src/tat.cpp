#include "maet/tat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "maet/forward_em.hpp"
#include "maet/spectral.hpp"

namespace maet {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt3 = std::sqrt(3.0);

void check_data(const FaceSeries& data, const Acquisition& acq, std::size_t n) {
  validate_acquisition(acq, n);
  require(data.m == acq.m && data.n_t == acq.n_t && data.data.size() == 6 * acq.m * acq.m * acq.n_t,
          ErrorCode::GridMismatch, "face data do not match the acquisition");
  for (double v : data.data) require(std::isfinite(v), ErrorCode::InvalidArgument, "non-finite measurement sample");
}

// Four-point Lagrange interpolation of a uniformly sampled series at
// fractional index x; zero outside the sampled range.
double cubic_at(const double* f, std::size_t len, double x) {
  if (x < 0.0 || x > static_cast<double>(len - 1)) return 0.0;
  long i = static_cast<long>(std::floor(x));
  i = std::clamp(i, 1L, static_cast<long>(len) - 3);
  const double t = x - static_cast<double>(i);
  const double w[4] = {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
                       -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
  double v = 0.0;
  for (int q = 0; q < 4; ++q) v += w[q] * f[i - 1 + q];
  return v;
}

// Six-point Lagrange interpolation of a DCT-I spectrum, extended evenly
// about both ends.
double even_lagrange6(const double* y, long len, double x) {
  const long i0 = static_cast<long>(std::floor(x)) - 2;
  const double t = x - static_cast<double>(i0);
  const long period = 2 * (len - 1);
  double v = 0.0;
  for (int a = 0; a < 6; ++a) {
    double w = 1.0;
    for (int b = 0; b < 6; ++b)
      if (b != a) w *= (t - b) / static_cast<double>(a - b);
    long idx = ((i0 + a) % period + period) % period;
    if (idx >= len) idx = period - idx;
    v += w * y[idx];
  }
  return v;
}

void apply_mask(ScalarField3& f, double margin, TatReport* report) {
  const std::size_t n = f.n();
  const double before = trapezoid_norm_sq(f);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i)
        if (!in_interior_region(i, j, k, n, margin)) f(i, j, k) = 0.0;
  f.enforce_parity();
  if (report) {
    const double after = trapezoid_norm_sq(f);
    report->margin = margin;
    report->energy = std::sqrt(after);
    report->masked_fraction = before > 0.0 ? std::sqrt(std::max(0.0, before - after) / before) : 0.0;
  }
}

}  // namespace

std::vector<double> time_differentiate(const std::vector<double>& f, double dt) {
  const std::size_t len = f.size();
  require(len >= 5, ErrorCode::InvalidArgument, "time_differentiate needs at least 5 samples");
  require(dt > 0.0, ErrorCode::InvalidArgument, "time_differentiate: dt must be positive");
  std::vector<double> d(len);
  const double s = 1.0 / (12.0 * dt);
  for (std::size_t i = 2; i + 2 < len; ++i) d[i] = s * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
  d[0] = s * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
  d[1] = s * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
  const std::size_t e = len - 1;
  d[e] = s * (25.0 * f[e] - 48.0 * f[e - 1] + 36.0 * f[e - 2] - 16.0 * f[e - 3] + 3.0 * f[e - 4]);
  d[e - 1] = s * (3.0 * f[e] + 10.0 * f[e - 1] - 18.0 * f[e - 2] + 6.0 * f[e - 3] - f[e - 4]);
  return d;
}

FaceSeries time_differentiate(const FaceSeries& data, double dt) {
  FaceSeries out(data.m, data.n_t);
  std::vector<double> row(data.n_t);
  for (std::size_t p = 0; p < data.series_count(); ++p) {
    std::copy(data.series(p), data.series(p) + data.n_t, row.begin());
    const auto d = time_differentiate(row, dt);
    std::copy(d.begin(), d.end(), out.series(p));
  }
  return out;
}

std::string to_string(TatBackend b) { return b == TatBackend::Series ? "series" : "time-reversal"; }

TatBackend tat_backend_from_string(const std::string& s) {
  if (s == "series") return TatBackend::Series;
  if (s == "time-reversal" || s == "fd") return TatBackend::TimeReversal;
  fail(ErrorCode::InvalidArgument, "unknown TAT backend '" + s + "'");
}

TimeReversalConfig make_time_reversal_config(std::size_t n, double c, double cfl) {
  require(n >= 3, ErrorCode::InvalidArgument, "time reversal needs n >= 3");
  require(c > 0.0, ErrorCode::InvalidArgument, "wave speed must be positive");
  require(cfl > 0.0 && cfl <= 1.0, ErrorCode::InvalidArgument, "CFL number must lie in (0, 1]");
  TimeReversalConfig cfg;
  cfg.n = n;
  cfg.cfl = cfl;
  cfg.terminal_time = kSqrt3 / c;
  const double h = 1.0 / static_cast<double>(n - 1);
  const double dt_max = cfl * h / (kSqrt3 * c);
  cfg.steps = static_cast<std::size_t>(std::ceil(cfg.terminal_time / dt_max - 1e-12));
  cfg.dt = cfg.terminal_time / static_cast<double>(cfg.steps);
  return cfg;
}

ScalarField3 time_reverse(const FaceSeries& data, const Acquisition& acq, const TimeReversalConfig& cfg, double margin,
                          TatReport* report) {
  const std::size_t n = cfg.n;
  check_data(data, acq, n);
  const double h = 1.0 / static_cast<double>(n - 1);
  require(cfg.steps > 0 && cfg.dt > 0.0, ErrorCode::InvalidArgument, "time reversal: empty configuration");
  require(acq.c * cfg.dt <= h / kSqrt3 * (1.0 + 1e-12), ErrorCode::InvalidArgument,
          "time reversal: step violates the CFL bound c dt <= h / sqrt(3)");
  require(std::abs(cfg.dt * static_cast<double>(cfg.steps) - cfg.terminal_time) <= 1e-9 * cfg.terminal_time,
          ErrorCode::InvalidArgument, "time reversal: steps * dt must equal the terminal time");

  const FaceSeries p = time_differentiate(data, acq.dt);
  const std::size_t m = acq.m;
  const double fscale = static_cast<double>(m - 1) / static_cast<double>(n - 1);

  ScalarField3 prev(n, kAllEven), cur(n, kAllEven), next(n, kAllEven);
  std::vector<double> face_now(m * m);

  // Dirichlet values at time t on every boundary node.
  auto set_boundary = [&](ScalarField3& f, double t) {
    const double x = t / acq.dt;
    for (int face = 0; face < 6; ++face) {
      for (std::size_t q = 0; q < m * m; ++q) face_now[q] = cubic_at(p.series(face * m * m + q), acq.n_t, x);
      const int a = face / 2, b = (a + 1) % 3, c = (a + 2) % 3;
      const int lo_ax = std::min(b, c), hi_ax = std::max(b, c);
      for (std::size_t i2 = 0; i2 < n; ++i2)
        for (std::size_t i1 = 0; i1 < n; ++i1) {
          // Bilinear interpolation from the m x m source grid.
          const double u1 = static_cast<double>(i1) * fscale, u2 = static_cast<double>(i2) * fscale;
          const std::size_t j1 = std::min(static_cast<std::size_t>(u1), m - 2), j2 = std::min(static_cast<std::size_t>(u2), m - 2);
          const double s1 = u1 - static_cast<double>(j1), s2 = u2 - static_cast<double>(j2);
          const double v = (1 - s1) * (1 - s2) * face_now[j1 + m * j2] + s1 * (1 - s2) * face_now[j1 + 1 + m * j2] +
                           (1 - s1) * s2 * face_now[j1 + m * (j2 + 1)] + s1 * s2 * face_now[j1 + 1 + m * (j2 + 1)];
          std::size_t idx[3];
          idx[a] = face % 2 ? n - 1 : 0;
          idx[lo_ax] = i1;
          idx[hi_ax] = i2;
          f(idx[0], idx[1], idx[2]) = v;
        }
    }
  };

  const double lam = (acq.c * cfg.dt / h) * (acq.c * cfg.dt / h);
  const std::size_t nn = n * n;
  set_boundary(prev, cfg.terminal_time + cfg.dt);
  set_boundary(cur, cfg.terminal_time);
  for (std::size_t s = cfg.steps; s-- > 0;) {
    const double* u = cur.values().data();
    const double* um = prev.values().data();
    double* out = next.values().data();
    for (std::size_t k = 1; k + 1 < n; ++k)
      for (std::size_t j = 1; j + 1 < n; ++j) {
        const std::size_t row = n * (j + n * k);
        for (std::size_t i = 1; i + 1 < n; ++i) {
          const std::size_t q = row + i;
          const double lap = u[q - 1] + u[q + 1] + u[q - n] + u[q + n] + u[q - nn] + u[q + nn] - 6.0 * u[q];
          out[q] = 2.0 * u[q] - um[q] + lam * lap;
        }
      }
    set_boundary(next, static_cast<double>(s) * cfg.dt);
    std::swap(prev, cur);
    std::swap(cur, next);
  }

  ScalarField3 result(n, kAllOdd);
  result.storage() = cur.storage();
  if (report) {
    report->backend = TatBackend::TimeReversal;
    report->n = n;
    report->steps = cfg.steps;
    report->solver_dt = cfg.dt;
  }
  apply_mask(result, margin, report);
  return result;
}

ScalarField3 series_inversion(const FaceSeries& data, const Acquisition& acq, std::size_t n, double margin,
                              int time_padding, TatReport* report) {
  check_data(data, acq, n);
  require(acq.m >= 3, ErrorCode::InvalidArgument, "series inversion needs m >= 3");
  require(time_padding >= 1, ErrorCode::InvalidArgument, "time padding must be at least 1");
  const std::size_t N = n - 1;
  const double omega_max = kPi * kSqrt3 * static_cast<double>(N - 1);
  require(omega_max * acq.c * acq.dt < kPi, ErrorCode::InvalidArgument,
          "series inversion: time step too coarse for the volume grid (need sqrt(3) (n-2) c dt < 1)");

  const std::size_t m = acq.m, mi = m - 2, n_t = acq.n_t;
  // Frequency grid: omega_p c dt = pi p / (P - 1).
  const int P = fft::good_size(static_cast<int>((n_t - 1) * static_cast<std::size_t>(time_padding))) + 1;
  const double freq_step = kPi / (static_cast<double>(P - 1) * acq.c * acq.dt);
  const std::size_t lmax_face = std::min(mi, N - 1);  // modes 1..lmax_face
  const double hf = 1.0 / static_cast<double>(m - 1);
  // Trapezoid in time and over the face; DST-I and DCT-I each double the sums.
  const double norm = acq.dt * 0.5 * hf * hf * 0.25;

  Spectrum3 spec;
  spec.n = n;
  spec.parity = kAllOdd;
  spec.coef.assign(n * n * n, 0.0);

  fft::RealBuffer face = fft::alloc_real(mi * mi * n_t);
  const std::size_t chunk = 64;
  fft::RealBuffer rows = fft::alloc_real(chunk * static_cast<std::size_t>(P));
  for (int f = 0; f < 6; ++f) {
    const int a = f / 2, b = (a + 1) % 3, c = (a + 2) % 3;
    const int lo_ax = std::min(b, c), hi_ax = std::max(b, c);
    // Layout (t, i_hi, i_lo) over interior face points, trapezoid-weighted in t.
    for (std::size_t i2 = 0; i2 < mi; ++i2)
      for (std::size_t i1 = 0; i1 < mi; ++i1) {
        const double* s = data.series(static_cast<std::size_t>(f) * m * m + (i1 + 1) + m * (i2 + 1));
        for (std::size_t t = 0; t < n_t; ++t) {
          const double w = (t == n_t - 1) ? 0.5 : 1.0;
          face[i1 + mi * (i2 + mi * t)] = w * s[t];
        }
      }
    fft::r2r_many({static_cast<int>(mi), static_cast<int>(mi)}, {FFTW_RODFT00, FFTW_RODFT00}, static_cast<int>(n_t),
                  face.get());

    std::vector<std::pair<std::size_t, std::size_t>> batch;
    auto flush = [&]() {
      if (batch.empty()) return;
      fft::r2r_rows(P, static_cast<int>(batch.size()), FFTW_REDFT00, rows.get());
      for (std::size_t r = 0; r < batch.size(); ++r) {
        const auto [l1, l2] = batch[r];
        const double* y = rows.get() + r * static_cast<std::size_t>(P);
        for (std::size_t la = 1; la < N; ++la) {
          const double lambda = kPi * std::sqrt(static_cast<double>(la * la + l1 * l1 + l2 * l2));
          const double g = norm * even_lagrange6(y, P, lambda / freq_step);
          const double dn = kPi * static_cast<double>(la) * (f % 2 ? (la % 2 ? -1.0 : 1.0) : -1.0);
          std::size_t idx[3];
          idx[a] = la;
          idx[lo_ax] = l1;
          idx[hi_ax] = l2;
          // Eigenfunction norm^2 = 1/8 on the unit cube.
          spec(idx[0], idx[1], idx[2]) += 8.0 * acq.c * acq.c * dn * g;
        }
      }
      batch.clear();
    };
    for (std::size_t l2 = 1; l2 <= lmax_face; ++l2)
      for (std::size_t l1 = 1; l1 <= lmax_face; ++l1) {
        double* row = rows.get() + batch.size() * static_cast<std::size_t>(P);
        const std::size_t src = (l1 - 1) + mi * (l2 - 1);
        row[0] = 2.0 * 0.5 * face[src];  // first sample: half weight, doubled for DCT-I
        for (std::size_t t = 1; t < n_t; ++t) row[t] = face[src + mi * mi * t];
        std::fill(row + n_t, row + P, 0.0);
        batch.emplace_back(l1, l2);
        if (batch.size() == chunk) flush();
      }
    flush();
  }

  ScalarField3 result = inverse_transform(spec);
  if (report) {
    report->backend = TatBackend::Series;
    report->n = n;
    report->steps = static_cast<std::size_t>(P);
    report->solver_dt = acq.dt;
  }
  apply_mask(result, margin, report);
  return result;
}

ScalarField3 invert_pair(const FaceSeries& data, const Acquisition& acq, std::size_t n, const TatOptions& opts,
                         TatReport* report) {
  if (opts.backend == TatBackend::Series) return series_inversion(data, acq, n, opts.margin, opts.time_padding, report);
  return time_reverse(data, acq, make_time_reversal_config(n, acq.c, opts.cfl), opts.margin, report);
}

VectorField3 assemble_curl(const ScalarField3& h1, const ScalarField3& h2, const ScalarField3& h3, double rho,
                           double b_abs, double c) {
  require(h1.n() == h2.n() && h2.n() == h3.n(), ErrorCode::GridMismatch, "assemble_curl: grid mismatch");
  require(rho > 0.0 && b_abs > 0.0 && c > 0.0, ErrorCode::InvalidArgument, "assemble_curl: rho, |B|, c must be positive");
  const double scale = rho / (c * b_abs);
  const ScalarField3* h[3] = {&h1, &h2, &h3};
  VectorField3 out = VectorField3::zeros_curl(h1.n());
  for (int a = 0; a < 3; ++a) {
    out[a] = ScalarField3(h1.n(), curl_parity(a), std::vector<double>(h[a]->values().begin(), h[a]->values().end()));
    out[a] *= scale;
    out[a].enforce_parity();
  }
  return out;
}

ScalarField3 complete_curl_two_directions(const ScalarField3& c1, const ScalarField3& c2) {
  require_same_grid(c1, c2, "complete_curl_two_directions");
  ScalarField3 d = partial(c1, 0) + partial(c2, 1);
  ScalarField3 c3 = antiderivative(d, 2);
  c3 *= -1.0;
  return c3;
}

std::array<VectorField3, 3> reconstruct_curls(const MeasurementSet& data, std::size_t n, const TatOptions& opts,
                                              std::array<TatReport, 9>* reports) {
  std::array<VectorField3, 3> curls;
  for (int k = 1; k <= 3; ++k) {
    std::array<ScalarField3, 3> h;
    for (int j = 1; j <= 3; ++j) {
      TatReport rep;
      h[j - 1] = invert_pair(data.pair(k, j), data.acq, n, opts, &rep);
      if (reports) (*reports)[static_cast<std::size_t>(3 * (k - 1) + (j - 1))] = rep;
    }
    curls[k - 1] = assemble_curl(h[0], h[1], h[2], data.acq.rho, data.acq.b_abs, data.acq.c);
  }
  return curls;
}

}  // namespace maet
