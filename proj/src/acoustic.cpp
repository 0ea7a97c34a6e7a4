#include "maet/acoustic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "byte_order.hpp"
#include "fft.hpp"

namespace maet {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt3 = std::sqrt(3.0);

struct Box {
  std::size_t lo[3], hi[3];  // inclusive node range of the support
  bool empty = true;
};

Box support_box(const ScalarField3& h) {
  const std::size_t n = h.n();
  const double thresh = 1e-12 * max_abs(h);
  Box b;
  for (int a = 0; a < 3; ++a) {
    b.lo[a] = n;
    b.hi[a] = 0;
  }
  if (thresh == 0.0) return b;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(h(i, j, k)) <= thresh) continue;
        const std::size_t idx[3] = {i, j, k};
        for (int a = 0; a < 3; ++a) {
          b.lo[a] = std::min(b.lo[a], idx[a]);
          b.hi[a] = std::max(b.hi[a], idx[a]);
        }
        b.empty = false;
      }
  return b;
}

// Upper bound on the distance from any boundary point of the cube to any
// point of the box; both sets are convex so the maximum sits at vertices.
double max_reach(const double lo[3], const double hi[3]) {
  double best = 0.0;
  for (int cube = 0; cube < 8; ++cube)
    for (int corner = 0; corner < 8; ++corner) {
      double d2 = 0.0;
      for (int a = 0; a < 3; ++a) {
        const double y = (cube >> a) & 1 ? 1.0 : 0.0;
        const double x = (corner >> a) & 1 ? hi[a] : lo[a];
        d2 += (x - y) * (x - y);
      }
      best = std::max(best, std::sqrt(d2));
    }
  return best;
}

// Four-point Lagrange weights at offset t in [0,1) for nodes -1, 0, 1, 2.
void cubic_weights(double t, double w[4]) {
  w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
  w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
  w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
}

// Tricubic Lagrange interpolation of h extended by zero outside the cube.
double tricubic(const ScalarField3& f, double x, double y, double z) {
  if (x < 0.0 || y < 0.0 || z < 0.0 || x > 1.0 || y > 1.0 || z > 1.0) return 0.0;
  const std::size_t n = f.n();
  const double N = static_cast<double>(n - 1);
  const double p[3] = {x * N, y * N, z * N};
  long i0[3];
  double w[3][4];
  for (int a = 0; a < 3; ++a) {
    i0[a] = std::min(static_cast<long>(p[a]), static_cast<long>(n) - 2);
    cubic_weights(p[a] - static_cast<double>(i0[a]), w[a]);
  }
  const long nn = static_cast<long>(n);
  double v = 0.0;
  for (int c = 0; c < 4; ++c) {
    const long k = i0[2] + c - 1;
    if (k < 0 || k >= nn) continue;
    for (int b = 0; b < 4; ++b) {
      const long j = i0[1] + b - 1;
      if (j < 0 || j >= nn) continue;
      double row = 0.0;
      for (int a = 0; a < 4; ++a) {
        const long i = i0[0] + a - 1;
        if (i < 0 || i >= nn) continue;
        row += w[0][a] * f(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k));
      }
      v += w[1][b] * w[2][c] * row;
    }
  }
  return v;
}

void require_pair_indices(int k, int j) {
  require(k >= 1 && k <= 3 && j >= 1 && j <= 3, ErrorCode::InvalidArgument, "pair indices must lie in 1..3");
}

FaceSeries synthesize_quadrature(const ScalarField3& h, const Acquisition& acq, const SynthesisOptions& opts) {
  require(!opts.time_derivative, ErrorCode::InvalidArgument,
          "the quadrature backend does not produce time derivatives");
  FaceSeries out(acq.m, acq.n_t);
  const Box box = support_box(h);
  if (box.empty) return out;
  // The tricubic stencil reaches two nodes past the support.
  const double dx = h.spacing();
  double lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    lo[a] = static_cast<double>(box.lo[a]) * dx - 2.0 * dx;
    hi[a] = static_cast<double>(box.hi[a]) * dx + 2.0 * dx;
  }
  const double scale = acq.b_abs / acq.rho;
  for (int f = 0; f < 6; ++f)
    for (std::size_t p = 0; p < acq.m * acq.m; ++p) {
      const auto y = face_point(f, p, acq.m);
      double near2 = 0.0, far2 = 0.0;
      for (int a = 0; a < 3; ++a) {
        const double g = std::max({lo[a] - y[a], 0.0, y[a] - hi[a]});
        const double e = std::max(std::abs(y[a] - lo[a]), std::abs(y[a] - hi[a]));
        near2 += g * g;
        far2 += e * e;
      }
      const double r_near = std::sqrt(near2), r_far = std::sqrt(far2);
      for (std::size_t s = 1; s < acq.n_t; ++s) {
        const double r = acq.c * static_cast<double>(s) * acq.dt;
        if (r > r_far) break;
        if (r < r_near) continue;
        out.at(f, p, s) = scale * r * spherical_mean(h, y, r, opts.oversampling);
      }
    }
  return out;
}

FaceSeries synthesize_spectral(const ScalarField3& h, const Acquisition& acq, const SynthesisOptions& opts) {
  const std::size_t n = h.n();
  require((n - 1) % (acq.m - 1) == 0, ErrorCode::InvalidArgument,
          "spectral synthesis needs face points on grid nodes: (m-1) must divide (n-1)");
  FaceSeries out(acq.m, acq.n_t);
  const Box box = support_box(h);
  if (box.empty) return out;

  const double dx = h.spacing();
  double lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    lo[a] = static_cast<double>(box.lo[a]) * dx;
    hi[a] = static_cast<double>(box.hi[a]) * dx;
  }
  // Beyond r_cut every sphere misses the support and M vanishes exactly.
  const double r_cut = max_reach(lo, hi) + dx;
  int K[3];
  for (int a = 0; a < 3; ++a) {
    const double period = r_cut + std::max(1.0 - lo[a], hi[a]) + 2.0 * dx;
    K[a] = fft::good_size(std::max(static_cast<int>(std::ceil(period / dx)), static_cast<int>(n)));
  }
  // FFTW row-major dims: (z, y, x).
  const int d0 = K[2], d1 = K[1], d2 = K[0];
  const std::size_t nreal = static_cast<std::size_t>(d0) * d1 * d2;
  const int d2c = d2 / 2 + 1;
  const std::size_t ncplx = static_cast<std::size_t>(d0) * d1 * d2c;

  fft::RealBuffer real = fft::alloc_real(nreal);
  std::fill(real.get(), real.get() + nreal, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) real[i + d2 * (j + static_cast<std::size_t>(d1) * k)] = h(i, j, k);
  fft::ComplexBuffer hhat = fft::alloc_complex(ncplx);
  fft::r2c_3d(d0, d1, d2, real.get(), hhat.get());

  // Per mode: omega, the one-step rotation, and the running (cos, sin).
  std::vector<double> omega(ncplx), rot_c(ncplx), rot_s(ncplx), cs(ncplx, 1.0), sn(ncplx, 0.0);
  const double L[3] = {K[0] * dx, K[1] * dx, K[2] * dx};
  for (int iz = 0; iz < d0; ++iz) {
    const int fz = iz <= d0 / 2 ? iz : iz - d0;
    for (int iy = 0; iy < d1; ++iy) {
      const int fy = iy <= d1 / 2 ? iy : iy - d1;
      for (int ix = 0; ix < d2c; ++ix) {
        const double kx = 2 * kPi * ix / L[0], ky = 2 * kPi * fy / L[1], kz = 2 * kPi * fz / L[2];
        const std::size_t idx = static_cast<std::size_t>(ix) + d2c * (static_cast<std::size_t>(iy) + d1 * static_cast<std::size_t>(iz));
        omega[idx] = acq.c * std::sqrt(kx * kx + ky * ky + kz * kz);
        rot_c[idx] = std::cos(omega[idx] * acq.dt);
        rot_s[idx] = std::sin(omega[idx] * acq.dt);
      }
    }
  }

  const double scale = (acq.c / acq.rho) * acq.b_abs / static_cast<double>(nreal);
  const std::size_t stride = (n - 1) / (acq.m - 1);
  fft::ComplexBuffer work = fft::alloc_complex(ncplx);
  const std::size_t last = std::min<std::size_t>(acq.n_t - 1, static_cast<std::size_t>(std::ceil(r_cut / (acq.c * acq.dt))));
  for (std::size_t s = 0; s <= last; ++s) {
    const double t = static_cast<double>(s) * acq.dt;
    if (s > 0)
      for (std::size_t q = 0; q < ncplx; ++q) {
        const double c0 = cs[q], s0 = sn[q];
        cs[q] = c0 * rot_c[q] - s0 * rot_s[q];
        sn[q] = s0 * rot_c[q] + c0 * rot_s[q];
      }
    for (std::size_t q = 0; q < ncplx; ++q) {
      double g;
      if (opts.time_derivative)
        g = cs[q];
      else
        g = omega[q] > 0.0 ? sn[q] / omega[q] : t;
      work[q][0] = hhat[q][0] * g;
      work[q][1] = hhat[q][1] * g;
    }
    fft::c2r_3d(d0, d1, d2, work.get(), real.get());
    for (int f = 0; f < 6; ++f) {
      const int a = f / 2, b = (a + 1) % 3, c = (a + 2) % 3;
      const int lo_ax = std::min(b, c), hi_ax = std::max(b, c);
      for (std::size_t i2 = 0; i2 < acq.m; ++i2)
        for (std::size_t i1 = 0; i1 < acq.m; ++i1) {
          std::size_t idx[3];
          idx[a] = (f % 2) ? n - 1 : 0;
          idx[lo_ax] = i1 * stride;
          idx[hi_ax] = i2 * stride;
          const double u = real[idx[0] + d2 * (idx[1] + static_cast<std::size_t>(d1) * idx[2])];
          out.at(f, i1 + acq.m * i2, s) = scale * u;
        }
    }
  }
  if (!opts.time_derivative)
    for (std::size_t p = 0; p < out.series_count(); ++p) out.series(p)[0] = 0.0;
  return out;
}

}  // namespace

Acquisition default_acquisition(std::size_t n, double c) {
  require(n >= 3 && c > 0.0, ErrorCode::InvalidArgument, "default_acquisition: need n >= 3 and c > 0");
  Acquisition acq;
  acq.m = n;
  acq.c = c;
  acq.dt = 1.0 / (static_cast<double>(n - 1) * 2.0 * c);
  acq.n_t = static_cast<std::size_t>(std::ceil(kSqrt3 / (c * acq.dt) - 1e-9)) + 1;
  return acq;
}

void validate_acquisition(const Acquisition& acq, std::size_t n) {
  require(acq.m >= 2 && acq.m <= n, ErrorCode::InvalidArgument, "face grid m must lie in [2, n]");
  require(acq.dt > 0.0 && acq.c > 0.0 && acq.rho > 0.0 && acq.b_abs > 0.0, ErrorCode::InvalidArgument,
          "dt, c, rho and |B| must be positive");
  require(static_cast<double>(acq.n_t) * acq.dt * acq.c >= kSqrt3, ErrorCode::InvalidArgument,
          "incomplete data: n_t * dt * c must cover sqrt(3)");
}

std::array<double, 3> face_point(int face, std::size_t point, std::size_t m) {
  require(face >= 0 && face < 6 && point < m * m, ErrorCode::InvalidArgument, "face point out of range");
  const int a = face / 2, b = (a + 1) % 3, c = (a + 2) % 3;
  const int lo_ax = std::min(b, c), hi_ax = std::max(b, c);
  const double step = 1.0 / static_cast<double>(m - 1);
  std::array<double, 3> y{};
  y[a] = face % 2 ? 1.0 : 0.0;
  y[lo_ax] = static_cast<double>(point % m) * step;
  y[hi_ax] = static_cast<double>(point / m) * step;
  return y;
}

std::size_t MeasurementSet::sample_count() const {
  std::size_t s = 0;
  for (const auto& p : pairs) s += p.data.size();
  return s;
}

double spherical_mean(const ScalarField3& h, const std::array<double, 3>& center, double r, double oversampling) {
  require(r > 0.0, ErrorCode::InvalidArgument, "spherical_mean: radius must be positive");
  require(oversampling > 0.0, ErrorCode::InvalidArgument, "spherical_mean: oversampling must be positive");
  const double dx = h.spacing();
  const std::size_t count =
      std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(4.0 * kPi * (r / dx) * (r / dx) * oversampling)));
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  double sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    sum += tricubic(h, center[0] + r * rho * std::cos(phi), center[1] + r * rho * std::sin(phi), center[2] + r * z);
  }
  return sum / static_cast<double>(count);
}

FaceSeries synthesize_pair(const ScalarField3& h, const Acquisition& acq, const SynthesisOptions& opts) {
  validate_acquisition(acq, h.n());
  require(h.all_finite(), ErrorCode::InvalidArgument, "synthesize: non-finite initial field");
  return opts.backend == SynthesisBackend::Spectral ? synthesize_spectral(h, acq, opts)
                                                    : synthesize_quadrature(h, acq, opts);
}

MeasurementSet synthesize(const LeadSystem& leads, const Acquisition& acq, const SynthesisOptions& opts) {
  const std::size_t n = leads.curl[0].n();
  for (const auto& c : leads.curl)
    for (int a = 0; a < 3; ++a) require(c[a].n() == n, ErrorCode::GridMismatch, "synthesize: curl resolution mismatch");
  validate_acquisition(acq, n);
  MeasurementSet ms;
  ms.n = n;
  ms.acq = acq;
  for (int k = 1; k <= 3; ++k)
    for (int j = 1; j <= 3; ++j) ms.pair(k, j) = synthesize_pair(leads.curl[k - 1][j - 1], acq, opts);
  return ms;
}

std::uint64_t series_seed(std::uint64_t master, std::uint64_t series_index) {
  // splitmix64 finalizer
  std::uint64_t z = master ^ (series_index + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

MeasurementSet add_noise(const MeasurementSet& data, double level, std::uint64_t seed) {
  require(level >= 0.0 && std::isfinite(level), ErrorCode::InvalidArgument, "noise level must be non-negative");
  MeasurementSet out = data;
  out.noise = NoiseRecord{level, seed};
  if (level == 0.0) return out;
  std::vector<double> noise;
  std::uint64_t index = 0;
  for (auto& pair : out.pairs) {
    noise.resize(pair.n_t);
    for (std::size_t s = 0; s < pair.series_count(); ++s, ++index) {
      double* x = pair.series(s);
      double signal = 0.0;
      for (std::size_t t = 0; t < pair.n_t; ++t) signal += x[t] * x[t];
      if (signal == 0.0) continue;
      std::mt19937_64 gen(series_seed(seed, index));
      double energy = 0.0;
      for (double& v : noise) {
        // 53 random bits -> [0,1) -> [-1,1); avoids implementation-defined distributions.
        v = 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
        energy += v * v;
      }
      if (energy == 0.0) continue;
      const double scale = level * std::sqrt(signal / energy);
      for (std::size_t t = 0; t < pair.n_t; ++t) x[t] += scale * noise[t];
    }
  }
  return out;
}

std::vector<std::filesystem::path> save_measurements(const MeasurementSet& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json j;
  j["format"] = "maet-measurements";
  j["version"] = 1;
  j["n"] = data.n;
  j["m"] = data.acq.m;
  j["n_t"] = data.acq.n_t;
  j["dt"] = data.acq.dt;
  j["c"] = data.acq.c;
  j["rho"] = data.acq.rho;
  j["b_abs"] = data.acq.b_abs;
  if (data.noise)
    j["noise"] = {{"level", data.noise->level}, {"seed", data.noise->seed}};
  else
    j["noise"] = nullptr;
  j["layout"] = "float64 little-endian; face-major (face = 2*axis + side), point-major (m x m, lower axis fastest), time-minor";
  std::vector<std::filesystem::path> written;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (int k = 1; k <= 3; ++k)
    for (int jj = 1; jj <= 3; ++jj) {
      const std::string name = "series_k" + std::to_string(k) + "_j" + std::to_string(jj) + ".bin";
      const FaceSeries& fs = data.pair(k, jj);
      require(fs.m == data.acq.m && fs.n_t == data.acq.n_t, ErrorCode::Internal, "series shape mismatch");
      std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
      require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + (dir / name).string());
      io::write_f64_le(out, fs.data);
      require(static_cast<bool>(out), ErrorCode::Io, "write failed for " + (dir / name).string());
      files.push_back({{"k", k}, {"j", jj}, {"file", name}});
      written.push_back(dir / name);
    }
  j["files"] = files;
  std::ofstream mf(dir / "manifest.json", std::ios::trunc);
  require(static_cast<bool>(mf), ErrorCode::Io, "cannot write measurement manifest");
  mf << j.dump(2) << "\n";
  written.push_back(dir / "manifest.json");
  return written;
}

MeasurementSet load_measurements(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  require(static_cast<bool>(mf), ErrorCode::Io, "no manifest.json in " + dir.string());
  nlohmann::json j;
  try {
    mf >> j;
  } catch (const std::exception& e) {
    fail(ErrorCode::Io, std::string("malformed measurement manifest: ") + e.what());
  }
  require(j.value("format", "") == "maet-measurements", ErrorCode::Io, "not a measurement directory");
  MeasurementSet ms;
  try {
    ms.n = j.at("n").get<std::size_t>();
    ms.acq.m = j.at("m").get<std::size_t>();
    ms.acq.n_t = j.at("n_t").get<std::size_t>();
    ms.acq.dt = j.at("dt").get<double>();
    ms.acq.c = j.at("c").get<double>();
    ms.acq.rho = j.at("rho").get<double>();
    ms.acq.b_abs = j.at("b_abs").get<double>();
    if (!j.at("noise").is_null())
      ms.noise = NoiseRecord{j["noise"].at("level").get<double>(), j["noise"].at("seed").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Io, std::string("measurement manifest: ") + e.what());
  }
  validate_acquisition(ms.acq, ms.n);
  for (int k = 1; k <= 3; ++k)
    for (int jj = 1; jj <= 3; ++jj) {
      require_pair_indices(k, jj);
      const auto path = dir / ("series_k" + std::to_string(k) + "_j" + std::to_string(jj) + ".bin");
      std::ifstream in(path, std::ios::binary);
      require(static_cast<bool>(in), ErrorCode::Io, "missing " + path.string());
      FaceSeries fs(ms.acq.m, ms.acq.n_t);
      io::read_f64_le(in, fs.data);
      require(static_cast<bool>(in) && in.peek() == std::char_traits<char>::eof(), ErrorCode::Io,
              "series file has the wrong size: " + path.string());
      ms.pair(k, jj) = std::move(fs);
    }
  return ms;
}

}  // namespace maet
