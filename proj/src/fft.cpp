#include "fft.hpp"

#include <map>
#include <mutex>
#include <tuple>

#include "maet/error.hpp"

namespace maet::fft {

namespace {

// FFTW's planner is not thread-safe; execution of an existing plan on new
// arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

using R2RKey = std::tuple<std::vector<int>, std::vector<int>, int>;  // dims, kinds, howmany

struct PlanHolder {
  fftw_plan plan = nullptr;
  ~PlanHolder() {
    if (plan) fftw_destroy_plan(plan);
  }
};

std::size_t product(const std::vector<int>& dims) {
  std::size_t p = 1;
  for (int d : dims) p *= static_cast<std::size_t>(d);
  return p;
}

fftw_plan r2r_plan(const std::vector<int>& dims, const std::vector<fftw_r2r_kind>& kinds, int howmany) {
  static std::map<R2RKey, PlanHolder> cache;
  std::vector<int> kind_ints(kinds.begin(), kinds.end());
  R2RKey key{dims, kind_ints, howmany};
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second.plan;

  const std::size_t count = product(dims) * static_cast<std::size_t>(howmany);
  RealBuffer scratch = alloc_real(count);
  const int rank = static_cast<int>(dims.size());
  const int dist = static_cast<int>(product(dims));
  fftw_plan p = fftw_plan_many_r2r(rank, dims.data(), howmany, scratch.get(), nullptr, 1, dist,
                                   scratch.get(), nullptr, 1, dist, kinds.data(), FFTW_ESTIMATE);
  require(p != nullptr, ErrorCode::Internal, "FFTW failed to create a real-to-real plan");
  cache[key].plan = p;
  return p;
}

fftw_plan complex_plan(int d0, int d1, int d2, bool forward) {
  static std::map<std::tuple<int, int, int, bool>, PlanHolder> cache;
  auto key = std::make_tuple(d0, d1, d2, forward);
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second.plan;

  const std::size_t nreal = static_cast<std::size_t>(d0) * d1 * d2;
  const std::size_t ncplx = static_cast<std::size_t>(d0) * d1 * (d2 / 2 + 1);
  RealBuffer r = alloc_real(nreal);
  ComplexBuffer c = alloc_complex(ncplx);
  fftw_plan p = forward ? fftw_plan_dft_r2c_3d(d0, d1, d2, r.get(), c.get(), FFTW_ESTIMATE)
                        : fftw_plan_dft_c2r_3d(d0, d1, d2, c.get(), r.get(), FFTW_ESTIMATE);
  require(p != nullptr, ErrorCode::Internal, "FFTW failed to create a complex plan");
  cache[key].plan = p;
  return p;
}

}  // namespace

RealBuffer alloc_real(std::size_t count) {
  auto* p = static_cast<double*>(fftw_malloc(sizeof(double) * (count == 0 ? 1 : count)));
  require(p != nullptr, ErrorCode::Internal, "out of memory allocating FFT buffer");
  return RealBuffer(p);
}

ComplexBuffer alloc_complex(std::size_t count) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (count == 0 ? 1 : count)));
  require(p != nullptr, ErrorCode::Internal, "out of memory allocating FFT buffer");
  return ComplexBuffer(p);
}

void r2r(const std::vector<int>& dims, const std::vector<fftw_r2r_kind>& kinds, double* data) {
  fftw_execute_r2r(r2r_plan(dims, kinds, 1), data, data);
}

void r2r_many(const std::vector<int>& dims, const std::vector<fftw_r2r_kind>& kinds, int howmany, double* data) {
  fftw_execute_r2r(r2r_plan(dims, kinds, howmany), data, data);
}

void r2r_rows(int len, int howmany, fftw_r2r_kind kind, double* data) {
  fftw_execute_r2r(r2r_plan({len}, {kind}, howmany), data, data);
}

void r2c_3d(int d0, int d1, int d2, double* in, fftw_complex* out) {
  fftw_execute_dft_r2c(complex_plan(d0, d1, d2, true), in, out);
}

void c2r_3d(int d0, int d1, int d2, fftw_complex* in, double* out) {
  fftw_execute_dft_c2r(complex_plan(d0, d1, d2, false), in, out);
}

int good_size(int n) {
  for (int m = n + (n % 2);; m += 2) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace maet::fft
