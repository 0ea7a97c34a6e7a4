#pragma once

// Thin wrapper over FFTW: cached plans, aligned scratch buffers.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace maet::fft {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

RealBuffer alloc_real(std::size_t count);
ComplexBuffer alloc_complex(std::size_t count);

/// In-place real-to-real transform of a row-major array with the given dims
/// (slowest first). `data` must come from alloc_real.
void r2r(const std::vector<int>& dims, const std::vector<fftw_r2r_kind>& kinds, double* data);

/// `howmany` contiguous copies of the transform above, back to back.
void r2r_many(const std::vector<int>& dims, const std::vector<fftw_r2r_kind>& kinds, int howmany, double* data);

/// Batched 1-D real-to-real transform along contiguous rows of length `len`.
void r2r_rows(int len, int howmany, fftw_r2r_kind kind, double* data);

/// Unnormalized 3-D real-to-complex and complex-to-real transforms on a
/// row-major (d0, d1, d2) array; the complex array is (d0, d1, d2/2+1).
void r2c_3d(int d0, int d1, int d2, double* in, fftw_complex* out);
void c2r_3d(int d0, int d1, int d2, fftw_complex* in, double* out);

/// Smallest even integer >= n whose prime factors are all in {2,3,5,7}.
int good_size(int n);

}  // namespace maet::fft
