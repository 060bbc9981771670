#include "renorm/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace renorm {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex planner_mutex;

struct Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

const Plans& plans_for(const Grid& grid) {
  static std::map<std::tuple<int, int, int>, Plans> cache;
  std::lock_guard<std::mutex> lock(planner_mutex);
  auto key = std::make_tuple(grid.dim, grid.J, grid.L);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const int n = int(grid.per_axis());
  const std::size_t real_size = grid.size();
  const std::size_t complex_size = (grid.dim == 1 ? 1 : grid.per_axis()) * (grid.per_axis() / 2 + 1);
  double* r = fftw_alloc_real(real_size);
  fftw_complex* c = fftw_alloc_complex(complex_size);
  Plans p;
  if (grid.dim == 1) {
    p.r2c = fftw_plan_dft_r2c_1d(n, r, c, FFTW_ESTIMATE);
    p.c2r = fftw_plan_dft_c2r_1d(n, c, r, FFTW_ESTIMATE);
  } else {
    p.r2c = fftw_plan_dft_r2c_2d(n, n, r, c, FFTW_ESTIMATE);
    p.c2r = fftw_plan_dft_c2r_2d(n, n, c, r, FFTW_ESTIMATE);
  }
  fftw_free(r);
  fftw_free(c);
  return cache.emplace(key, p).first->second;
}

struct RealBuffer {
  explicit RealBuffer(std::size_t n) : ptr(fftw_alloc_real(n)) {}
  ~RealBuffer() { fftw_free(ptr); }
  RealBuffer(const RealBuffer&) = delete;
  RealBuffer& operator=(const RealBuffer&) = delete;
  double* ptr;
};

struct ComplexBuffer {
  explicit ComplexBuffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {}
  ~ComplexBuffer() { fftw_free(ptr); }
  ComplexBuffer(const ComplexBuffer&) = delete;
  ComplexBuffer& operator=(const ComplexBuffer&) = delete;
  fftw_complex* ptr;
};

}  // namespace

SpectralField fft(const GridFunction& f) {
  const Grid& grid = f.grid();
  const Plans& p = plans_for(grid);
  SpectralField s;
  s.grid = grid;
  const std::size_t csize = (grid.dim == 1 ? 1 : grid.per_axis()) * s.last_axis();
  RealBuffer in(grid.size());
  ComplexBuffer out(csize);
  std::copy(f.data().begin(), f.data().end(), in.ptr);
  fftw_execute_dft_r2c(p.r2c, in.ptr, out.ptr);
  s.coeffs.resize(csize);
  for (std::size_t i = 0; i < csize; ++i) s.coeffs[i] = {out.ptr[i][0], out.ptr[i][1]};
  return s;
}

GridFunction ifft(const SpectralField& s) {
  const Grid& grid = s.grid;
  const Plans& p = plans_for(grid);
  const std::size_t csize = s.coeffs.size();
  ComplexBuffer in(csize);
  RealBuffer out(grid.size());
  for (std::size_t i = 0; i < csize; ++i) {
    in.ptr[i][0] = s.coeffs[i].real();
    in.ptr[i][1] = s.coeffs[i].imag();
  }
  fftw_execute_dft_c2r(p.c2r, in.ptr, out.ptr);  // destroys `in`, which is a private copy
  GridFunction f(grid);
  const double inv = 1.0 / double(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = out.ptr[i] * inv;
  return f;
}

GridFunction convolve(const GridFunction& f, const SpectralField& kernel_hat) {
  if (!(f.grid() == kernel_hat.grid)) throw Error(ErrorKind::GridMismatch, "kernel spectrum on a different grid");
  SpectralField s = fft(f);
  const double cell = f.grid().cell_volume();
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) s.coeffs[i] *= kernel_hat.coeffs[i] * cell;
  return ifft(s);
}

GridFunction convolve(const GridFunction& f, const GridFunction& kernel) {
  require_same_grid(f, kernel);
  return convolve(f, fft(kernel));
}

}  // namespace renorm
