#pragma once

#include <complex>
#include <vector>

#include "renorm/grid.hpp"

namespace renorm {

/// Half-spectrum of a real grid function (FFTW r2c layout: the last axis keeps
/// n/2+1 entries). Conjugate symmetry is implied by the layout.
struct SpectralField {
  Grid grid;
  std::vector<std::complex<double>> coeffs;
  /// Set when the zero mode was removed; transforms never set it themselves.
  bool zero_mode_removed = false;

  std::size_t last_axis() const { return grid.per_axis() / 2 + 1; }
  /// Signed integer wavenumber of index i on an axis of n samples.
  static long wavenumber(std::size_t i, std::size_t n) { return i <= n / 2 ? long(i) : long(i) - long(n); }
};

/// Unnormalized forward transform: c_k = Σ_x f(x) e^{-2πi k·x/L}.
SpectralField fft(const GridFunction& f);
/// Inverse of `fft` including the 1/N factor.
GridFunction ifft(const SpectralField& s);

/// Periodic convolution h^dim Σ_y f(y) k(x−y); the kernel is sampled at offsets
/// from index 0 (wrapped).
GridFunction convolve(const GridFunction& f, const GridFunction& kernel);
GridFunction convolve(const GridFunction& f, const SpectralField& kernel_hat);

}  // namespace renorm
