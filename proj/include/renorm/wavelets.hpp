#pragma once

#include <iosfwd>
#include <vector>

#include "renorm/grid.hpp"

namespace renorm {

/// Daubechies extremal-phase quadrature-mirror pair with d vanishing moments.
struct FilterPair {
  int d = 1;
  std::vector<double> lowpass;   // h, 2d taps
  std::vector<double> highpass;  // g[m] = (-1)^m h[2d-1-m]
  int support_length = 2;
  /// Dilation m with supp ψ_I ⊂ mI as balls: m = 2·support_length − 3 (the
  /// cube center to the far end of the support is (support_length − 3/2)·ℓ).
  double support_dilation = 1.0;
};

FilterPair build_filter(int d);

/// Species: 0 marks the father; 1..3 are the 2-D tensor species
/// (1,0), (0,1), (1,1). 1-D uses species 1 only.
constexpr int kFather = 0;

/// Coefficients of a periodized expansion on a grid, stored densely per level.
/// Level j holds (L·2^j)^dim positions; mothers exist for j0 <= j < J.
class WaveletExpansion {
 public:
  WaveletExpansion() = default;
  WaveletExpansion(const Grid& grid, int j0, int filter_length);

  const Grid& grid() const { return grid_; }
  int j0() const { return j0_; }
  int J() const { return grid_.J; }
  int species_count() const { return grid_.dim == 1 ? 1 : 3; }
  std::size_t positions(int j) const;

  std::vector<double>& father() { return father_; }
  const std::vector<double>& father() const { return father_; }
  std::vector<double>& mother(int j, int lambda);
  const std::vector<double>& mother(int j, int lambda) const;

  double coefficient(const DyadicCube& cube, int lambda) const;
  void set_coefficient(const DyadicCube& cube, int lambda, double value);

  /// True when the support of the basis function at (j, k) crosses the torus seam.
  bool wrapped(int j, std::size_t flat_k) const;
  void zero_wrapped_mothers();
  void zero_mothers();
  void zero_father();

  /// Set when the nonzero set was built to be small, as for corpus generators.
  bool finite = false;

  /// Throws MalformedExpansion if level bookkeeping is inconsistent.
  void validate() const;

 private:
  Grid grid_;
  int j0_ = 0;
  int filter_length_ = 2;
  std::vector<double> father_;
  std::vector<std::vector<double>> mothers_;  // index (j - j0) * species + (lambda - 1)
};

/// Coarsest admissible father scale for a grid: -log2(L) when L is a power of two, else 0.
int coarsest_scale(const Grid& grid);

WaveletExpansion forward(const GridFunction& f, int j0, const FilterPair& filter);
GridFunction inverse(const WaveletExpansion& w, const FilterPair& filter);

GridFunction project_Pj(const GridFunction& f, int j, const FilterPair& filter);
GridFunction project_Qj(const GridFunction& f, int j, const FilterPair& filter);

/// Approximation coefficients a_j for j0 <= j <= J (index j - j0), by partial synthesis.
std::vector<std::vector<double>> approximation_pyramid(const WaveletExpansion& w, const FilterPair& filter);

/// Synthesizes level-j data up to the finest grid. `approx` may be empty and any
/// entry of `details` (one per species) may be null; both mean zero.
GridFunction synthesize_level(const Grid& grid, int j, const std::vector<double>& approx,
                              const std::vector<const std::vector<double>*>& details, const FilterPair& filter);

/// Discretized φ_I (lambda == kFather) or ψ_I^λ on `grid`.
GridFunction basis_function(const Grid& grid, const DyadicCube& cube, int lambda, const FilterPair& filter);

/// Lines "j k [λ] value" sorted by (j, k); fathers use λ = 0.
void dump_coefficients(std::ostream& os, const WaveletExpansion& w, double threshold = 0.0);

}  // namespace renorm
