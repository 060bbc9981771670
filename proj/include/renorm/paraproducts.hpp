#pragma once

#include "renorm/wavelets.hpp"

namespace renorm {

enum class Variant { Inhomogeneous, Homogeneous };

const char* to_string(Variant v);

/// Father scale of each variant: 0 for the inhomogeneous system, -log2(L)
/// for the homogeneous one (which needs L to be a power of two).
int variant_j0(const Grid& grid, Variant v);

struct ParaproductResult {
  Variant variant = Variant::Inhomogeneous;
  GridFunction pi1, pi2, pi3, pi4;
  GridFunction pi3_1;  // same-scale mother pairs with (I,λ) ≠ (I',λ')
  GridFunction pi3_2;  // father off-diagonal at j0

  GridFunction sum() const { return pi1 + pi2 + pi3 + pi4; }
};

/// fg = Π1 + Π2 + Π3 + Π4 by level-wise telescoping from J down to j0.
/// Π4 carries the mother diagonal and the j0 father diagonal.
ParaproductResult renormalize(const GridFunction& f, const GridFunction& g, const FilterPair& filter, Variant variant);

/// Same, from expansions that share grid and j0.
ParaproductResult renormalize(const WaveletExpansion& wf, const WaveletExpansion& wg, const FilterPair& filter,
                              Variant variant);

struct Pi4Bound {
  double lhs = 0.0;  // ‖Π4(f,g)‖₁
  double rhs = 0.0;  // ‖f‖₂‖g‖₂
};

Pi4Bound pi4_l1_bound_check(const GridFunction& f, const GridFunction& g, const FilterPair& filter,
                            Variant variant = Variant::Inhomogeneous);

/// S = Π4 and T = Π1 + Π2 + Π3.
GridFunction S_operator(const GridFunction& f, const GridFunction& g, const FilterPair& filter, Variant variant);
GridFunction T_operator(const GridFunction& f, const GridFunction& g, const FilterPair& filter, Variant variant);

}  // namespace renorm
