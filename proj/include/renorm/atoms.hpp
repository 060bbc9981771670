#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "renorm/grid.hpp"
#include "renorm/maximal.hpp"

namespace renorm {

/// local(p, r, d): moments through order d only when |B| < 1.
/// global(p, r, l): moments through order l on every ball.
/// r may be +infinity.
struct AtomKind {
  bool global = false;
  double p = 1.0;
  double r = 2.0;
  int d = 0;

  static AtomKind local(double p, double r, int d) { return {false, p, r, d}; }
  static AtomKind global_atom(double p, double r, int l) { return {true, p, r, l}; }
  std::string tag() const;
};

struct MomentCheck {
  std::array<int, 2> beta{0, 0};
  double value = 0.0;  // ∫ a(x) (x − c_B)^β dx
  double tolerance = 0.0;
  bool pass = true;
};

struct AtomReport {
  AtomKind kind;
  Ball support_ball;
  bool support_ok = true;
  double outside_sup = 0.0;
  bool size_ok = true;
  double size = 0.0;        // ‖a‖_{L^r}
  double size_bound = 0.0;  // |B|^{1/r − 1/p}
  bool moments_required = false;
  std::vector<MomentCheck> moments;
  bool overall = true;
};

/// Discrete moments ∫ a(x)(x − center)^β dx for |β| <= d, offsets taken periodically.
std::vector<MomentCheck> discrete_moments(const GridFunction& a, const Point& center, int d);

/// Support (samples outside B at most 1e−12), size (1e−9 relative slack) and
/// moments |∫a·(x−c)^β| <= (1e−7·‖a‖₁ + 64ε·|B|^{1−1/p})·r_B^{|β|}.
AtomReport validate_atom(const GridFunction& a, const Ball& ball, const AtomKind& kind);

/// a·P_B^s g on B. Throws SupportViolation if a does not vanish outside B.
GridFunction atom_poly_product(const GridFunction& a, const Ball& ball, const GridFunction& g, int s);

/// One function h_i^k of the decomposition, stored sparsely.
struct CZPiece {
  int k = 0;
  int i = 0;
  Ball ball;
  /// Whitney interval [first, first + length) in sample indices (periodic).
  std::size_t cube_first = 0;
  std::size_t cube_length = 0;
  std::vector<std::size_t> index;
  std::vector<double> values;
  bool moments_subtracted = false;
  std::vector<MomentCheck> moments;

  GridFunction dense(const Grid& grid) const;
  double sup() const;
};

struct KRange {
  int k_min = 0;
  int k_max = 0;
};

struct CZOptions {
  /// Use the global grand maximal. Every cube has its polynomial part removed
  /// except, in the local mode, a level set covering the whole torus.
  bool global = false;
  GrandOptions grand{};
};

struct CZDecomposition {
  std::vector<CZPiece> pieces;
  KRange range;
  /// m_N(f) (local) or M_N(f) (global) with N = ⌊2n/p + 1⌋.
  GridFunction maximal;
  /// max ‖h_i^k‖∞ / 2^k over all pieces.
  double C = 0.0;
  /// Largest number of piece supports meeting one sample within a level.
  int max_overlap = 0;
  /// f − Σ h_i^k.
  GridFunction remainder;
};

int grand_order(double p, int dim);

/// Grid-scale Calderón–Zygmund decomposition f = Σ_{k,i} h_i^k + remainder (1-D).
/// Level sets are {maximal > 2^k}; each is covered by maximal dyadic intervals
/// at distance at least their length from the complement, with single cells
/// filling the boundary layer. Without `range`, k_max is the last level with a
/// nonempty set and k_min is the last level containing every sample (but at
/// most 40 levels down); the bottom level then covers the whole torus and the
/// remainder vanishes in the local mode.
CZDecomposition cz_decompose(const GridFunction& f, double p, int d, std::optional<KRange> range = std::nullopt,
                             const CZOptions& opts = {});

struct AtomTerm {
  double lambda = 0.0;
  std::size_t piece = 0;
  AtomReport report;
};

struct StructureSplit {
  GridFunction f0;  // h¹ part
  GridFunction f1;  // hᵖ part
  std::vector<AtomTerm> atoms0;
  std::vector<AtomTerm> atoms1;
  /// true: piece went to I₀.
  std::vector<bool> in_I0;
  double lambda0_sum = 0.0;  // Σ|λ⁽⁰⁾|
  double lambda1_p = 0.0;    // (Σ|λ⁽¹⁾|^p)^{1/p}
  CZDecomposition cz;
};

/// Splits f = f0 + f1 using E = {m_N(f) < 1}: a piece goes to I₀ when at least
/// half of its Whitney interval lies in E. Pieces become atoms with
/// λ⁽⁰⁾ = C·2^k|B| and λ⁽¹⁾ = C·2^k|B|^{1/p}. Callers normalize f first if the
/// threshold is meant relative to ‖f‖_{h^{Φ_p}}.
StructureSplit structure_split(const GridFunction& f, double p, const CZOptions& opts = {});

}  // namespace renorm
