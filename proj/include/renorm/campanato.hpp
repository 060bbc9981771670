#pragma once

#include <array>
#include <string>
#include <vector>

#include "renorm/grid.hpp"
#include "renorm/orlicz.hpp"

namespace renorm {

/// Exponents of the monomials of degree <= d in graded order:
/// 1-D: 1, x, x², …; 2-D: 1, x, y, x², xy, y², ….
std::vector<std::array<int, 2>> monomial_exponents(int d, int dim);

/// Polynomial in the monomial basis centered at `center`: Σ c_β (x − center)^β.
struct PolyCoeffs {
  int degree = 0;
  int dim = 1;
  Point center{0.0, 0.0};
  std::vector<double> coeffs;

  /// Evaluates at the offset x − center (the caller resolves periodic wrap).
  double at_offset(const Point& offset) const;
};

/// L²(B)-orthogonal projection of g onto polynomials of degree <= d, solved by
/// QR in the radius-scaled monomial basis. Throws TooFewSamples or
/// SingularSystem (condition number above 1e12).
PolyCoeffs minimizing_polynomial(const GridFunction& g, const Ball& ball, int d);

/// Samples P at the ball's grid points (zero elsewhere).
GridFunction evaluate_on_ball(const PolyCoeffs& p, const Grid& grid, const Ball& ball);

struct PolySupBound {
  double sup_p = 0.0;
  double mean_abs_g = 0.0;
  double ratio = 0.0;
};

PolySupBound minimizing_poly_sup_bound(const GridFunction& g, const Ball& ball, int d);

/// Balls centered at grid nodes every `center_stride` samples per axis, with the given radii.
struct BallFamily {
  std::size_t center_stride = 0;
  std::vector<double> radii;

  /// Stride 2^{J−4} samples, radii 2h, 4h, …, L/2.
  static BallFamily standard(const Grid& grid);
};

enum class DualKind {
  CampanatoLocal,
  Lipschitz,
  Bmo,
  BmoPhi,
  BMOPhi,
  OrliczCampanatoLocal,
  OrliczCampanatoGlobal,
  BmoAlpha,
};

struct DualNormSpec {
  DualKind kind = DualKind::Bmo;
  double alpha = 0.0;  // Campanato / bmo^α exponent, or the Lipschitz exponent itself
  int r = 1;
  int d = 0;
  OrliczSpec orlicz = OrliczSpec::phi_p(0.5);
  BallFamily family;  // empty radii: use BallFamily::standard

  static DualNormSpec campanato_local(double alpha, int r, int d);
  static DualNormSpec lipschitz(double alpha);
  static DualNormSpec bmo();
  static DualNormSpec bmo_phi();
  static DualNormSpec BMO_phi();
  static DualNormSpec orlicz_campanato_local(const OrliczSpec& spec, int d);
  static DualNormSpec orlicz_campanato_global(const OrliczSpec& spec, int d);
  static DualNormSpec bmo_alpha(double alpha, int d);

  std::string tag() const;
};

/// Separate sups of the two-branch norms: `small` over balls with |B| < 1
/// (ℓ(B) < 1 for bmo^α), `large` over the rest. Single-branch kinds report
/// everything in `small`; for Lipschitz `small` is the difference-quotient sup
/// and `large` is ‖g‖∞.
struct DualBranches {
  double small = 0.0;
  double large = 0.0;
  double total() const { return small + large; }
};

DualBranches dual_norm_branches(const GridFunction& g, const DualNormSpec& spec);
double dual_norm(const GridFunction& g, const DualNormSpec& spec);

/// Difference-quotient sup of order ⌊α⌋+1 (the seminorm part of the Lipschitz norm).
double lipschitz_seminorm(const GridFunction& g, double alpha);

struct MultiplierReport {
  double lhs = 0.0;  // ‖g f‖_{Λ_{nα}}
  double rhs = 0.0;  // (‖g‖∞ + ‖g‖_{𝓛_loc^{Φ_p}}) ‖f‖_{Λ_{nα}}
  double ratio = 0.0;
};

/// α = 1/p − 1.
MultiplierReport multiplier_inequality_check(const GridFunction& g, const GridFunction& f, double p);

}  // namespace renorm
