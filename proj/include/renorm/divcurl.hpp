#pragma once

#include <string>

#include "renorm/grid.hpp"
#include "renorm/maximal.hpp"

namespace renorm {

/// Two components on one 2-D grid.
class VectorField2D {
 public:
  VectorField2D() = default;
  VectorField2D(GridFunction f1, GridFunction f2);

  const Grid& grid() const { return f1_.grid(); }
  const GridFunction& operator[](int j) const { return j == 0 ? f1_ : f2_; }
  GridFunction& operator[](int j) { return j == 0 ? f1_ : f2_; }

 private:
  GridFunction f1_;
  GridFunction f2_;
};

/// Spectral multipliers on the torus. Axis j ∈ {0, 1} corresponds to x_{j+1}.
/// Odd multipliers vanish on the Nyquist line of their axis.

/// R_j f with multiplier −iξ_j/|ξ| and the zero mode sent to 0.
GridFunction riesz(int j, const GridFunction& f);
GridFunction derivative(int j, const GridFunction& f);
GridFunction divergence(const VectorField2D& F);
/// ∂₁F₂ − ∂₂F₁.
GridFunction curl2d(const VectorField2D& F);
VectorField2D gradient(const GridFunction& u);
/// ∇⊥v = (−∂₂v, ∂₁v).
VectorField2D perp_gradient(const GridFunction& v);
GridFunction dot(const VectorField2D& F, const VectorField2D& G);

/// curl(F − ψ∗F). Throws MomentCheckFailed unless ψ passes its discrete moment check.
GridFunction inhomogeneous_curl_residual(const VectorField2D& F, const Mollifier& psi);

enum class DivCurlMode { hp_times_lipschitz, h1_times_bmo };
std::string to_string(DivCurlMode mode);
DivCurlMode parse_divcurl_mode(const std::string& tag);

struct DivCurlReport {
  DivCurlMode mode = DivCurlMode::hp_times_lipschitz;
  double p = 1.0;
  double target = 0.0;  // ‖F·G‖ in h^{Φ_p}, or h_*^Φ with cubes of side 2
  double source = 0.0;  // (Σ‖F_i‖²)^{1/2} in h^p or h¹
  double dual = 0.0;    // (Σ‖G_i‖²)^{1/2} in Λ_{nα} or bmo
  double ratio = 0.0;
  /// sup|curl(F − ψ∗F)| and sup|div G|, each relative to the largest derivative a field of its size can have on the grid.
  double curl_residual = 0.0;
  double div_residual = 0.0;
  bool certified = true;
  /// Vector h^p (or h¹) norms of F − ψ∗F and ψ∗F.
  double rough_source = 0.0;
  double smooth_source = 0.0;
};

/// Relative residual below which the curl and divergence hypotheses count as met.
inline constexpr double kCertifyTolerance = 1e-9;

/// ψ is Mollifier::moment_killed(⌊nα⌋) with α = 1/p − 1 (0 in the h¹ × bmo mode).
/// Uncertified pairs are still evaluated; `certified` reports the outcome.
DivCurlReport divcurl_experiment(const VectorField2D& F, const VectorField2D& G, double p, DivCurlMode mode);

}  // namespace renorm
