#pragma once

#include <optional>
#include <string>

#include "renorm/grid.hpp"

namespace renorm {

enum class OrliczKind {
  PhiP,          // Φ_p(τ) = τ/(1+τ^{1−p})
  PhiLog,        // Φ(τ) = τ/log(e+τ)
  ThetaLog,      // θ(x,τ) = τ/(log(e+|x|)+log(e+τ))
  MusielakPhiP,  // φ_p(x,t) = t/(1+[t(1+|x|)^n]^{1−p}), log-corrected when n(1/p−1) ∈ ℕ
};

struct OrliczSpec {
  OrliczKind kind = OrliczKind::PhiP;
  double p = 0.5;
  int n = 1;
  /// Φ and θ have lower type q for every q < 1; the stored value 1 is that supremum.
  double lower_type = 0.5;
  double upper_type = 1.0;

  static OrliczSpec phi_p(double p);
  static OrliczSpec phi_log();
  static OrliczSpec theta_log();
  static OrliczSpec musielak_phi_p(double p, int n);

  bool musielak() const { return kind == OrliczKind::ThetaLog || kind == OrliczKind::MusielakPhiP; }
  /// True when the φ_p log branch is active, i.e. n(1/p−1) is an integer within 1e−12.
  bool log_branch() const;
  std::string name() const;
};

/// Growth function value. `x` is required exactly for the Musielak kinds.
double evaluate(const OrliczSpec& spec, std::optional<Point> x, double tau);

/// inf{λ > 0 : ∫Φ(x, |f(x)|/λ) dx ≤ 1}, solved for log λ by bracketing (TOMS 748).
double luxemburg_norm(const GridFunction& f, const OrliczSpec& spec, double rel_tol = 1e-12);

/// Luxemburg norm of the indicator of a set of measure `measure` for an
/// x-independent growth function: the λ solving measure·Φ(1/λ) = 1.
double indicator_norm(const OrliczSpec& spec, double measure);

/// Σ_k ‖f·1_{Q_k}‖ over the cubes Q_k = side·k + [0, side)^dim tiling the torus.
double star_norm(const GridFunction& f, const OrliczSpec& spec, int cube_side = 1);

}  // namespace renorm
