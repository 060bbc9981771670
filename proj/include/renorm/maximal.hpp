#pragma once

#include <string>
#include <vector>

#include "renorm/grid.hpp"
#include "renorm/orlicz.hpp"

namespace renorm {

/// Centered-at-`shift` B-spline of the given order (1 = box … 4 = cubic),
/// scaled to support radius `radius` and unit mass.
struct BSplineComponent {
  int order = 4;
  double radius = 1.0;
  double shift = 0.0;
  double coeff = 1.0;
};

double bspline_profile(int order, double radius, double shift, double x);

/// Linear combination of unit-mass B-splines. In 2-D the kernel is the tensor
/// product of the 1-D profile with itself.
class Mollifier {
 public:
  /// Normalized cubic B-spline with support radius 1; the norm-defining mollifier.
  static Mollifier bump();
  /// Mass one with vanishing moments of orders 1..r, built from cubic bumps at
  /// radii base·2^m. Coefficients are re-solved on each grid so the discrete
  /// moments vanish too.
  static Mollifier moment_killed(int r, double base_radius = 0.25);
  static Mollifier bspline(int order, double radius, double shift = 0.0);
  static Mollifier combination(std::vector<BSplineComponent> components, int moment_order = -1);

  const std::vector<BSplineComponent>& components() const { return components_; }
  /// Continuum mass of the 1-D profile.
  double mass() const;
  /// Order r through which moments vanish by construction; -1 if none are claimed.
  int moment_order() const { return moment_order_; }
  bool moment_killed() const { return moment_killed_; }
  double support_radius() const;
  double profile(double x) const;

  /// Periodized samples of φ_s(x) = s^{-dim} φ(x/s) at offsets from index 0.
  /// Each component is normalized to unit discrete mass, so the kernel's
  /// discrete mass is (Σ coeff)^dim exactly.
  GridFunction kernel(const Grid& grid, double s) const;

  /// Discrete moments h^dim Σ x^β k(x) of `kernel(grid, 1)` along axis 0.
  std::vector<double> discrete_moments(const Grid& grid, int max_order) const;

 private:
  std::vector<BSplineComponent> components_;
  int moment_order_ = -1;
  bool moment_killed_ = false;
  double base_radius_ = 0.25;
};

enum class MaximalKind { Local, Global, GrandLocal, GrandGlobal };

struct MaximalProfile {
  GridFunction values;
  std::vector<double> scales;
  MaximalKind kind = MaximalKind::Local;
};

/// Dyadic scales 2^{-j}: j = 1..J for local kinds, plus j = -log2(L)..0 for global ones.
std::vector<double> dyadic_scales(const Grid& grid, bool global);

MaximalProfile radial_maximal(const GridFunction& f, const Mollifier& phi, MaximalKind kind);
MaximalProfile radial_maximal(const GridFunction& f, const Mollifier& phi, const std::vector<double>& scales,
                              MaximalKind kind = MaximalKind::Local);

struct GrandOptions {
  int dictionary_size = 8;
  bool spatial_sup = true;
};

/// Dictionary of test profiles for m_N / M_N. Member 0 is Mollifier::bump().
std::vector<Mollifier> grand_dictionary(int N, int size);

MaximalProfile grand_maximal(const GridFunction& f, int N, MaximalKind kind, const GrandOptions& opts = {});

enum class HardySpace { hp, Hp, hPhi, HPhi, h_star_Phi, H_star_Phi, h_musielak_phi_p };

struct HardySpec {
  HardySpace space = HardySpace::hp;
  double p = 1.0;
  /// Side of the cubes Q_k in the star norms.
  int star_cube_side = 1;

  bool global() const;
  std::string tag() const;
  static HardySpec h1() { return {HardySpace::hp, 1.0}; }
  /// Parses tags such as "hp", "HPhi", "h_star_Phi", "h_musielak_phi_p".
  static HardySpec parse(const std::string& tag, double p);
};

/// Applies the outer (Lebesgue, Orlicz or star) norm to a precomputed maximal profile.
double hardy_from_profile(const GridFunction& maximal, const HardySpec& spec);
double hardy_quasinorm(const GridFunction& f, const HardySpec& spec, const Mollifier& phi = Mollifier::bump());

struct Smoothing {
  GridFunction smooth;  // ψ∗f
  GridFunction rough;   // f − ψ∗f
};

/// ψ∗f and f − ψ∗f; throws MomentCheckFailed unless ψ has discrete mass one
/// and vanishing discrete moments through its moment order.
Smoothing mollifier_smooth(const GridFunction& f, const Mollifier& psi);
void check_mollifier_moments(const Grid& grid, const Mollifier& psi);

}  // namespace renorm
