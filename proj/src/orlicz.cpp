#include "renorm/orlicz.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <vector>

#include "renorm/numeric.hpp"

namespace renorm {

OrliczSpec OrliczSpec::phi_p(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "Φ_p needs p in (0,1)");
  return {OrliczKind::PhiP, p, 1, p, 1.0};
}

OrliczSpec OrliczSpec::phi_log() { return {OrliczKind::PhiLog, 1.0, 1, 1.0, 1.0}; }
OrliczSpec OrliczSpec::theta_log() { return {OrliczKind::ThetaLog, 1.0, 1, 1.0, 1.0}; }

OrliczSpec OrliczSpec::musielak_phi_p(double p, int n) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "φ_p needs p in (0,1)");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "φ_p needs n >= 1");
  return {OrliczKind::MusielakPhiP, p, n, p, 1.0};
}

bool OrliczSpec::log_branch() const {
  if (kind != OrliczKind::MusielakPhiP) return false;
  const double v = n * (1.0 / p - 1.0);
  return v >= 1.0 - 1e-12 && std::abs(v - std::round(v)) < 1e-12;
}

std::string OrliczSpec::name() const {
  switch (kind) {
    case OrliczKind::PhiP: return "phi_p(" + std::to_string(p) + ")";
    case OrliczKind::PhiLog: return "phi_log";
    case OrliczKind::ThetaLog: return "theta_log";
    case OrliczKind::MusielakPhiP: return "musielak_phi_p(" + std::to_string(p) + ")";
  }
  return "?";
}

namespace {

double norm_of(const Point& x, int n) { return n == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]); }

// Φ(x, τ) with the x-dependent factors precomputed: `weight` is (1+|x|)^n and
// `logx` is log(e+|x|).
double eval_raw(const OrliczSpec& s, double tau, double weight, double logx) {
  if (tau == 0.0) return 0.0;
  switch (s.kind) {
    case OrliczKind::PhiP: return tau / (1.0 + std::pow(tau, 1.0 - s.p));
    case OrliczKind::PhiLog: return tau / std::log(kE + tau);
    case OrliczKind::ThetaLog: return tau / (logx + std::log(kE + tau));
    case OrliczKind::MusielakPhiP: {
      double den = std::pow(tau * weight, 1.0 - s.p);
      if (s.log_branch()) den *= std::pow(logx, s.p);
      return tau / (1.0 + den);
    }
  }
  return 0.0;
}

}  // namespace

double evaluate(const OrliczSpec& spec, std::optional<Point> x, double tau) {
  if (!(tau >= 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be nonnegative");
  if (spec.musielak() && !x) throw Error(ErrorKind::InvalidArgument, "Musielak growth function needs x");
  if (!spec.musielak() && x) throw Error(ErrorKind::InvalidArgument, "x given for an x-independent growth function");
  double weight = 1.0, logx = 1.0;
  if (x) {
    const double r = norm_of(*x, spec.n);
    weight = std::pow(1.0 + r, spec.n);
    logx = std::log(kE + r);
  }
  return eval_raw(spec, tau, weight, logx);
}

namespace {

// Root of modular(λ) = 1 in log λ (TOMS 748 bracketing).
template <class Modular>
double solve_log_lambda(Modular&& modular, double scale, double rel_tol) {
  // modular(λ) is nonincreasing in λ; find the smallest λ with modular(λ) ≤ 1.
  double lo = std::log(scale * 1e-12), hi = std::log(scale * 1e12);
  while (modular(std::exp(hi)) > 1.0) hi += std::log(1e6);
  while (modular(std::exp(lo)) <= 1.0) lo -= std::log(1e6);
  const double tol = std::log1p(rel_tol);
  const auto g = [&](double t) { return modular(std::exp(t)) - 1.0; };
  const auto done = [tol](double a, double b) { return std::abs(b - a) <= tol; };
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, done, max_iter);
  return std::exp(0.5 * (a + b));
}

}  // namespace

double luxemburg_norm(const GridFunction& f, const OrliczSpec& spec, double rel_tol) {
  f.check_finite();
  const Grid& grid = f.grid();
  if (spec.musielak() && spec.n != grid.dim)
    throw Error(ErrorKind::InvalidArgument, "Musielak dimension does not match the grid");
  std::vector<double> vals, weight, logx;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == 0.0) continue;
    vals.push_back(std::abs(f[i]));
    if (spec.musielak()) {
      const double r = norm_of(grid.position(i), grid.dim);
      weight.push_back(std::pow(1.0 + r, grid.dim));
      logx.push_back(std::log(kE + r));
    }
  }
  if (vals.empty()) return 0.0;
  const double cell = grid.cell_volume();
  const auto modular = [&](double lambda) {
    CompensatedSum s;
    for (std::size_t i = 0; i < vals.size(); ++i)
      s += eval_raw(spec, vals[i] / lambda, spec.musielak() ? weight[i] : 1.0, spec.musielak() ? logx[i] : 1.0);
    return cell * s.value();
  };
  return solve_log_lambda(modular, sup_norm(f), rel_tol);
}

double indicator_norm(const OrliczSpec& spec, double measure) {
  if (spec.musielak()) throw Error(ErrorKind::InvalidArgument, "indicator_norm needs an x-independent growth function");
  if (!(measure > 0.0)) throw Error(ErrorKind::InvalidArgument, "measure must be positive");
  return solve_log_lambda([&](double lambda) { return measure * eval_raw(spec, 1.0 / lambda, 1.0, 1.0); }, 1.0,
                           1e-13);
}

double star_norm(const GridFunction& f, const OrliczSpec& spec, int cube_side) {
  const Grid& grid = f.grid();
  if (cube_side < 1 || grid.L % cube_side != 0)
    throw Error(ErrorKind::InvalidArgument, "cube side must divide the box side");
  const std::size_t per_cube = std::size_t(cube_side) << grid.J;
  const std::size_t cubes = std::size_t(grid.L / cube_side);
  const std::size_t n = grid.per_axis();
  CompensatedSum total;
  for (std::size_t c0 = 0; c0 < cubes; ++c0)
    for (std::size_t c1 = 0; c1 < (grid.dim == 1 ? 1 : cubes); ++c1) {
      GridFunction piece(grid);
      bool any = false;
      for (std::size_t a = c0 * per_cube; a < (c0 + 1) * per_cube; ++a) {
        if (grid.dim == 1) {
          piece[a] = f[a];
          any = any || f[a] != 0.0;
          continue;
        }
        for (std::size_t b = c1 * per_cube; b < (c1 + 1) * per_cube; ++b) {
          const std::size_t idx = a * n + b;
          piece[idx] = f[idx];
          any = any || f[idx] != 0.0;
        }
      }
      if (any) total += luxemburg_norm(piece, spec);
    }
  return total.value();
}

}  // namespace renorm
