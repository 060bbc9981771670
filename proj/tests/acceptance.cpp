// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "renorm/atoms.hpp"
#include "renorm/campanato.hpp"
#include "renorm/divcurl.hpp"
#include "renorm/experiments.hpp"
#include "renorm/maximal.hpp"
#include "renorm/orlicz.hpp"
#include "renorm/paraproducts.hpp"
#include "renorm/wavelets.hpp"

using namespace renorm;

namespace {

// Pinned tolerances and budgets.
constexpr double kFilterSum = 1e-12;
constexpr double kFilterOrtho = 1e-10;
constexpr double kFilterMoment = 1e-8;
constexpr double kRoundTrip = 1e-9;
constexpr double kIdentity = 1e-8;
constexpr double kPi4Slack = 1e-10;
constexpr double kLuxemburg = 1e-6;
constexpr double kOrthogonality = 1e-10;
constexpr double kOneThird = 1e-9;
constexpr double kAnnihilation = 1e-7;
constexpr double kGrowth = 2.0;
constexpr double kReconstruction = 1e-9;
constexpr double kStructureC = 100.0;
constexpr double kRiesz = 1e-10;
constexpr double kCurlDiv = 1e-10;
constexpr double kProofIdentity = 1e-9;
constexpr double kTypeSlack = 8 * std::numeric_limits<double>::epsilon();

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

GridFunction gaussian(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  GridFunction f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = n(rng);
  return f;
}

double relative_sup(const GridFunction& a, const GridFunction& b) {
  return sup_norm(a - b) / std::max(sup_norm(b), 1e-300);
}

// Mean-zero trigonometric polynomial in 2-D with |k|∞ < n/4.
GridFunction band_limited_2d(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const long kmax = long(g.per_axis() / 4) - 1;
  std::uniform_int_distribution<long> kd(-kmax, kmax);
  std::vector<std::array<double, 4>> modes;
  while (modes.size() < 16) {
    const long k0 = kd(rng), k1 = kd(rng);
    if (k0 != 0 || k1 != 0) modes.push_back({double(k0), double(k1), nd(rng), nd(rng)});
  }
  return GridFunction::sample(g, [&](const Point& x) {
    double v = 0.0;
    for (const auto& m : modes) {
      const double a = 2.0 * std::numbers::pi * (m[0] * x[0] + m[1] * x[1]) / g.L;
      v += m[2] * std::cos(a) + m[3] * std::sin(a);
    }
    return v;
  });
}

Outcome filters() {
  Outcome o;
  double worst_sum = 0, worst_ortho = 0, worst_moment = 0;
  for (int d : {1, 2, 4, 6, 8}) {
    const FilterPair f = build_filter(d);
    const int n = int(f.lowpass.size());
    double sum = 0;
    for (double v : f.lowpass) sum += v;
    worst_sum = std::max(worst_sum, std::abs(sum - std::numbers::sqrt2));
    for (int l = 0; 2 * l < n; ++l) {
      double s = 0;
      for (int k = 0; k + 2 * l < n; ++k) s += f.lowpass[std::size_t(k)] * f.lowpass[std::size_t(k + 2 * l)];
      worst_ortho = std::max(worst_ortho, std::abs(s - (l == 0 ? 1.0 : 0.0)));
    }
    for (int nu = 0; nu < d; ++nu) {
      double s = 0;
      for (int k = 0; k < n; ++k) s += f.highpass[std::size_t(k)] * std::pow(double(k), nu);
      worst_moment = std::max(worst_moment, std::abs(s));
    }
  }
  o.pass = worst_sum < kFilterSum && worst_ortho < kFilterOrtho && worst_moment < kFilterMoment;
  o.detail = "max |sum h - sqrt2| " + fmt("%.2e", worst_sum) + ", max shift-orthonormality error " +
             fmt("%.2e", worst_ortho) + ", max |sum g_k k^nu| " + fmt("%.2e", worst_moment);
  return o;
}

Outcome round_trip() {
  const Grid g(1, 10, 8);
  const FilterPair f = build_filter(4);
  std::mt19937_64 rng(2001);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const GridFunction x = gaussian(g, rng);
    worst = std::max(worst, sup_norm(inverse(forward(x, 0, f), f) - x));
  }
  return {worst < kRoundTrip, "100 signals, max sup error " + fmt("%.2e", worst)};
}

// Criteria 3 and 4 share the corpus.
struct IdentityStats {
  double residual = 0;
  int pi4_violations = 0;
  double pi4_worst_ratio = 0;
};

IdentityStats identity_corpus() {
  const Grid g(1, 10, 8);
  const FilterPair f = build_filter(4);
  std::mt19937_64 rng(3001);
  IdentityStats s;
  for (int t = 0; t < 100; ++t) {
    const GridFunction a = gaussian(g, rng), b = gaussian(g, rng);
    const GridFunction ab = pointwise_product(a, b);
    for (auto v : {Variant::Inhomogeneous, Variant::Homogeneous}) {
      const ParaproductResult r = renormalize(a, b, f, v);
      s.residual = std::max(s.residual, relative_sup(r.sum(), ab));
      const Pi4Bound bound = pi4_l1_bound_check(a, b, f, v);
      s.pi4_worst_ratio = std::max(s.pi4_worst_ratio, bound.lhs / bound.rhs);
      if (!(bound.lhs <= bound.rhs * (1 + kPi4Slack))) ++s.pi4_violations;
    }
  }
  return s;
}

Outcome orlicz_inequalities() {
  int checks = 0, violations = 0;
  std::vector<double> taus;
  for (int e = -24; e <= 24; ++e) taus.push_back(std::pow(10.0, e / 4.0));
  const double small_s[] = {1e-3, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99};
  const double large_s[] = {1.0, 1.5, 2.0, 5.0, 10.0, 100.0, 1e3};
  for (int pi = 1; pi <= 9; ++pi) {
    const double p = pi / 10.0;
    const auto spec = OrliczSpec::phi_p(p);
    const auto phi = [&](double t) { return evaluate(spec, std::nullopt, t); };
    for (double t : taus) {
      const double m = std::min(t, std::pow(t, p));
      const double v = phi(t);
      checks += 2;
      violations += !(m / 2 <= v * (1 + kTypeSlack));
      violations += !(v <= m * (1 + kTypeSlack));
      for (double s : small_s) {
        ++checks;
        violations += !(phi(s * t) <= std::pow(s, p) * v * (1 + kTypeSlack));
      }
      for (double s : large_s) {
        ++checks;
        violations += !(phi(s * t) <= s * v * (1 + kTypeSlack));
      }
    }
  }
  std::mt19937_64 rng(5001);
  std::uniform_int_distribution<int> len(2, 10);
  std::uniform_real_distribution<double> expo(-6.0, 6.0);
  std::uniform_int_distribution<int> pd(1, 9);
  int sub_violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto spec = OrliczSpec::phi_p(pd(rng) / 10.0);
    const int k = len(rng);
    double total = 0, sum_phi = 0;
    for (int i = 0; i < k; ++i) {
      const double x = std::pow(10.0, expo(rng));
      total += x;
      sum_phi += evaluate(spec, std::nullopt, x);
    }
    sub_violations += !(evaluate(spec, std::nullopt, total) <= sum_phi * (1 + kTypeSlack));
  }
  return {violations == 0 && sub_violations == 0,
          std::to_string(checks) + " envelope/type checks with " + std::to_string(violations) +
              " violations; 1000 subadditivity tuples with " + std::to_string(sub_violations) + " violations"};
}

Outcome luxemburg_closed_form() {
  const double x_star = std::pow((1 + std::sqrt(5.0)) / 2, 2);
  const Grid g(1, 8, 4);
  const double c = 3.0;
  const GridFunction f = GridFunction::sample(g, [c](const Point& x) { return x[0] < 1.0 ? c : 0.0; });
  const double lux = luxemburg_norm(f, OrliczSpec::phi_p(0.5));
  const double err = std::abs(lux - c / x_star) / (c / x_star);
  return {err < kLuxemburg, "norm " + fmt("%.12f", lux) + " vs c/x* " + fmt("%.12f", c / x_star) +
                                ", relative error " + fmt("%.2e", err)};
}

Outcome minimizing_polynomial_checks() {
  std::mt19937_64 rng(7001);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0;
  for (int t = 0; t < 200; ++t) {
    const int dim = 1 + t % 2;
    const int d = int(unit(rng) * 5.0);
    const Grid g(dim, dim == 1 ? 9 : 6, 4);
    const Ball b({unit(rng) * 4, unit(rng) * 4}, 0.3 + 1.2 * unit(rng), dim);
    const GridFunction f = gaussian(g, rng);
    const PolyCoeffs p = minimizing_polynomial(f, b, d);
    const GridFunction resid = restrict_to_ball(f, b) - evaluate_on_ball(p, g, b);
    const auto idx = ball_indices(g, b);
    for (const auto& beta : monomial_exponents(d, dim)) {
      double dot = 0, scale = 0;
      for (auto i : idx) {
        const Point x = g.position(i);
        const double m = std::pow(g.wrap_offset(x[0], b.center[0]) / b.radius, beta[0]) *
                         std::pow(dim == 2 ? g.wrap_offset(x[1], b.center[1]) / b.radius : 0.0, beta[1]);
        dot += resid[i] * m;
        scale += std::abs(f[i] * m);
      }
      worst = std::max(worst, std::abs(dot) / scale);
    }
  }
  const Grid g12(1, 12, 8);
  const GridFunction x2 = GridFunction::cell_average(g12, [](double x) { return std::pow(x - 4, 3) / 3; });
  const PolyCoeffs q = minimizing_polynomial(x2, Ball({4, 0}, 1, 1), 1);
  const double third = std::abs(q.coeffs[0] - 1.0 / 3) + std::abs(q.coeffs[1]);
  return {worst < kOrthogonality && third < kOneThird,
          "max relative orthogonality residual " + fmt("%.2e", worst) + " over 200 fits; x^2 -> 1/3 error " +
              fmt("%.2e", third)};
}

Outcome moment_annihilation() {
  double worst = 0;
  const Grid g(1, 9, 8);
  std::mt19937_64 rng(8001);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> amp(0.0, 1.0);
  for (int d : {2, 4, 6}) {
    const FilterPair filt = build_filter(d);
    for (int t = 0; t < 5; ++t) {
      WaveletExpansion wa(g, 0, int(filt.lowpass.size()));
      for (int c = 0; c < 3; ++c) {
        const int j = 3 + int(unit(rng) * 4);
        const std::size_t n = wa.positions(j);
        std::size_t k = std::size_t(unit(rng) * double(n));
        while (wa.wrapped(j, k)) k = (k + 1) % n;
        wa.mother(j, 1)[k] += amp(rng);
      }
      std::vector<double> coef(static_cast<std::size_t>(d));
      for (double& c : coef) c = amp(rng);
      const GridFunction poly = GridFunction::sample(g, [&](const Point& x) {
        double v = 0, u = 1;
        for (double c : coef) {
          v += c * u;
          u *= 0.25 * x[0] - 1.0;
        }
        return v;
      });
      WaveletExpansion wp = forward(poly, 0, filt);
      wp.zero_wrapped_mothers();
      const ParaproductResult r = renormalize(wa, wp, filt, Variant::Inhomogeneous);
      worst = std::max({worst, sup_norm(r.pi1), sup_norm(r.pi3), sup_norm(r.pi4)});
    }
  }
  return {worst < kAnnihilation, "max sup of pi1, pi3, pi4 over 15 atom/polynomial pairs " + fmt("%.2e", worst)};
}

Outcome bounds_sweeps() {
  ExperimentConfig c8 = ExperimentConfig::defaults(Subcommand::bounds);
  ExperimentConfig c12 = c8;
  c12.J = 12;
  std::string detail;
  bool pass = true;
  double worst = 0;
  std::string worst_name;
  for (const auto& family : c8.families) {
    std::map<std::string, double> m8, m12;
    for (const auto& r : run_bounds_family(c8, family)) m8[r.op] = std::max(m8[r.op], r.ratio);
    for (const auto& r : run_bounds_family(c12, family)) {
      pass = pass && std::isfinite(r.ratio);
      m12[r.op] = std::max(m12[r.op], r.ratio);
    }
    for (const auto& [op, v8] : m8) {
      const double growth = m12[op] / v8;
      pass = pass && v8 > 0 && growth < kGrowth;
      if (growth > worst) {
        worst = growth;
        worst_name = family + "/" + op;
      }
    }
  }
  detail = "30 trials per operator, largest J=12/J=8 max-ratio factor " + fmt("%.4f", worst) + " (" + worst_name + ")";
  return {pass, detail};
}

Outcome structure() {
  ExperimentConfig c = ExperimentConfig::defaults(Subcommand::structure);
  bool pass = true;
  double worst_rec = 0, worst_c = 0;
  for (const auto& r : run_structure(c)) {
    worst_rec = std::max(worst_rec, r.reconstruction);
    worst_c = std::max(worst_c, r.C_ratio);
    pass = pass && r.atoms_valid && std::abs(r.norm_f_hPhi - 1.0) < 1e-9;
  }
  pass = pass && worst_rec < kReconstruction && worst_c < kStructureC;

  // Functions with m_N(f) < 1 everywhere put every piece in the h¹ part.
  const Grid g(1, c.J, c.L);
  const FilterPair filt = build_filter(c.d);
  const int N = grand_order(c.p, 1);
  double f1_sup = 0;
  for (int t = 0; t < 10; ++t) {
    GridFunction f = random_coeff_expansion(g, filt, Variant::Inhomogeneous, false, trial_seed(99, 1, std::uint64_t(t)));
    f *= 0.5 / sup_norm(grand_maximal(f, N, MaximalKind::GrandLocal).values);
    const StructureSplit s = structure_split(f, c.p);
    f1_sup = std::max(f1_sup, sup_norm(s.f1));
    worst_rec = std::max(worst_rec, sup_norm(s.f0 + s.f1 - f));
  }
  pass = pass && f1_sup == 0.0 && worst_rec < kReconstruction;
  return {pass, "50 normalized f: max reconstruction error " + fmt("%.2e", worst_rec) +
                    ", empirical constant max (|f0|_h1 + |f1|_hp) = " + fmt("%.4f", worst_c) + " (limit " +
                    fmt("%.0f", kStructureC) + "); 10 f with m_N < 1: sup|f1| = " + fmt("%.1e", f1_sup)};
}

Outcome spectral() {
  const Grid g(2, 7, 2);  // 256 x 256
  double riesz_err = 0, curl = 0, div = 0, proof = 0;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const GridFunction f = band_limited_2d(g, seed);
    const GridFunction sum = riesz(0, riesz(0, f)) + riesz(1, riesz(1, f));
    riesz_err = std::max(riesz_err, relative_sup(-1.0 * sum, f));
    const VectorField2D F = gradient(f);
    const VectorField2D G = perp_gradient(f);
    const double scale = std::max(sup_norm(F[0]), sup_norm(F[1]));
    curl = std::max(curl, sup_norm(curl2d(F)) / scale);
    div = std::max(div, sup_norm(divergence(G)) / scale);
    proof = std::max(proof, sup_norm(riesz(0, F[1]) - riesz(1, F[0])) / scale);
    proof = std::max(proof, sup_norm(riesz(1, riesz(0, F[0])) - riesz(0, riesz(1, F[0]))) / scale);
  }
  // A compactly supported, not band-limited, curl-free field.
  const VectorField2D B = gradient_field(g, trial_seed(5, 5, 5));
  const double bscale = std::max(sup_norm(B[0]), sup_norm(B[1]));
  proof = std::max(proof, sup_norm(riesz(0, B[1]) - riesz(1, B[0])) / bscale);
  return {riesz_err < kRiesz && curl < kCurlDiv && div < kCurlDiv && proof < kProofIdentity,
          "sum R_j^2 + Id " + fmt("%.2e", riesz_err) + ", curl grad " + fmt("%.2e", curl) + ", div perp " +
              fmt("%.2e", div) + ", R_j F_k - R_k F_j " + fmt("%.2e", proof) + " (relative sup)"};
}

Outcome divcurl_sweep() {
  const ExperimentConfig c = ExperimentConfig::defaults(Subcommand::divcurl);
  const auto rows = run_divcurl(c);
  bool pass = rows.size() == std::size_t(c.corpus_size) * c.j_values.size() * c.modes.size();
  std::map<std::string, std::map<int, double>> maxima;
  int uncertified = 0;
  for (const auto& r : rows) {
    uncertified += !r.report.certified;
    pass = pass && std::isfinite(r.report.ratio);
    double& m = maxima[to_string(r.report.mode)][r.J];
    m = std::max(m, r.report.ratio);
  }
  pass = pass && uncertified == 0;
  std::string detail = std::to_string(rows.size()) + " evaluations, " + std::to_string(uncertified) + " uncertified";
  for (const auto& [mode, by_j] : maxima) {
    double lo = INFINITY, hi = 0;
    for (const auto& [j, v] : by_j) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double growth = hi / lo;
    pass = pass && lo > 0 && growth < kGrowth;
    detail += "; " + mode + " max ratio " + fmt("%.4g", lo) + ".." + fmt("%.4g", hi) + " growth " + fmt("%.4f", growth);
  }
  return {pass, detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget;  // seconds; 0 means no runtime clause
    std::function<Outcome()> run;
  };
  IdentityStats ids;
  const std::vector<Criterion> criteria{
      {1, "filter correctness", 1.0, filters},
      {2, "perfect reconstruction", 5.0, round_trip},
      {3, "renormalization identity", 30.0,
       [&] {
         ids = identity_corpus();
         return Outcome{ids.residual < kIdentity,
                        "100 pairs x 2 variants, max relative residual " + fmt("%.2e", ids.residual)};
       }},
      {4, "pi4 Cauchy-Schwarz bound", 0.0,
       [&] {
         return Outcome{ids.pi4_violations == 0, std::to_string(ids.pi4_violations) +
                                                     " violations, max lhs/rhs " + fmt("%.6f", ids.pi4_worst_ratio)};
       }},
      {5, "Orlicz envelope, type and subadditivity", 1.0, orlicz_inequalities},
      {6, "Luxemburg root vs closed form", 0.0, luxemburg_closed_form},
      {7, "minimizing polynomial", 0.0, minimizing_polynomial_checks},
      {8, "moment annihilation", 0.0, moment_annihilation},
      {9, "uniform-boundedness sweeps", 180.0, bounds_sweeps},
      {10, "structure split", 0.0, structure},
      {11, "spectral calculus", 0.0, spectral},
      {12, "div-curl ratio sweep", 180.0, divcurl_sweep},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double t = seconds_since(t0);
    std::string timing = fmt("%.2fs", t);
    if (c.budget > 0) {
      timing += " of " + fmt("%.0fs", c.budget);
      if (t > c.budget) {
        o.pass = false;
        o.detail += "; over the time budget";
      }
    }
    failures += !o.pass;
    std::printf("criterion %2d %s: %s; %s [%s]\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
