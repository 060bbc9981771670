#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "renorm/campanato.hpp"
#include "test_support.hpp"

using namespace renorm;
using testing_support::random_function;

namespace {

GridFunction smooth_random(const Grid& g, std::uint64_t seed, int modes = 6) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> a(static_cast<std::size_t>(modes)), b(static_cast<std::size_t>(modes));
  for (int k = 0; k < modes; ++k) {
    a[std::size_t(k)] = n(rng) / (1 + k * k);
    b[std::size_t(k)] = n(rng) / (1 + k * k);
  }
  return GridFunction::sample(g, [&](const Point& x) {
    double v = 0;
    for (int k = 0; k < modes; ++k) {
      const double w = 2 * std::numbers::pi * (k + 1) / g.L;
      v += a[std::size_t(k)] * std::cos(w * x[0]) + b[std::size_t(k)] * std::sin(w * (x[0] + x[1]));
    }
    return v;
  });
}

// Brute-force 1-D campanato_local with d <= 1 via explicit normal equations.
double brute_campanato_1d(const GridFunction& g, double alpha, int r, int d) {
  const Grid& grid = g.grid();
  const auto fam = BallFamily::standard(grid);
  double small = 0, large = 0;
  for (std::size_t c = 0; c < grid.per_axis(); c += fam.center_stride)
    for (double rad : fam.radii) {
      Ball b({double(c) * grid.spacing(), 0}, rad, 1);
      const auto idx = ball_indices(grid, b);
      const double m = double(idx.size());
      double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
      for (auto i : idx) {
        const double u = grid.wrap_offset(grid.position(i)[0], b.center[0]);
        s0 += 1, s1 += u, s2 += u * u, t0 += g[i], t1 += g[i] * u;
      }
      double c0 = t0 / s0, c1 = 0;
      if (d == 1) {
        const double det = s0 * s2 - s1 * s1;
        c0 = (t0 * s2 - t1 * s1) / det;
        c1 = (s0 * t1 - s1 * t0) / det;
      }
      double osc = 0, raw = 0;
      for (auto i : idx) {
        const double u = grid.wrap_offset(grid.position(i)[0], b.center[0]);
        const double e = g[i] - c0 - c1 * u;
        osc += r == 1 ? std::abs(e) : e * e;
        raw += r == 1 ? std::abs(g[i]) : g[i] * g[i];
      }
      osc = std::pow(osc / m, 1.0 / r);
      raw = std::pow(raw / m, 1.0 / r);
      const double w = std::pow(b.measure(), -alpha);
      if (b.measure() < 1)
        small = std::max(small, w * osc);
      else
        large = std::max(large, w * raw);
    }
  return small + large;
}

}  // namespace

TEST_CASE("minimizing polynomial examples") {
  Grid g(1, 12, 8);
  auto x2 = GridFunction::cell_average(g, [](double x) { return std::pow(x - 4, 3) / 3; });
  auto p = minimizing_polynomial(x2, Ball({4, 0}, 1, 1), 1);
  CHECK(p.coeffs.size() == 2);
  CHECK(std::abs(p.coeffs[0] - 1.0 / 3) < 1e-9);
  CHECK(std::abs(p.coeffs[1]) < 1e-9);

  for (int dim : {1, 2}) {
    Grid gd(dim, dim == 1 ? 8 : 6, 4);
    Ball b({1.3, 2.1}, 0.6, dim);
    auto poly = GridFunction::sample(gd, [](const Point& x) {
      const double u = x[0] - 1.3, v = x[1] - 2.1;
      return 1 + 2 * u - 0.5 * u * u + 0.25 * u * v;
    });
    if (dim == 1) poly = GridFunction::sample(gd, [](const Point& x) { return 1 + 2 * (x[0] - 1.3) - 0.5 * std::pow(x[0] - 1.3, 2); });
    auto q = minimizing_polynomial(poly, b, 2);
    CHECK(q.coeffs.size() == (dim == 1 ? 3u : 6u));
    auto back = evaluate_on_ball(q, gd, b);
    for (auto i : ball_indices(gd, b)) CHECK(std::abs(back[i] - poly[i]) < 1e-10);

    // Residual of a random function is orthogonal to every monomial, and projecting it again gives 0.
    auto f = random_function(gd, 17 + std::uint64_t(dim));
    auto pf = minimizing_polynomial(f, b, 2);
    auto resid = restrict_to_ball(f, b) - evaluate_on_ball(pf, gd, b);
    for (const auto& beta : monomial_exponents(2, dim)) {
      double dot = 0, scale = 0;
      for (auto i : ball_indices(gd, b)) {
        const Point x = gd.position(i);
        const double m = std::pow(gd.wrap_offset(x[0], b.center[0]) / b.radius, beta[0]) *
                         std::pow(gd.wrap_offset(x[1], b.center[1]) / b.radius, beta[1]);
        dot += resid[i] * m;
        scale += std::abs(f[i] * m);
      }
      CHECK(std::abs(dot) < 1e-10 * scale);
    }
    auto zero = minimizing_polynomial(resid, b, 2);
    for (double c : zero.coeffs) CHECK(std::abs(c) < 1e-10);
  }
}

TEST_CASE("minimizing polynomial errors") {
  Grid g(1, 6, 4);
  auto f = random_function(g, 3);
  CHECK_THROWS_AS(minimizing_polynomial(f, Ball({1, 0}, 1.5 * g.spacing(), 1), 3), Error);
  try {
    minimizing_polynomial(f, Ball({1, 0}, 1.5 * g.spacing(), 1), 3);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooFewSamples);
  }
  CHECK_THROWS_AS(minimizing_polynomial(f, Ball({1, 0}, 0.5, 2), 1), Error);
}

TEST_CASE("minimizing polynomial sup bound") {
  Grid g(1, 8, 4);
  Ball b({2, 0}, 0.5, 1);
  auto c = minimizing_poly_sup_bound(GridFunction(g, -2.5), b, 2);
  CHECK(c.ratio == doctest::Approx(1).epsilon(1e-12));
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto f = random_function(g, s);
    CHECK(minimizing_poly_sup_bound(f, b, 0).ratio <= 1 + 1e-12);
  }
  auto alt = GridFunction::sample(g, [&](const Point& x) { return std::floor(x[0] / g.spacing()) == std::floor(x[0] / g.spacing() / 2) * 2 ? 1.0 : -1.0; });
  auto rep = minimizing_poly_sup_bound(alt, b, 3);
  CHECK(rep.mean_abs_g == doctest::Approx(1));
  CHECK(std::isfinite(rep.ratio));
}

TEST_CASE("dual norms of zero and constants") {
  Grid g(1, 7, 8);
  const DualNormSpec specs[] = {DualNormSpec::campanato_local(0.3, 1, 1),
                                DualNormSpec::campanato_local(0.3, 2, 2),
                                DualNormSpec::lipschitz(0.5),
                                DualNormSpec::bmo(),
                                DualNormSpec::bmo_phi(),
                                DualNormSpec::BMO_phi(),
                                DualNormSpec::orlicz_campanato_local(OrliczSpec::phi_p(0.6), 0),
                                DualNormSpec::orlicz_campanato_global(OrliczSpec::phi_log(), 0),
                                DualNormSpec::bmo_alpha(0.5, 0)};
  for (const auto& s : specs) CHECK(dual_norm(GridFunction(g), s) == 0.0);
  const double c = -1.75;
  GridFunction k(g, c);
  CHECK(dual_norm(k, DualNormSpec::campanato_local(0.3, 1, 1)) == doctest::Approx(std::abs(c)).epsilon(1e-12));
  CHECK(dual_norm(k, DualNormSpec::campanato_local(0.3, 2, 0)) == doctest::Approx(std::abs(c)).epsilon(1e-12));
  CHECK(dual_norm(k, DualNormSpec::bmo()) == doctest::Approx(std::abs(c)).epsilon(1e-12));
  CHECK(dual_norm(k, DualNormSpec::bmo_phi()) == doctest::Approx(std::log(std::numbers::e + 1) * std::abs(c)).epsilon(1e-12));
  CHECK(dual_norm(k, DualNormSpec::BMO_phi()) < 1e-12);
  CHECK(dual_norm(k, DualNormSpec::lipschitz(0.5)) == doctest::Approx(std::abs(c)).epsilon(1e-12));
  CHECK(dual_norm(k, DualNormSpec::orlicz_campanato_global(OrliczSpec::phi_p(0.6), 0)) < 1e-12);

  // bmo^α of a constant: only the ℓ(B) ≥ 1 branch survives.
  const double alpha = 0.4;
  double expect = 0;
  const auto fam = BallFamily::standard(g);
  for (std::size_t i = 0; i < g.per_axis(); i += fam.center_stride)
    for (double r : fam.radii)
      if (2 * r >= 1) expect = std::max(expect, std::pow(1 + double(i) * g.spacing() + r, alpha) / std::pow(2 * r, alpha));
  CHECK(dual_norm(k, DualNormSpec::bmo_alpha(alpha, 0)) == doctest::Approx(std::abs(c) * expect).epsilon(1e-12));
}

TEST_CASE("campanato norm agrees with a brute-force evaluation") {
  Grid g(1, 7, 4);
  auto f = random_function(g, 5);
  for (int r : {1, 2})
    for (int d : {0, 1}) {
      const double fast = dual_norm(f, DualNormSpec::campanato_local(0.25, r, d));
      CHECK(fast == doctest::Approx(brute_campanato_1d(f, 0.25, r, d)).epsilon(1e-10));
    }
}

TEST_CASE("campanato small-ball branch is invariant under adding polynomials") {
  Grid g(1, 8, 4);
  auto f = random_function(g, 9);
  for (int d : {0, 1, 2}) {
    const auto spec = DualNormSpec::campanato_local(0.2, 1, d);
    const double before = dual_norm_branches(f, spec).small;
    GridFunction shifted = f + GridFunction(g, 3.7);
    CHECK(dual_norm_branches(shifted, spec).small == doctest::Approx(before).epsilon(1e-10));
  }
  // A linear term changes nothing on balls that do not straddle the wrap point.
  auto lin = f + GridFunction::sample(g, [](const Point& x) { return 2 - 0.7 * x[0]; });
  for (double c : {1.0, 1.5, 2.25}) {
    Ball b({c, 0}, 0.4, 1);
    auto pf = evaluate_on_ball(minimizing_polynomial(f, b, 1), g, b);
    auto pl = evaluate_on_ball(minimizing_polynomial(lin, b, 1), g, b);
    auto df = restrict_to_ball(f, b) - pf;
    auto dl = restrict_to_ball(lin, b) - pl;
    CHECK(sup_norm(df - dl) < 1e-10);
  }
}

TEST_CASE("L1-optimal constants never exceed the mean-based oscillation") {
  Grid g(1, 7, 4);
  auto f = random_function(g, 12);
  const auto fam = BallFamily::standard(g);
  double inf_sup = 0;
  for (std::size_t c = 0; c < g.per_axis(); c += fam.center_stride)
    for (double r : fam.radii) {
      Ball b({double(c) * g.spacing(), 0}, r, 1);
      if (b.measure() >= 1) continue;
      std::vector<double> v;
      for (auto i : ball_indices(g, b)) v.push_back(f[i]);
      std::vector<double> sorted = v;
      std::sort(sorted.begin(), sorted.end());
      const double med = sorted[sorted.size() / 2];
      double s = 0;
      for (double x : v) s += std::abs(x - med);
      inf_sup = std::max(inf_sup, s / double(v.size()));
    }
  CHECK(inf_sup <= dual_norm_branches(f, DualNormSpec::bmo()).small * (1 + 1e-12));
}

TEST_CASE("lipschitz norm of a power singularity") {
  const double a0 = 0.5;
  auto norm_at = [&](int J, double alpha) {
    Grid g(1, J, 8);
    auto f = GridFunction::sample(g, [&](const Point& x) { return std::pow(std::abs(x[0] - 4), a0); });
    return lipschitz_seminorm(f, alpha);
  };
  CHECK(norm_at(12, 0.4) / norm_at(8, 0.4) < 1.05);
  CHECK(norm_at(12, 0.5) / norm_at(8, 0.5) < 1.05);
  CHECK(norm_at(12, 0.7) / norm_at(8, 0.7) > 1.5);
}

TEST_CASE("lipschitz seminorm of a sine") {
  Grid g(1, 12, 2);
  const double w = 2 * std::numbers::pi / g.L;
  auto f = GridFunction::sample(g, [&](const Point& x) { return std::sin(w * x[0]); });
  for (double alpha : {0.5, 1.5}) {
    const int k = int(std::floor(alpha)) + 1;
    double expect = 0;
    for (double t = 32; t * g.spacing() <= g.L / 4.0; t *= 2) {
      const double h = t * g.spacing();
      expect = std::max(expect, std::pow(2 * std::sin(w * h / 2), k) / std::pow(h, alpha));
    }
    for (double t = 1; t <= 16; ++t) {
      const double h = t * g.spacing();
      expect = std::max(expect, std::pow(2 * std::sin(w * h / 2), k) / std::pow(h, alpha));
    }
    CHECK(lipschitz_seminorm(f, alpha) == doctest::Approx(expect).epsilon(1e-5));
  }
  CHECK_THROWS_AS(lipschitz_seminorm(f, 0.0), Error);
}

TEST_CASE("two-dimensional norms") {
  Grid g(2, 5, 2);
  auto f = smooth_random(g, 4);
  const auto bmo = dual_norm_branches(f, DualNormSpec::bmo());
  CHECK(bmo.small > 0);
  CHECK(bmo.large > 0);
  CHECK(dual_norm(GridFunction(g, 2.0), DualNormSpec::bmo()) == doctest::Approx(2).epsilon(1e-12));
  const auto lip = dual_norm(f, DualNormSpec::lipschitz(0.6));
  CHECK(std::isfinite(lip));
  CHECK(lip >= sup_norm(f));
  const auto local = dual_norm_branches(f, DualNormSpec::orlicz_campanato_local(OrliczSpec::phi_p(0.7), 0));
  const auto global = dual_norm_branches(f, DualNormSpec::orlicz_campanato_global(OrliczSpec::phi_p(0.7), 0));
  CHECK(global.small >= local.small * (1 - 1e-12));
  CHECK(dual_norm(f, DualNormSpec::BMO_phi()) >= dual_norm_branches(f, DualNormSpec::bmo_phi()).small * (1 - 1e-12));
}

TEST_CASE("lipschitz and campanato norms stay comparable on a smooth corpus") {
  Grid g(1, 8, 4);
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto f = smooth_random(g, 100 + s);
    const double ratio = dual_norm(f, DualNormSpec::lipschitz(0.6)) / dual_norm(f, DualNormSpec::campanato_local(0.6, 1, 0));
    CHECK(ratio > 1e-2);
    CHECK(ratio < 1e2);
  }
}

TEST_CASE("multiplier inequality report") {
  Grid g(1, 8, 4);
  auto f = smooth_random(g, 1);
  auto one = multiplier_inequality_check(GridFunction(g, 1.0), f, 0.6);
  CHECK(one.lhs == doctest::Approx(dual_norm(f, DualNormSpec::lipschitz(1 / 0.6 - 1))).epsilon(1e-12));
  CHECK(multiplier_inequality_check(f, GridFunction(g), 0.6).lhs == 0.0);
  auto rep = multiplier_inequality_check(smooth_random(g, 2), f, 0.6);
  CHECK(std::isfinite(rep.ratio));
  CHECK(rep.ratio > 0);
  CHECK_THROWS_AS(multiplier_inequality_check(f, f, 1.0), Error);
}

TEST_CASE("dual norm argument errors") {
  CHECK_THROWS_AS(dual_norm(GridFunction(Grid(1, 1, 1)), DualNormSpec::bmo()), Error);
  Grid g(1, 6, 4);
  auto f = random_function(g, 1);
  auto bad = DualNormSpec::bmo();
  bad.family.radii = {3.0};
  CHECK_THROWS_AS(dual_norm(f, bad), Error);
  CHECK_THROWS_AS(dual_norm(f, DualNormSpec::lipschitz(-1)), Error);
  CHECK_THROWS_AS(dual_norm(f, DualNormSpec::campanato_local(0.2, 3, 0)), Error);
  CHECK_THROWS_AS(dual_norm(f, DualNormSpec::orlicz_campanato_local(OrliczSpec::theta_log(), 0)), Error);
}
