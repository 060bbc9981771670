#include "renorm/atoms.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "renorm/campanato.hpp"
#include "renorm/numeric.hpp"

namespace renorm {

namespace {

constexpr double kSupportTol = 1e-12;
constexpr double kSizeSlack = 1e-9;
constexpr double kMomentTol = 1e-7;
constexpr double kRoundoffFloor = 64 * std::numeric_limits<double>::epsilon();
constexpr int kMaxLevels = 40;

double int_pow(double x, int e) {
  double v = 1.0;
  for (int a = 0; a < e; ++a) v *= x;
  return v;
}

Point periodic_offset(const Grid& grid, const Point& x, const Point& c) {
  Point u{grid.wrap_offset(x[0], c[0]), 0.0};
  if (grid.dim == 2) u[1] = grid.wrap_offset(x[1], c[1]);
  return u;
}

// One cube of a Whitney cover with its partition-of-unity weight.
struct Cube {
  std::size_t first = 0;
  std::size_t length = 0;
  double center = 0.0;
  std::vector<std::size_t> support;
  std::vector<double> eta;
  Ball ball;
  bool subtract = false;
  std::vector<double> poly;  // P on the support
};

struct Cover {
  std::vector<Cube> cubes;
  // For each sample, the (cube, position in support) pairs whose weight is positive there.
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> owners;
};

double cubic_weight(double x, double radius) {
  const double t = std::abs(2.0 * x / radius);
  if (t < 1.0) return 2.0 / 3.0 - t * t + t * t * t / 2.0;
  if (t < 2.0) return (2.0 - t) * (2.0 - t) * (2.0 - t) / 6.0;
  return 0.0;
}

// Weighted least-squares fit of degree d on the support; returns the fit at the support samples.
std::vector<double> weighted_fit(const Grid& grid, const std::vector<std::size_t>& idx, const std::vector<double>& w,
                                 const std::vector<double>& y, double center, double radius, int d) {
  const Eigen::Index m = Eigen::Index(idx.size());
  Eigen::MatrixXd v(m, d + 1);
  Eigen::MatrixXd a(m, d + 1);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double u = grid.wrap_offset(grid.position(idx[std::size_t(i)])[0], center) / radius;
    const double sw = std::sqrt(w[std::size_t(i)]);
    for (int e = 0; e <= d; ++e) {
      v(i, e) = int_pow(u, e);
      a(i, e) = sw * v(i, e);
    }
    b(i) = sw * y[std::size_t(i)];
  }
  const Eigen::VectorXd c = a.completeOrthogonalDecomposition().solve(b);
  const Eigen::VectorXd fit = v * c;
  return std::vector<double>(fit.data(), fit.data() + m);
}

Cover whitney_cover(const Grid& grid, const std::vector<bool>& mask, const GridFunction& f, int d, bool global) {
  const std::size_t n = grid.per_axis();
  const double h = grid.spacing();
  Cover cover;
  cover.owners.assign(n, {});
  const std::size_t inside = std::size_t(std::count(mask.begin(), mask.end(), true));
  if (inside == 0) return cover;

  if (inside == n) {
    Cube c;
    c.first = 0;
    c.length = n;
    c.center = grid.L / 2.0;
    c.support.resize(n);
    for (std::size_t i = 0; i < n; ++i) c.support[i] = i;
    c.eta.assign(n, 1.0);
    c.ball = Ball({c.center, 0.0}, grid.L / 2.0, 1);
    cover.cubes.push_back(std::move(c));
  } else {
    // Cells strictly between each sample and the nearest sample outside the mask.
    std::vector<std::size_t> gap(n, n);
    std::size_t run = n;
    for (std::size_t pass = 0; pass < 2; ++pass)
      for (std::size_t t = 0; t < n; ++t) {
        run = mask[t] ? std::min(run + 1, n) : 0;
        gap[t] = std::min(gap[t], run == 0 ? 0 : run - 1);
      }
    run = n;
    for (std::size_t pass = 0; pass < 2; ++pass)
      for (std::size_t t = n; t-- > 0;) {
        run = mask[t] ? std::min(run + 1, n) : 0;
        gap[t] = std::min(gap[t], run == 0 ? 0 : run - 1);
      }

    std::size_t top = 1;
    while (n % (top * 2) == 0 && top * 2 < n) top *= 2;
    std::vector<bool> covered(n, false);
    std::vector<std::pair<std::size_t, std::size_t>> chosen;
    for (std::size_t len = top; len >= 1; len /= 2) {
      for (std::size_t a = 0; a < n; a += len) {
        bool ok = true;
        // Single cells are accepted anywhere so the boundary layer is covered too.
        for (std::size_t t = a; t < a + len && ok; ++t) ok = mask[t] && !covered[t] && (len == 1 || gap[t] >= len);
        if (!ok) continue;
        chosen.emplace_back(a, len);
        for (std::size_t t = a; t < a + len; ++t) covered[t] = true;
      }
      if (len == 1) break;
    }
    std::sort(chosen.begin(), chosen.end());
    for (auto [a, len] : chosen) {
      Cube c;
      c.first = a;
      c.length = len;
      c.center = (double(a) + double(len) / 2.0) * h;
      const double radius = double(len) * h;
      double reach = 0.0;
      for (long m = -long(len); m < 2 * long(len); ++m) {
        const double off = (double(m) + 0.5 - double(len) / 2.0) * h;
        const double w = cubic_weight(off, radius);
        if (w <= 0.0) continue;
        c.support.push_back(std::size_t((long(a) + m + long(n)) % long(n)));
        c.eta.push_back(w);
        reach = std::max(reach, std::abs(off) + h / 2.0);
      }
      c.ball = Ball({c.center, 0.0}, reach, 1);
      cover.cubes.push_back(std::move(c));
    }
    std::vector<double> total(n, 0.0);
    for (const auto& c : cover.cubes)
      for (std::size_t s = 0; s < c.support.size(); ++s) total[c.support[s]] += c.eta[s];
    for (auto& c : cover.cubes)
      for (std::size_t s = 0; s < c.support.size(); ++s) c.eta[s] /= total[c.support[s]];
  }

  for (std::size_t ci = 0; ci < cover.cubes.size(); ++ci) {
    auto& c = cover.cubes[ci];
    for (std::size_t s = 0; s < c.support.size(); ++s) cover.owners[c.support[s]].emplace_back(ci, s);
    c.subtract = global || c.length < n;
    c.poly.assign(c.support.size(), 0.0);
    if (c.subtract) {
      std::vector<double> y(c.support.size());
      for (std::size_t s = 0; s < y.size(); ++s) y[s] = f[c.support[s]];
      c.poly = weighted_fit(grid, c.support, c.eta, y, c.center, c.ball.radius, d);
    }
  }
  return cover;
}

std::vector<bool> level_mask(const GridFunction& m, int k) {
  const double t = std::ldexp(1.0, k);
  std::vector<bool> mask(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) mask[i] = m[i] > t;
  return mask;
}

}  // namespace

std::string AtomKind::tag() const {
  std::ostringstream os;
  os << (global ? "global" : "local") << "(" << p << "," << (std::isinf(r) ? std::string("inf") : std::to_string(r))
     << "," << d << ")";
  return os.str();
}

std::vector<MomentCheck> discrete_moments(const GridFunction& a, const Point& center, int d) {
  const Grid& grid = a.grid();
  const auto exps = monomial_exponents(d, grid.dim);
  std::vector<CompensatedSum> sums(exps.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (a[i] == 0.0) continue;
    const Point u = periodic_offset(grid, grid.position(i), center);
    for (std::size_t b = 0; b < exps.size(); ++b) sums[b] += a[i] * int_pow(u[0], exps[b][0]) * int_pow(u[1], exps[b][1]);
  }
  std::vector<MomentCheck> out(exps.size());
  for (std::size_t b = 0; b < exps.size(); ++b) {
    out[b].beta = exps[b];
    out[b].value = sums[b].value() * grid.cell_volume();
  }
  return out;
}

AtomReport validate_atom(const GridFunction& a, const Ball& ball, const AtomKind& kind) {
  const Grid& grid = a.grid();
  AtomReport rep;
  rep.kind = kind;
  rep.support_ball = ball;
  std::vector<bool> in(grid.size(), false);
  for (std::size_t i : ball_indices(grid, ball)) in[i] = true;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!in[i]) rep.outside_sup = std::max(rep.outside_sup, std::abs(a[i]));
  rep.support_ok = rep.outside_sup <= kSupportTol;

  const double measure = ball.measure();
  rep.size = std::isinf(kind.r) ? sup_norm(a) : lp_norm(a, kind.r);
  rep.size_bound = std::pow(measure, (std::isinf(kind.r) ? 0.0 : 1.0 / kind.r) - 1.0 / kind.p);
  rep.size_ok = rep.size <= rep.size_bound * (1 + kSizeSlack);

  rep.moments_required = kind.global || measure < 1.0;
  rep.moments = discrete_moments(a, ball.center, kind.d);
  // Nearly cancelling atoms carry roundoff at the scale of the largest
  // admissible atom, whose L¹ norm is |B|^{1−1/p}.
  const double scale = kMomentTol * lp_norm(a, 1.0) + kRoundoffFloor * std::pow(measure, 1.0 - 1.0 / kind.p);
  bool moments_ok = true;
  for (auto& m : rep.moments) {
    m.tolerance = scale * std::pow(ball.radius, m.beta[0] + m.beta[1]);
    m.pass = std::abs(m.value) <= m.tolerance;
    moments_ok = moments_ok && m.pass;
  }
  rep.overall = rep.support_ok && rep.size_ok && (!rep.moments_required || moments_ok);
  return rep;
}

GridFunction atom_poly_product(const GridFunction& a, const Ball& ball, const GridFunction& g, int s) {
  require_same_grid(a, g);
  const Grid& grid = a.grid();
  const auto idx = ball_indices(grid, ball);
  std::vector<bool> in(grid.size(), false);
  for (std::size_t i : idx) in[i] = true;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!in[i] && std::abs(a[i]) > kSupportTol) throw Error(ErrorKind::SupportViolation, "atom does not vanish outside its ball");
  const auto p = evaluate_on_ball(minimizing_polynomial(g, ball, s), grid, ball);
  GridFunction out(grid);
  for (std::size_t i : idx) out[i] = a[i] * p[i];
  return out;
}

GridFunction CZPiece::dense(const Grid& grid) const {
  GridFunction out(grid);
  for (std::size_t t = 0; t < index.size(); ++t) out[index[t]] = values[t];
  return out;
}

double CZPiece::sup() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

int grand_order(double p, int dim) { return int(std::floor(2.0 * dim / p + 1.0)); }

CZDecomposition cz_decompose(const GridFunction& f, double p, int d, std::optional<KRange> range, const CZOptions& opts) {
  const Grid& grid = f.grid();
  if (grid.dim != 1) throw Error(ErrorKind::InvalidArgument, "the Calderon-Zygmund decomposition is implemented in 1-D");
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "p must lie in (0, 1]");
  if (d < 0) throw Error(ErrorKind::UnsupportedRegularity, "degree must be nonnegative");
  f.check_finite();
  const std::size_t n = grid.per_axis();

  CZDecomposition out;
  out.maximal =
      grand_maximal(f, grand_order(p, grid.dim), opts.global ? MaximalKind::GrandGlobal : MaximalKind::GrandLocal, opts.grand)
          .values;
  out.remainder = f;
  if (range) {
    if (range->k_min > range->k_max) throw Error(ErrorKind::EmptyRange, "k_min exceeds k_max");
    out.range = *range;
  } else {
    const double top = sup_norm(out.maximal);
    if (top == 0.0) return out;
    double low = top;
    for (double v : out.maximal.samples())
      if (v > 0.0) low = std::min(low, v);
    // Largest k with 2^k below the given value.
    const auto below = [](double v) {
      int k = int(std::ceil(std::log2(v))) - 1;
      while (std::ldexp(1.0, k) >= v) --k;
      while (std::ldexp(1.0, k + 1) < v) ++k;
      return k;
    };
    out.range.k_max = below(top);
    out.range.k_min = std::min(out.range.k_max, std::max(below(low), out.range.k_max - kMaxLevels));
  }

  Cover next = whitney_cover(grid, level_mask(out.maximal, out.range.k_min), f, d, opts.global);
  std::vector<double> scratch(n, 0.0);
  std::vector<char> touched(n, 0);
  std::vector<std::size_t> touched_list;
  const auto add = [&](std::size_t s, double v) {
    if (!touched[s]) {
      touched[s] = 1;
      touched_list.push_back(s);
    }
    scratch[s] += v;
  };

  for (int k = out.range.k_min; k <= out.range.k_max; ++k) {
    Cover cur = std::move(next);
    next = whitney_cover(grid, level_mask(out.maximal, k + 1), f, d, opts.global);
    for (std::size_t s = 0; s < n; ++s) out.max_overlap = std::max(out.max_overlap, int(cur.owners[s].size()));

    // Level-(k+1) cubes meeting each level-k cube.
    std::vector<std::vector<std::uint32_t>> neighbours(cur.cubes.size());
    for (std::uint32_t j = 0; j < next.cubes.size(); ++j) {
      std::vector<std::uint32_t> seen;
      for (std::size_t s : next.cubes[j].support)
        for (auto [i, pos] : cur.owners[s]) {
          (void)pos;
          if (std::find(seen.begin(), seen.end(), i) == seen.end()) seen.push_back(i);
        }
      for (auto i : seen) neighbours[i].push_back(j);
    }

    const double scale = std::ldexp(1.0, k);
    const double noise = 64 * std::numeric_limits<double>::epsilon() * sup_norm(f);
    for (std::size_t i = 0; i < cur.cubes.size(); ++i) {
      const Cube& ci = cur.cubes[i];
      for (std::size_t s = 0; s < ci.support.size(); ++s)
        add(ci.support[s], (f[ci.support[s]] - ci.poly[s]) * ci.eta[s]);
      for (auto j : neighbours[i]) {
        const Cube& cj = next.cubes[j];
        std::vector<double> eta_i(cj.support.size(), 0.0);
        for (std::size_t s = 0; s < cj.support.size(); ++s)
          for (auto [owner, pos] : cur.owners[cj.support[s]])
            if (owner == i) eta_i[s] = ci.eta[pos];
        std::vector<double> y(cj.support.size());
        for (std::size_t s = 0; s < y.size(); ++s) y[s] = (f[cj.support[s]] - cj.poly[s]) * eta_i[s];
        std::vector<double> q(y.size(), 0.0);
        if (cj.subtract) q = weighted_fit(grid, cj.support, cj.eta, y, cj.center, cj.ball.radius, d);
        for (std::size_t s = 0; s < y.size(); ++s) add(cj.support[s], -y[s] * cj.eta[s] + q[s] * cj.eta[s]);
      }

      CZPiece piece;
      piece.k = k;
      piece.i = int(i);
      piece.cube_first = ci.first;
      piece.cube_length = ci.length;
      piece.moments_subtracted = ci.subtract;
      std::sort(touched_list.begin(), touched_list.end());
      double reach = ci.ball.radius;
      for (std::size_t s : touched_list) {
        // Entries at rounding level (cells where the local fit is exact) are flushed.
        const double v = std::abs(scratch[s]) <= noise ? 0.0 : scratch[s];
        piece.index.push_back(s);
        piece.values.push_back(v);
        reach = std::max(reach, std::abs(grid.wrap_offset(grid.position(s)[0], ci.center)) + grid.spacing() / 2.0);
        scratch[s] = 0.0;
        touched[s] = 0;
      }
      touched_list.clear();
      piece.ball = Ball({ci.center, 0.0}, std::min(reach, grid.L / 2.0), 1);
      GridFunction dense = piece.dense(grid);
      out.remainder -= dense;
      if (piece.ball.measure() < 1.0 || opts.global) piece.moments = discrete_moments(dense, piece.ball.center, d);
      out.C = std::max(out.C, piece.sup() / scale);
      out.pieces.push_back(std::move(piece));
    }
  }
  return out;
}

StructureSplit structure_split(const GridFunction& f, double p, const CZOptions& opts) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "p must lie in (0, 1)");
  const Grid& grid = f.grid();
  const int d = int(std::floor(grid.dim * (1.0 / p - 1.0) + 1e-12));
  StructureSplit out;
  out.cz = cz_decompose(f, p, d, std::nullopt, opts);
  out.f0 = GridFunction(grid);
  out.f1 = GridFunction(grid);
  const GridFunction& m = out.cz.maximal;
  const double C = out.cz.C;
  CompensatedSum l0, l1;
  for (std::size_t t = 0; t < out.cz.pieces.size(); ++t) {
    const CZPiece& piece = out.cz.pieces[t];
    std::size_t in_e = 0;
    for (std::size_t s = 0; s < piece.cube_length; ++s)
      if (m[(piece.cube_first + s) % grid.per_axis()] < 1.0) ++in_e;
    const bool zero = 2 * in_e >= piece.cube_length;
    out.in_I0.push_back(zero);
    const double measure = piece.ball.measure();
    const double base = C * std::ldexp(1.0, piece.k);
    const double lambda = zero ? base * measure : base * std::pow(measure, 1.0 / p);
    GridFunction h = piece.dense(grid);
    (zero ? out.f0 : out.f1) += h;
    AtomTerm term;
    term.lambda = lambda;
    term.piece = t;
    const AtomKind kind = opts.global ? AtomKind::global_atom(zero ? 1.0 : p, std::numeric_limits<double>::infinity(), d)
                                      : AtomKind::local(zero ? 1.0 : p, std::numeric_limits<double>::infinity(), d);
    term.report = validate_atom(lambda > 0.0 ? h * (1.0 / lambda) : h, piece.ball, kind);
    if (zero) {
      l0 += std::abs(lambda);
      out.atoms0.push_back(std::move(term));
    } else {
      l1 += std::pow(std::abs(lambda), p);
      out.atoms1.push_back(std::move(term));
    }
  }
  out.lambda0_sum = l0.value();
  out.lambda1_p = std::pow(l1.value(), 1.0 / p);
  return out;
}

}  // namespace renorm
