#include "renorm/campanato.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "renorm/numeric.hpp"

namespace renorm {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr int kMaxDegree = 6;

std::size_t basis_size(int d, int dim) {
  return dim == 1 ? std::size_t(d + 1) : std::size_t((d + 1) * (d + 2) / 2);
}

double monomial(const std::array<int, 2>& beta, const Point& u) {
  double v = 1.0;
  for (int a = 0; a < beta[0]; ++a) v *= u[0];
  for (int a = 0; a < beta[1]; ++a) v *= u[1];
  return v;
}

void check_degree(int d) {
  if (d < 0 || d > kMaxDegree)
    throw Error(ErrorKind::UnsupportedRegularity, "polynomial degree must lie in [0, " + std::to_string(kMaxDegree) + "]");
}

// Design matrix of scaled monomials at the given scaled offsets.
Eigen::MatrixXd design(const std::vector<Point>& scaled, int d, int dim) {
  const auto exps = monomial_exponents(d, dim);
  Eigen::MatrixXd v(Eigen::Index(scaled.size()), Eigen::Index(exps.size()));
  for (std::size_t i = 0; i < scaled.size(); ++i)
    for (std::size_t b = 0; b < exps.size(); ++b) v(Eigen::Index(i), Eigen::Index(b)) = monomial(exps[b], scaled[i]);
  return v;
}

double condition_of_r(const Eigen::MatrixXd& r) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(s.size() - 1);
}

// Orthonormal basis (columns) of the polynomial space sampled on a point set.
struct LocalBasis {
  Eigen::MatrixXd q;
  Eigen::MatrixXd r;
};

LocalBasis local_basis(const std::vector<Point>& scaled, int d, int dim) {
  const std::size_t k = basis_size(d, dim);
  if (scaled.size() < k)
    throw Error(ErrorKind::TooFewSamples, "ball holds " + std::to_string(scaled.size()) + " samples, degree " +
                                              std::to_string(d) + " needs " + std::to_string(k));
  Eigen::MatrixXd v = design(scaled, d, dim);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  LocalBasis out;
  out.r = qr.matrixQR().topRows(Eigen::Index(k)).triangularView<Eigen::Upper>();
  if (condition_of_r(out.r) > kMaxCondition)
    throw Error(ErrorKind::SingularSystem, "polynomial least-squares system is too ill-conditioned");
  out.q = qr.householderQ() * Eigen::MatrixXd::Identity(v.rows(), Eigen::Index(k));
  return out;
}

std::vector<Point> scaled_offsets(const Grid& grid, const Ball& ball, const std::vector<std::size_t>& idx) {
  std::vector<Point> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    const Point x = grid.position(i);
    Point u{grid.wrap_offset(x[0], ball.center[0]) / ball.radius, 0.0};
    if (grid.dim == 2) u[1] = grid.wrap_offset(x[1], ball.center[1]) / ball.radius;
    out.push_back(u);
  }
  return out;
}

void check_ball(const Grid& grid, const Ball& ball) {
  if (ball.dim != grid.dim) throw Error(ErrorKind::GridMismatch, "ball dimension differs from the grid");
}

// Stencil of a node-centered ball: rows δ0 with the contiguous δ1 range [-w, w-1].
// A sample at index offset δ lies at (δ + 1/2)h from the node.
struct Stencil {
  double radius = 0.0;
  std::vector<long> rows;
  std::vector<long> half_width;  // 2-D only
  std::vector<Point> scaled;     // offsets / radius, in gather order
  std::size_t count = 0;
};

Stencil make_stencil(const Grid& grid, double radius) {
  Stencil s;
  s.radius = radius;
  const double h = grid.spacing();
  const long reach = long(std::ceil(radius / h)) + 1;
  for (long a = -reach; a <= reach; ++a) {
    const double x0 = (double(a) + 0.5) * h;
    if (std::abs(x0) >= radius) continue;
    if (grid.dim == 1) {
      s.rows.push_back(a);
      s.scaled.push_back({x0 / radius, 0.0});
      continue;
    }
    long w = 0;
    while (true) {
      const double x1 = (double(w) + 0.5) * h;
      if (x0 * x0 + x1 * x1 >= radius * radius) break;
      ++w;
    }
    if (w == 0) continue;
    s.rows.push_back(a);
    s.half_width.push_back(w);
    for (long b = -w; b < w; ++b) s.scaled.push_back({x0 / radius, (double(b) + 0.5) * h / radius});
  }
  s.count = s.scaled.size();
  return s;
}

struct BallStats {
  Point center{0.0, 0.0};
  double radius = 0.0;
  double measure = 0.0;      // continuum |B|
  double raw = 0.0;          // (⨍|g|^r)^{1/r}
  double osc = 0.0;          // (⨍|g − P_B g|^r)^{1/r}; NaN when P_B is unavailable
};

// Visits every ball of the family with sample-mean statistics. `need_osc(radius, measure)`
// says whether the polynomial oscillation is wanted for that radius.
template <class NeedOsc, class Visit>
void scan_family(const GridFunction& g, const BallFamily& family, int d, int r, NeedOsc&& need_osc, Visit&& visit) {
  const Grid& grid = g.grid();
  const long n = long(grid.per_axis());
  const double h = grid.spacing();
  const std::size_t centers = std::size_t(n) / family.center_stride;
  const double* data = g.data().data();
  const auto wrap = [n](long i) { return ((i % n) + n) % n; };
  std::vector<double> buf;
  std::vector<long> row_index;
  for (double radius : family.radii) {
    const Stencil st = make_stencil(grid, radius);
    if (st.count == 0) continue;
    const double measure = Ball(Point{0.0, 0.0}, radius, grid.dim).measure();
    LocalBasis basis;
    bool have_basis = false;
    if (need_osc(radius, measure) && st.count >= basis_size(d, grid.dim)) {
      basis = local_basis(st.scaled, d, grid.dim);
      have_basis = true;
    }
    buf.resize(st.count);
    row_index.resize(st.rows.size());
    Eigen::VectorXd coef, proj;
    for (std::size_t c0 = 0; c0 < centers; ++c0) {
      const long n0 = long(c0 * family.center_stride);
      for (std::size_t row = 0; row < st.rows.size(); ++row) row_index[row] = wrap(n0 + st.rows[row]);
      for (std::size_t c1 = 0; c1 < (grid.dim == 1 ? 1 : centers); ++c1) {
        const long n1 = long(c1 * family.center_stride);
        double* out = buf.data();
        if (grid.dim == 1) {
          for (long i0 : row_index) *out++ = data[i0];
        } else {
          for (std::size_t row = 0; row < st.rows.size(); ++row) {
            const double* line = data + row_index[row] * n;
            const long w = st.half_width[row];
            // The row segment [n1 − w, n1 + w) wraps at most once.
            long first = wrap(n1 - w);
            long len = 2 * w;
            while (len > 0) {
              const long chunk = std::min(len, n - first);
              out = std::copy(line + first, line + first + chunk, out);
              len -= chunk;
              first = 0;
            }
          }
        }
        BallStats s;
        s.center = {double(n0) * h, grid.dim == 2 ? double(n1) * h : 0.0};
        s.radius = radius;
        s.measure = measure;
        double raw = 0.0;
        if (r == 1)
          for (double v : buf) raw += std::abs(v);
        else
          for (double v : buf) raw += v * v;
        s.raw = raw / double(st.count);
        if (r == 2) s.raw = std::sqrt(s.raw);
        s.osc = std::numeric_limits<double>::quiet_NaN();
        if (have_basis) {
          Eigen::Map<const Eigen::VectorXd> v(buf.data(), Eigen::Index(st.count));
          coef.noalias() = basis.q.transpose() * v;
          proj.noalias() = basis.q * coef;
          double osc = 0.0;
          for (std::size_t i = 0; i < st.count; ++i) {
            const double e = buf[i] - proj(Eigen::Index(i));
            osc += r == 1 ? std::abs(e) : e * e;
          }
          s.osc = osc / double(st.count);
          if (r == 2) s.osc = std::sqrt(s.osc);
        }
        visit(s);
      }
    }
  }
}

BallFamily resolve_family(const Grid& grid, const BallFamily& f) {
  BallFamily out = f.radii.empty() ? BallFamily::standard(grid) : f;
  if (f.center_stride != 0) out.center_stride = f.center_stride;
  if (out.center_stride == 0) out.center_stride = BallFamily::standard(grid).center_stride;
  if (grid.per_axis() % out.center_stride != 0)
    throw Error(ErrorKind::InvalidArgument, "center stride must divide the samples per axis");
  for (double r : out.radii)
    if (!(r > 0.0) || r > grid.L / 2.0) throw Error(ErrorKind::InvalidArgument, "ball radii must lie in (0, L/2]");
  if (out.radii.empty()) throw Error(ErrorKind::EmptyRange, "empty ball family");
  return out;
}

double max_or_zero(double a, double b) { return std::isnan(b) ? a : std::max(a, b); }

long integer_part(double x) { return long(std::floor(x + 1e-12)); }

bool near_integer(double x) { return std::abs(x - std::round(x)) < 1e-12; }

}  // namespace

std::vector<std::array<int, 2>> monomial_exponents(int d, int dim) {
  std::vector<std::array<int, 2>> out;
  for (int total = 0; total <= d; ++total) {
    if (dim == 1) {
      out.push_back({total, 0});
      continue;
    }
    for (int b = 0; b <= total; ++b) out.push_back({total - b, b});
  }
  return out;
}

double PolyCoeffs::at_offset(const Point& offset) const {
  const auto exps = monomial_exponents(degree, dim);
  double v = 0.0;
  for (std::size_t b = 0; b < exps.size(); ++b) v += coeffs[b] * monomial(exps[b], offset);
  return v;
}

PolyCoeffs minimizing_polynomial(const GridFunction& g, const Ball& ball, int d) {
  const Grid& grid = g.grid();
  check_ball(grid, ball);
  check_degree(d);
  const auto idx = ball_indices(grid, ball);
  if (idx.empty()) throw Error(ErrorKind::DegenerateBall, "ball contains no grid sample");
  const LocalBasis basis = local_basis(scaled_offsets(grid, ball, idx), d, grid.dim);
  Eigen::VectorXd v(Eigen::Index(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) v(Eigen::Index(i)) = g[idx[i]];
  const Eigen::VectorXd a = basis.r.triangularView<Eigen::Upper>().solve(basis.q.transpose() * v);
  PolyCoeffs p;
  p.degree = d;
  p.dim = grid.dim;
  p.center = ball.center;
  const auto exps = monomial_exponents(d, grid.dim);
  p.coeffs.resize(exps.size());
  for (std::size_t b = 0; b < exps.size(); ++b)
    p.coeffs[b] = a(Eigen::Index(b)) / std::pow(ball.radius, exps[b][0] + exps[b][1]);
  return p;
}

GridFunction evaluate_on_ball(const PolyCoeffs& p, const Grid& grid, const Ball& ball) {
  check_ball(grid, ball);
  GridFunction out(grid);
  for (std::size_t i : ball_indices(grid, ball)) {
    const Point x = grid.position(i);
    Point u{grid.wrap_offset(x[0], p.center[0]), 0.0};
    if (grid.dim == 2) u[1] = grid.wrap_offset(x[1], p.center[1]);
    out[i] = p.at_offset(u);
  }
  return out;
}

PolySupBound minimizing_poly_sup_bound(const GridFunction& g, const Ball& ball, int d) {
  const auto p = minimizing_polynomial(g, ball, d);
  const auto values = evaluate_on_ball(p, g.grid(), ball);
  const auto idx = ball_indices(g.grid(), ball);
  PolySupBound out;
  CompensatedSum s;
  for (std::size_t i : idx) {
    out.sup_p = std::max(out.sup_p, std::abs(values[i]));
    s += std::abs(g[i]);
  }
  out.mean_abs_g = s.value() / double(idx.size());
  out.ratio = out.mean_abs_g > 0.0 ? out.sup_p / out.mean_abs_g : 0.0;
  return out;
}

BallFamily BallFamily::standard(const Grid& grid) {
  BallFamily f;
  f.center_stride = std::size_t(1) << std::max(grid.J - 4, 0);
  const double h = grid.spacing();
  for (double r = 2 * h; r <= grid.L / 2.0 * (1 + 1e-12); r *= 2) f.radii.push_back(r);
  return f;
}

DualNormSpec DualNormSpec::campanato_local(double alpha, int r, int d) {
  DualNormSpec s;
  s.kind = DualKind::CampanatoLocal;
  s.alpha = alpha;
  s.r = r;
  s.d = d;
  return s;
}

DualNormSpec DualNormSpec::lipschitz(double alpha) {
  DualNormSpec s;
  s.kind = DualKind::Lipschitz;
  s.alpha = alpha;
  return s;
}

DualNormSpec DualNormSpec::bmo() {
  DualNormSpec s;
  s.kind = DualKind::Bmo;
  return s;
}

DualNormSpec DualNormSpec::bmo_phi() {
  DualNormSpec s;
  s.kind = DualKind::BmoPhi;
  return s;
}

DualNormSpec DualNormSpec::BMO_phi() {
  DualNormSpec s;
  s.kind = DualKind::BMOPhi;
  return s;
}

DualNormSpec DualNormSpec::orlicz_campanato_local(const OrliczSpec& spec, int d) {
  DualNormSpec s;
  s.kind = DualKind::OrliczCampanatoLocal;
  s.orlicz = spec;
  s.d = d;
  return s;
}

DualNormSpec DualNormSpec::orlicz_campanato_global(const OrliczSpec& spec, int d) {
  DualNormSpec s = orlicz_campanato_local(spec, d);
  s.kind = DualKind::OrliczCampanatoGlobal;
  return s;
}

DualNormSpec DualNormSpec::bmo_alpha(double alpha, int d) {
  DualNormSpec s;
  s.kind = DualKind::BmoAlpha;
  s.alpha = alpha;
  s.d = d;
  return s;
}

std::string DualNormSpec::tag() const {
  std::ostringstream os;
  switch (kind) {
    case DualKind::CampanatoLocal:
      os << "campanato_local(alpha=" << alpha << ",r=" << r << ",d=" << d << ")";
      break;
    case DualKind::Lipschitz:
      os << "lipschitz(" << alpha << ")";
      break;
    case DualKind::Bmo:
      os << "bmo";
      break;
    case DualKind::BmoPhi:
      os << "bmo_phi";
      break;
    case DualKind::BMOPhi:
      os << "BMO_phi";
      break;
    case DualKind::OrliczCampanatoLocal:
      os << "orlicz_campanato_local(" << orlicz.name() << ",d=" << d << ")";
      break;
    case DualKind::OrliczCampanatoGlobal:
      os << "orlicz_campanato_global(" << orlicz.name() << ",d=" << d << ")";
      break;
    case DualKind::BmoAlpha:
      os << "bmo_alpha(" << alpha << ",d=" << d << ")";
      break;
  }
  return os.str();
}

double lipschitz_seminorm(const GridFunction& g, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(ErrorKind::UnsupportedRegularity, "Lipschitz exponent must be positive");
  const Grid& grid = g.grid();
  const long n = long(grid.per_axis());
  const double h = grid.spacing();
  const int k = int(integer_part(alpha)) + 1;
  std::vector<double> binom(std::size_t(k) + 1, 1.0);
  for (int i = 1; i <= k; ++i) binom[std::size_t(i)] = binom[std::size_t(i - 1)] * double(k - i + 1) / double(i);

  // Step multiples: every integer up to 16, then doubling.
  std::vector<long> steps;
  for (long m = 1; m <= 16; ++m) steps.push_back(m);
  for (long m = 32; m < n; m *= 2) steps.push_back(m);
  std::vector<std::array<long, 2>> dirs{{1, 0}};
  if (grid.dim == 2) dirs = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};

  const auto wrap = [n](long i) { return ((i % n) + n) % n; };
  const double* data = g.data().data();
  const long rows = grid.dim == 1 ? 1 : n;
  std::vector<double> coef(std::size_t(k) + 1);
  for (int i = 0; i <= k; ++i) coef[std::size_t(i)] = ((k - i) % 2 == 0 ? 1.0 : -1.0) * binom[std::size_t(i)];
  // Sample (row, col) + i·m·dir lives at row_of[i] and col (col + shift[i]) mod n.
  std::vector<long> row_off(std::size_t(k) + 1), shift(std::size_t(k) + 1);
  std::vector<double> diff(static_cast<std::size_t>(n));
  double best = 0.0;
  for (const auto& dir : dirs) {
    const double unit = std::hypot(double(dir[0]), double(dir[1])) * h;
    for (long m : steps) {
      const double len = double(m) * unit;
      if (len > grid.L / 4.0 * (1 + 1e-12)) break;
      const double scale = std::pow(len, -alpha);
      // 1-D: the single row is the whole signal and the step moves along it.
      const long row_step = grid.dim == 1 ? 0 : m * dir[0];
      const long col_step = grid.dim == 1 ? m * dir[0] : m * dir[1];
      for (int i = 0; i <= k; ++i) shift[std::size_t(i)] = wrap(long(i) * col_step);
      double peak = 0.0;
      for (long r0 = 0; r0 < rows; ++r0) {
        for (int i = 0; i <= k; ++i) row_off[std::size_t(i)] = wrap(r0 + long(i) * row_step) * n;
        std::fill(diff.begin(), diff.end(), 0.0);
        for (int i = 0; i <= k; ++i) {
          const double* line = data + row_off[std::size_t(i)];
          const double c = coef[std::size_t(i)];
          const long sft = shift[std::size_t(i)];
          for (long c1 = 0; c1 < n - sft; ++c1) diff[std::size_t(c1)] += c * line[c1 + sft];
          for (long c1 = n - sft; c1 < n; ++c1) diff[std::size_t(c1)] += c * line[c1 + sft - n];
        }
        for (double v : diff) peak = std::max(peak, std::abs(v));
      }
      best = std::max(best, peak * scale);
    }
  }
  return best;
}

DualBranches dual_norm_branches(const GridFunction& g, const DualNormSpec& spec) {
  const Grid& grid = g.grid();
  g.check_finite();
  DualBranches out;
  if (spec.kind == DualKind::Lipschitz) {
    out.small = lipschitz_seminorm(g, spec.alpha);
    out.large = sup_norm(g);
    return out;
  }

  DualNormSpec s = spec;
  if (s.kind == DualKind::Bmo) {
    s = DualNormSpec::campanato_local(0.0, 1, 0);
    s.family = spec.family;
  }
  if (s.kind == DualKind::BmoPhi || s.kind == DualKind::BMOPhi) {
    s.d = 0;
    s.r = 1;
  }
  if (s.kind == DualKind::OrliczCampanatoLocal || s.kind == DualKind::OrliczCampanatoGlobal ||
      s.kind == DualKind::BmoAlpha)
    s.r = 1;
  if (s.r != 1 && s.r != 2) throw Error(ErrorKind::InvalidArgument, "Campanato exponent r must be 1 or 2");
  if (!(s.alpha >= 0.0) || !std::isfinite(s.alpha)) throw Error(ErrorKind::UnsupportedRegularity, "alpha must be >= 0");
  check_degree(s.d);
  const bool orlicz = s.kind == DualKind::OrliczCampanatoLocal || s.kind == DualKind::OrliczCampanatoGlobal;
  if (orlicz && s.orlicz.musielak())
    throw Error(ErrorKind::InvalidArgument, "Orlicz-Campanato norms need an x-independent growth function");

  const BallFamily family = resolve_family(grid, s.family);
  const double n = double(grid.dim);
  const double na = n * s.alpha;
  std::vector<std::pair<double, double>> indicator_cache;  // (measure, ‖1_B‖)
  const auto indicator = [&](double measure) {
    for (const auto& [m, v] : indicator_cache)
      if (m == measure) return v;
    const double v = indicator_norm(s.orlicz, measure);
    indicator_cache.emplace_back(measure, v);
    return v;
  };

  const auto need_osc = [&](double radius, double measure) {
    switch (s.kind) {
      case DualKind::BMOPhi:
      case DualKind::OrliczCampanatoGlobal:
        return true;
      case DualKind::BmoAlpha:
        return 2.0 * radius < 1.0;
      default:
        return measure < 1.0;
    }
  };
  scan_family(g, family, s.d, s.r, need_osc, [&](const BallStats& b) {
    const double mb = b.measure;
    switch (s.kind) {
      case DualKind::CampanatoLocal: {
        const double w = std::pow(mb, -s.alpha);
        if (mb < 1.0)
          out.small = max_or_zero(out.small, w * b.osc);
        else
          out.large = std::max(out.large, w * b.raw);
        break;
      }
      case DualKind::BmoPhi: {
        const double w = std::log(std::numbers::e + 1.0 / mb);
        if (mb < 1.0)
          out.small = max_or_zero(out.small, w * b.osc);
        else
          out.large = std::max(out.large, w * b.raw);
        break;
      }
      case DualKind::BMOPhi:
        out.small = max_or_zero(out.small, std::log(std::numbers::e + 1.0 / mb) * b.osc);
        break;
      case DualKind::OrliczCampanatoLocal: {
        const double w = mb / indicator(mb);
        if (mb < 1.0)
          out.small = max_or_zero(out.small, w * b.osc);
        else
          out.large = std::max(out.large, w * b.raw);
        break;
      }
      case DualKind::OrliczCampanatoGlobal:
        out.small = max_or_zero(out.small, mb / indicator(mb) * b.osc);
        break;
      case DualKind::BmoAlpha: {
        const double cr = std::hypot(b.center[0], b.center[1]) + b.radius;
        double inv_psi = std::pow(1.0 + cr, na) / std::pow(mb, s.alpha);
        if (na > 0.0 && near_integer(na)) inv_psi *= std::log(std::numbers::e + cr);
        if (2.0 * b.radius < 1.0)
          out.small = max_or_zero(out.small, inv_psi * b.osc);
        else
          out.large = std::max(out.large, inv_psi * b.raw);
        break;
      }
      default:
        break;
    }
  });
  return out;
}

double dual_norm(const GridFunction& g, const DualNormSpec& spec) { return dual_norm_branches(g, spec).total(); }

MultiplierReport multiplier_inequality_check(const GridFunction& g, const GridFunction& f, double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "p must lie in (0, 1)");
  require_same_grid(g, f);
  const double n = double(g.grid().dim);
  const double alpha = 1.0 / p - 1.0;
  const auto lip = DualNormSpec::lipschitz(n * alpha);
  const int d = int(integer_part(n * alpha));
  MultiplierReport out;
  out.lhs = dual_norm(pointwise_product(g, f), lip);
  const double g_side = sup_norm(g) + dual_norm(g, DualNormSpec::orlicz_campanato_local(OrliczSpec::phi_p(p), d));
  out.rhs = g_side * dual_norm(f, lip);
  out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
  return out;
}

}  // namespace renorm
