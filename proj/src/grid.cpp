#include "renorm/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

#include "renorm/numeric.hpp"

namespace renorm {

Grid::Grid(int dim_, int J_, int L_) : dim(dim_), J(J_), L(L_) {
  if (dim != 1 && dim != 2) throw Error(ErrorKind::InvalidGrid, "dim must be 1 or 2");
  if (J < 0 || J > 24) throw Error(ErrorKind::InvalidGrid, "J must lie in [0, 24]");
  if (L < 1) throw Error(ErrorKind::InvalidGrid, "L must be >= 1");
  if (dim == 2 && J > 12) throw Error(ErrorKind::InvalidGrid, "2-D grids support J <= 12");
}

double Grid::spacing() const { return std::ldexp(1.0, -J); }
double Grid::cell_volume() const { return std::ldexp(1.0, -J * dim); }
double Grid::volume() const { return dim == 1 ? L : double(L) * L; }

std::array<std::size_t, 2> Grid::unflatten(std::size_t idx) const {
  if (dim == 1) return {idx, 0};
  const std::size_t n = per_axis();
  return {idx / n, idx % n};
}

Point Grid::position(std::size_t idx) const {
  const double h = spacing();
  const auto [i0, i1] = unflatten(idx);
  if (dim == 1) return {(double(i0) + 0.5) * h, 0.0};
  return {(double(i0) + 0.5) * h, (double(i1) + 0.5) * h};
}

double Grid::wrap_offset(double a, double b) const {
  double d = std::fmod(a - b, double(L));
  if (d >= 0.5 * L) d -= L;
  if (d < -0.5 * L) d += L;
  return d;
}

double Grid::periodic_distance(const Point& a, const Point& b) const {
  const double d0 = wrap_offset(a[0], b[0]);
  if (dim == 1) return std::abs(d0);
  const double d1 = wrap_offset(a[1], b[1]);
  return std::hypot(d0, d1);
}

GridFunction::GridFunction(const Grid& grid, double fill) : grid_(grid), samples_(grid.size(), fill) {}

GridFunction::GridFunction(const Grid& grid, std::vector<double> samples)
    : grid_(grid), samples_(std::move(samples)) {
  if (samples_.size() != grid_.size())
    throw Error(ErrorKind::GridMismatch, "sample count does not match grid");
}

GridFunction GridFunction::sample(const Grid& grid, const std::function<double(const Point&)>& fn) {
  GridFunction f(grid);
  for (std::size_t i = 0; i < f.size(); ++i) f.samples_[i] = fn(grid.position(i));
  return f;
}

GridFunction GridFunction::cell_average(const Grid& grid, const std::function<double(double)>& antiderivative) {
  if (grid.dim != 1) throw Error(ErrorKind::InvalidArgument, "cell_average is 1-D only");
  GridFunction f(grid);
  const double h = grid.spacing();
  double left = antiderivative(0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double right = antiderivative(double(i + 1) * h);
    f.samples_[i] = (right - left) / h;
    left = right;
  }
  return f;
}

void GridFunction::check_finite() const {
  for (double v : samples_)
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "grid function has NaN or Inf");
}

void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid() == b.grid())) throw Error(ErrorKind::GridMismatch, "operands live on different grids");
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += o.samples_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] -= o.samples_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : samples_) v *= s;
  return *this;
}

GridFunction pointwise_product(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  GridFunction out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

GridFunction abs(const GridFunction& f) {
  GridFunction out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::abs(f[i]);
  return out;
}

double integrate(const GridFunction& f) { return f.grid().cell_volume() * compensated_sum(f.samples()); }

double inner_product(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return a.grid().cell_volume() * s.value();
}

double sup_norm(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.samples()) m = std::max(m, std::abs(v));
  return m;
}

double lp_norm(const GridFunction& f, double p) {
  if (!(p > 0.0)) throw Error(ErrorKind::InvalidArgument, "lp_norm needs p > 0");
  const double m = sup_norm(f);
  if (m == 0.0) return 0.0;
  CompensatedSum s;
  for (double v : f.samples()) s += std::pow(std::abs(v) / m, p);
  return m * std::pow(f.grid().cell_volume() * s.value(), 1.0 / p);
}

double mean(const GridFunction& f) { return integrate(f) / f.grid().volume(); }

double DyadicCube::side() const { return std::ldexp(1.0, -j); }
double DyadicCube::volume() const { return std::ldexp(1.0, -j * dim); }

Point DyadicCube::center() const {
  const double s = side();
  return {(double(k[0]) + 0.5) * s, dim == 2 ? (double(k[1]) + 0.5) * s : 0.0};
}

Ball::Ball(Point c, double r, int d) : center(c), radius(r), dim(d) {
  if (!(r > 0.0)) throw Error(ErrorKind::DegenerateBall, "radius must be positive");
  if (d != 1 && d != 2) throw Error(ErrorKind::InvalidArgument, "ball dim must be 1 or 2");
}

double Ball::measure() const { return dim == 1 ? 2.0 * radius : std::numbers::pi * radius * radius; }

bool contains(const Grid& grid, const Ball& ball, std::size_t idx) {
  return grid.periodic_distance(grid.position(idx), ball.center) < ball.radius;
}

std::vector<std::size_t> ball_indices(const Grid& grid, const Ball& ball) {
  std::vector<std::size_t> out;
  const double h = grid.spacing();
  const long n = long(grid.per_axis());
  // Scan only the bounding box of the ball; indices are wrapped periodically.
  const long span = std::min<long>(n, long(std::ceil(ball.radius / h)) + 1);
  const auto axis_range = [&](double c) {
    const long mid = long(std::floor(c / h));
    return std::pair<long, long>{mid - span, mid + span};
  };
  const auto wrap = [n](long i) { return std::size_t(((i % n) + n) % n); };
  auto [a0, b0] = axis_range(ball.center[0]);
  if (b0 - a0 + 1 > n) b0 = a0 + n - 1;
  if (grid.dim == 1) {
    for (long i = a0; i <= b0; ++i) {
      const std::size_t w = wrap(i);
      if (contains(grid, ball, w)) out.push_back(w);
    }
  } else {
    auto [a1, b1] = axis_range(ball.center[1]);
    if (b1 - a1 + 1 > n) b1 = a1 + n - 1;
    for (long i = a0; i <= b0; ++i)
      for (long k = a1; k <= b1; ++k) {
        const std::size_t w = grid.flatten(wrap(i), wrap(k));
        if (contains(grid, ball, w)) out.push_back(w);
      }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GridFunction restrict_to_ball(const GridFunction& f, const Ball& ball) {
  const auto idx = ball_indices(f.grid(), ball);
  if (idx.empty()) throw Error(ErrorKind::DegenerateBall, "ball contains no grid sample");
  GridFunction out(f.grid());
  for (std::size_t i : idx) out[i] = f[i];
  return out;
}

Ball cube_to_support_ball(const DyadicCube& cube, double m) {
  if (m < 1.0) throw Error(ErrorKind::InvalidArgument, "dilation m must be >= 1");
  return Ball(cube.center(), m * cube.side() * std::sqrt(double(cube.dim)) / 2.0, cube.dim);
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorKind::Io, "truncated header");
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

}  // namespace

void write_binary(std::ostream& os, const GridFunction& f) {
  const Grid& g = f.grid();
  put_u32(os, std::uint32_t(g.dim));
  put_u32(os, std::uint32_t(g.J));
  put_u32(os, std::uint32_t(g.L));
  put_u32(os, 0);
  for (double v : f.samples()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
  }
  if (!os) throw Error(ErrorKind::Io, "write failed");
}

GridFunction read_binary(std::istream& is) {
  const int dim = int(std::int32_t(get_u32(is)));
  const int J = int(std::int32_t(get_u32(is)));
  const int L = int(std::int32_t(get_u32(is)));
  (void)get_u32(is);
  Grid grid(dim, J, L);
  std::vector<double> data(grid.size());
  for (double& v : data) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw Error(ErrorKind::Io, "truncated sample data");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
    v = std::bit_cast<double>(bits);
  }
  GridFunction f(grid, std::move(data));
  f.check_finite();
  return f;
}

void write_csv(std::ostream& os, const GridFunction& f) {
  os << "index,value\n";
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < f.size(); ++i) os << i << ',' << f[i] << '\n';
  os.precision(old);
}

}  // namespace renorm
