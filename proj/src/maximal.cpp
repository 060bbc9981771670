#include "renorm/maximal.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <deque>

#include "renorm/numeric.hpp"
#include "renorm/spectral.hpp"

namespace renorm {

namespace {

double cardinal_bspline(int k, double u) {
  const double half = 0.5 * k;
  if (u <= -half || u >= half) {
    if (k == 1 && std::abs(u) == half) return 0.5;
    return 0.0;
  }
  if (k == 1) return 1.0;
  double s = 0.0, binom = 1.0, fact = 1.0;
  for (int i = 1; i < k; ++i) fact *= i;
  for (int i = 0; i <= k; ++i) {
    const double t = u + half - i;
    if (t > 0) s += (i % 2 ? -1.0 : 1.0) * binom * std::pow(t, k - 1);
    binom = binom * (k - i) / (i + 1);
  }
  return std::max(0.0, s / fact);
}

// Periodized, discretely normalized samples of one component at scale s along one axis.
std::vector<double> component_samples(const Grid& grid, const BSplineComponent& c, double s) {
  const std::size_t n = grid.per_axis();
  const double h = grid.spacing();
  const double L = grid.L;
  std::vector<double> q(n, 0.0);
  const double reach = s * c.radius;
  const double center = s * c.shift;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.wrap_offset(double(i) * h, 0.0);
    const long m_lo = long(std::floor((center - reach - x) / L));
    const long m_hi = long(std::ceil((center + reach - x) / L));
    double v = 0.0;
    for (long m = m_lo; m <= m_hi; ++m) v += bspline_profile(c.order, c.radius, c.shift, (x + double(m) * L) / s) / s;
    q[i] = v;
  }
  const double mass = h * compensated_sum(q);
  if (mass > 0.0)
    for (double& v : q) v /= mass;
  return q;
}

std::vector<double> offsets(const Grid& grid) {
  std::vector<double> x(grid.per_axis());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = grid.wrap_offset(double(i) * grid.spacing(), 0.0);
  return x;
}

std::vector<double> profile_samples(const Grid& grid, const Mollifier& m, double s, const std::vector<double>& coeffs) {
  std::vector<double> total(grid.per_axis(), 0.0);
  for (std::size_t c = 0; c < m.components().size(); ++c) {
    const auto q = component_samples(grid, m.components()[c], s);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += coeffs[c] * q[i];
  }
  return total;
}

// Coefficients giving unit mass and vanishing even moments 2..2M for components
// whose moments are supplied in `moments(k, m)` (k = 0..M even orders).
std::vector<double> solve_moment_system(const Eigen::MatrixXd& moments) {
  const Eigen::Index M = moments.rows();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(M);
  rhs(0) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(moments);
  if (!lu.isInvertible()) throw Error(ErrorKind::SingularSystem, "moment system is singular");
  Eigen::VectorXd c = lu.solve(rhs);
  return {c.data(), c.data() + c.size()};
}

void sliding_max(std::vector<double>& v, std::size_t stride, std::size_t n, std::size_t w, std::vector<double>& buf) {
  // Periodic window max of half-width w over v[0], v[stride], ..., in place.
  if (w == 0) return;
  if (2 * w + 1 >= n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, v[i * stride]);
    for (std::size_t i = 0; i < n; ++i) v[i * stride] = m;
    return;
  }
  buf.resize(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = v[i * stride];
  std::deque<std::size_t> dq;  // indices into the extended sequence, values decreasing
  const std::size_t total = n + 2 * w;
  auto at = [&](std::size_t e) { return buf[(e + n - w) % n]; };
  for (std::size_t e = 0; e < total; ++e) {
    while (!dq.empty() && at(dq.back()) <= at(e)) dq.pop_back();
    dq.push_back(e);
    if (e >= 2 * w) {
      const std::size_t out = e - 2 * w;  // window [out, out + 2w] is centered at out + w -> index out
      while (dq.front() < out) dq.pop_front();
      v[out * stride] = at(dq.front());
    }
  }
}

void spatial_sup(GridFunction& f, double s) {
  const Grid& grid = f.grid();
  const double h = grid.spacing();
  const double reach = grid.dim == 1 ? s : s / std::sqrt(2.0);
  const long wl = long(std::ceil(reach / h - 1e-12)) - 1;
  if (wl <= 0) return;
  const std::size_t w = std::size_t(wl);
  const std::size_t n = grid.per_axis();
  std::vector<double> buf;
  auto& d = f.data();
  if (grid.dim == 1) {
    sliding_max(d, 1, n, w, buf);
    return;
  }
  std::vector<double> row(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::copy(d.begin() + long(r * n), d.begin() + long((r + 1) * n), row.begin());
    sliding_max(row, 1, n, w, buf);
    std::copy(row.begin(), row.end(), d.begin() + long(r * n));
  }
  std::vector<double> col(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) col[r] = d[r * n + c];
    sliding_max(col, 1, n, w, buf);
    for (std::size_t r = 0; r < n; ++r) d[r * n + c] = col[r];
  }
}

}  // namespace

double bspline_profile(int order, double radius, double shift, double x) {
  const double scale = order / (2.0 * radius);
  return cardinal_bspline(order, (x - shift) * scale) * scale;
}

Mollifier Mollifier::bump() {
  Mollifier m;
  m.components_ = {{4, 1.0, 0.0, 1.0}};
  m.moment_order_ = 1;
  return m;
}

Mollifier Mollifier::bspline(int order, double radius, double shift) {
  if (order < 1 || order > 4) throw Error(ErrorKind::InvalidArgument, "B-spline order must lie in [1, 4]");
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "B-spline radius must be positive");
  Mollifier m;
  m.components_ = {{order, radius, shift, 1.0}};
  m.moment_order_ = shift == 0.0 ? 1 : 0;
  return m;
}

Mollifier Mollifier::combination(std::vector<BSplineComponent> components, int moment_order) {
  if (components.empty()) throw Error(ErrorKind::InvalidArgument, "empty mollifier");
  Mollifier m;
  m.components_ = std::move(components);
  m.moment_order_ = moment_order;
  return m;
}

Mollifier Mollifier::moment_killed(int r, double base_radius) {
  if (r < 0 || r > 8) throw Error(ErrorKind::InvalidArgument, "moment order must lie in [0, 8]");
  const int M = r / 2;
  Mollifier m;
  m.moment_killed_ = true;
  m.moment_order_ = r;
  m.base_radius_ = base_radius;
  // Continuum solution: the 2k-th moment of a radius-t cubic bump is t^{2k} μ_{2k}(1).
  Eigen::MatrixXd V(M + 1, M + 1);
  for (int k = 0; k <= M; ++k)
    for (int j = 0; j <= M; ++j) V(k, j) = std::pow(base_radius * std::ldexp(1.0, j), 2 * k);
  const auto c = solve_moment_system(V);
  for (int j = 0; j <= M; ++j) m.components_.push_back({4, base_radius * std::ldexp(1.0, j), 0.0, c[std::size_t(j)]});
  return m;
}

double Mollifier::mass() const {
  double s = 0.0;
  for (const auto& c : components_) s += c.coeff;
  return s;
}

double Mollifier::support_radius() const {
  double r = 0.0;
  for (const auto& c : components_) r = std::max(r, std::abs(c.shift) + c.radius);
  return r;
}

double Mollifier::profile(double x) const {
  double v = 0.0;
  for (const auto& c : components_) v += c.coeff * bspline_profile(c.order, c.radius, c.shift, x);
  return v;
}

GridFunction Mollifier::kernel(const Grid& grid, double s) const {
  std::vector<double> coeffs;
  for (const auto& c : components_) coeffs.push_back(c.coeff);
  if (moment_killed_) {
    // Re-solve against the discrete even moments of the sampled components.
    const int M = int(components_.size()) - 1;
    const auto x = offsets(grid);
    Eigen::MatrixXd V(M + 1, M + 1);
    for (int j = 0; j <= M; ++j) {
      const auto q = component_samples(grid, components_[std::size_t(j)], s);
      for (int k = 0; k <= M; ++k) {
        CompensatedSum acc;
        for (std::size_t i = 0; i < q.size(); ++i) acc += std::pow(x[i], 2 * k) * q[i];
        V(k, j) = grid.spacing() * acc.value();
      }
    }
    try {
      coeffs = solve_moment_system(V);
    } catch (const Error&) {
      // Components narrower than the grid spacing collapse to deltas; keep the continuum weights.
    }
  }
  const auto q = profile_samples(grid, *this, s, coeffs);
  if (grid.dim == 1) return GridFunction(grid, q);
  GridFunction k(grid);
  const std::size_t n = grid.per_axis();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) k[a * n + b] = q[a] * q[b];
  return k;
}

std::vector<double> Mollifier::discrete_moments(const Grid& grid, int max_order) const {
  const Grid line(1, grid.J, grid.L);
  const GridFunction k = kernel(line, 1.0);
  const auto x = offsets(line);
  std::vector<double> out;
  for (int b = 0; b <= max_order; ++b) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::pow(x[i], b) * k[i];
    out.push_back(line.spacing() * acc.value());
  }
  return out;
}

std::vector<double> dyadic_scales(const Grid& grid, bool global) {
  std::vector<double> s;
  const int jmin = global ? -int(std::bit_width(unsigned(grid.L)) - 1) : 1;
  for (int j = jmin; j <= grid.J; ++j) s.push_back(std::ldexp(1.0, -j));
  return s;
}

MaximalProfile radial_maximal(const GridFunction& f, const Mollifier& phi, MaximalKind kind) {
  const bool global = kind == MaximalKind::Global || kind == MaximalKind::GrandGlobal;
  return radial_maximal(f, phi, dyadic_scales(f.grid(), global), kind);
}

MaximalProfile radial_maximal(const GridFunction& f, const Mollifier& phi, const std::vector<double>& scales,
                              MaximalKind kind) {
  if (std::abs(phi.mass()) < 1e-14) throw Error(ErrorKind::ZeroMassMollifier, "mollifier has zero mass");
  if (scales.empty()) throw Error(ErrorKind::EmptyRange, "empty scale set");
  f.check_finite();
  MaximalProfile out{GridFunction(f.grid()), scales, kind};
  const SpectralField fh = fft(f);
  for (double s : scales) {
    SpectralField prod = fh;
    const SpectralField kh = fft(phi.kernel(f.grid(), s));
    const double cell = f.grid().cell_volume();
    for (std::size_t i = 0; i < prod.coeffs.size(); ++i) prod.coeffs[i] *= kh.coeffs[i] * cell;
    const GridFunction c = ifft(prod);
    for (std::size_t i = 0; i < c.size(); ++i) out.values[i] = std::max(out.values[i], std::abs(c[i]));
  }
  return out;
}

std::vector<Mollifier> grand_dictionary(int N, int size) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
  if (size < 1) throw Error(ErrorKind::InvalidArgument, "dictionary size must be >= 1");
  const int max_order = std::min(N, 4);
  const BSplineComponent candidates[] = {
      {1, 1.0, 0.0, 1.0}, {2, 1.0, 0.0, 1.0},  {3, 1.0, 0.0, 1.0},  {4, 0.5, 0.0, 1.0},  {2, 0.5, 0.0, 1.0},
      {4, 0.5, 0.5, 1.0}, {2, 0.5, -0.5, 1.0}, {3, 0.5, 0.5, 1.0},  {1, 0.5, -0.5, 1.0}, {1, 0.25, 0.0, 1.0},
  };
  std::vector<Mollifier> dict{Mollifier::bump()};
  for (const auto& c : candidates) {
    if (int(dict.size()) >= size) break;
    if (c.order <= max_order) dict.push_back(Mollifier::bspline(c.order, c.radius, c.shift));
  }
  return dict;
}

MaximalProfile grand_maximal(const GridFunction& f, int N, MaximalKind kind, const GrandOptions& opts) {
  const bool global = kind == MaximalKind::Global || kind == MaximalKind::GrandGlobal;
  const auto dict = grand_dictionary(N, opts.dictionary_size);
  const auto scales = dyadic_scales(f.grid(), global);
  f.check_finite();
  MaximalProfile out{GridFunction(f.grid()), scales, global ? MaximalKind::GrandGlobal : MaximalKind::GrandLocal};
  const SpectralField fh = fft(f);
  const double cell = f.grid().cell_volume();
  for (const Mollifier& phi : dict)
    for (double s : scales) {
      SpectralField prod = fh;
      const SpectralField kh = fft(phi.kernel(f.grid(), s));
      for (std::size_t i = 0; i < prod.coeffs.size(); ++i) prod.coeffs[i] *= kh.coeffs[i] * cell;
      GridFunction c = ifft(prod);
      for (double& v : c.data()) v = std::abs(v);
      if (opts.spatial_sup) spatial_sup(c, s);
      for (std::size_t i = 0; i < c.size(); ++i) out.values[i] = std::max(out.values[i], c[i]);
    }
  return out;
}

bool HardySpec::global() const {
  return space == HardySpace::Hp || space == HardySpace::HPhi || space == HardySpace::H_star_Phi;
}

std::string HardySpec::tag() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "(%g)", p);
  switch (space) {
    case HardySpace::hp: return "hp" + std::string(buf);
    case HardySpace::Hp: return "Hp" + std::string(buf);
    case HardySpace::hPhi: return "hPhi" + std::string(buf);
    case HardySpace::HPhi: return "HPhi" + std::string(buf);
    case HardySpace::h_star_Phi: return "h_star_Phi";
    case HardySpace::H_star_Phi: return "H_star_Phi";
    case HardySpace::h_musielak_phi_p: return "h_musielak_phi_p" + std::string(buf);
  }
  return "?";
}

HardySpec HardySpec::parse(const std::string& tag, double p) {
  static const std::pair<const char*, HardySpace> names[] = {
      {"hp", HardySpace::hp},
      {"Hp", HardySpace::Hp},
      {"hPhi", HardySpace::hPhi},
      {"HPhi", HardySpace::HPhi},
      {"h_star_Phi", HardySpace::h_star_Phi},
      {"H_star_Phi", HardySpace::H_star_Phi},
      {"h_musielak_phi_p", HardySpace::h_musielak_phi_p},
  };
  if (tag == "h1") return h1();
  if (tag == "H1") return {HardySpace::Hp, 1.0};
  for (const auto& [name, space] : names)
    if (tag == name) return {space, p};
  throw Error(ErrorKind::InvalidArgument, "unknown space tag '" + tag + "'");
}

double hardy_from_profile(const GridFunction& maximal, const HardySpec& spec) {
  switch (spec.space) {
    case HardySpace::hp:
    case HardySpace::Hp:
      if (!(spec.p > 0.0 && spec.p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "p must lie in (0,1]");
      return lp_norm(maximal, spec.p);
    case HardySpace::hPhi:
    case HardySpace::HPhi:
      if (!(spec.p > 0.0 && spec.p < 1.0)) throw Error(ErrorKind::InvalidArgument, "p must lie in (0,1)");
      return luxemburg_norm(maximal, OrliczSpec::phi_p(spec.p));
    case HardySpace::h_star_Phi:
    case HardySpace::H_star_Phi: return star_norm(maximal, OrliczSpec::phi_log(), spec.star_cube_side);
    case HardySpace::h_musielak_phi_p:
      if (!(spec.p > 0.0 && spec.p < 1.0)) throw Error(ErrorKind::InvalidArgument, "p must lie in (0,1)");
      return luxemburg_norm(maximal, OrliczSpec::musielak_phi_p(spec.p, maximal.grid().dim));
  }
  return 0.0;
}

double hardy_quasinorm(const GridFunction& f, const HardySpec& spec, const Mollifier& phi) {
  const auto m = radial_maximal(f, phi, spec.global() ? MaximalKind::Global : MaximalKind::Local);
  return hardy_from_profile(m.values, spec);
}

void check_mollifier_moments(const Grid& grid, const Mollifier& psi) {
  const int r = std::max(psi.moment_order(), 0);
  const auto mu = psi.discrete_moments(grid, r);
  if (std::abs(mu[0] - 1.0) > 1e-9)
    throw Error(ErrorKind::MomentCheckFailed, "discrete mass is " + std::to_string(mu[0]) + ", expected 1");
  const double R = std::max(psi.support_radius(), 1e-300);
  for (int b = 1; b <= psi.moment_order(); ++b)
    if (std::abs(mu[std::size_t(b)]) > 1e-9 * std::pow(R, b))
      throw Error(ErrorKind::MomentCheckFailed, "moment of order " + std::to_string(b) + " does not vanish");
}

Smoothing mollifier_smooth(const GridFunction& f, const Mollifier& psi) {
  check_mollifier_moments(f.grid(), psi);
  GridFunction smooth = convolve(f, psi.kernel(f.grid(), 1.0));
  GridFunction rough = f - smooth;
  return {std::move(smooth), std::move(rough)};
}

}  // namespace renorm
