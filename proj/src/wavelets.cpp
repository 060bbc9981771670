#include "renorm/wavelets.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <ostream>

namespace renorm {

namespace {

using cld = std::complex<long double>;

long double binomial(int n, int k) {
  long double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Roots of P(y) = Σ_{k<d} C(d-1+k, k) y^k via the companion matrix, then Newton-polished.
std::vector<cld> daubechies_y_roots(int d) {
  const int deg = d - 1;
  std::vector<long double> c(d);
  for (int k = 0; k < d; ++k) c[k] = binomial(d - 1 + k, k);
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = double(-c[i] / c[deg]);
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  std::vector<cld> roots;
  for (int i = 0; i < deg; ++i) {
    cld y(es.eigenvalues()[i].real(), es.eigenvalues()[i].imag());
    for (int it = 0; it < 60; ++it) {
      cld p = 0, dp = 0;
      for (int k = deg; k >= 0; --k) {
        dp = dp * y + p;
        p = p * y + c[k];
      }
      if (std::abs(dp) == 0) break;
      const cld step = p / dp;
      y -= step;
      if (std::abs(step) < 1e-19L * std::max<long double>(1, std::abs(y))) break;
    }
    roots.push_back(y);
  }
  return roots;
}

// Multiply polynomial (ascending coefficients) by (z - r).
void mul_linear(std::vector<cld>& poly, cld r) {
  poly.push_back(0);
  for (std::size_t i = poly.size() - 1; i > 0; --i) poly[i] = poly[i - 1] - r * poly[i];
  poly[0] = -r * poly[0];
}

std::size_t level_size(const Grid& grid, int j) {
  // L·2^j samples per axis; j may be negative down to -log2(L).
  return j >= 0 ? std::size_t(grid.L) << j : std::size_t(grid.L) >> (-j);
}

void analysis_1d(const double* in, std::size_t stride, std::size_t n, const FilterPair& f, double* lo,
                 double* hi, std::size_t out_stride) {
  const std::size_t half = n / 2;
  const std::size_t taps = f.lowpass.size();
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0, b = 0.0;
    for (std::size_t m = 0; m < taps; ++m) {
      const double v = in[((2 * k + m) % n) * stride];
      a += f.lowpass[m] * v;
      b += f.highpass[m] * v;
    }
    lo[k * out_stride] = a;
    hi[k * out_stride] = b;
  }
}

void synthesis_1d(const double* lo, const double* hi, std::size_t in_stride, std::size_t n, const FilterPair& f,
                  double* out, std::size_t stride) {
  const std::size_t half = n / 2;
  const std::size_t taps = f.lowpass.size();
  for (std::size_t i = 0; i < n; ++i) out[i * stride] = 0.0;
  for (std::size_t k = 0; k < half; ++k) {
    const double a = lo[k * in_stride];
    const double b = hi ? hi[k * in_stride] : 0.0;
    if (a == 0.0 && b == 0.0) continue;
    for (std::size_t m = 0; m < taps; ++m) out[((2 * k + m) % n) * stride] += f.lowpass[m] * a + f.highpass[m] * b;
  }
}

// One analysis level: `a` has n^dim entries at level j+1; returns approx and fills details.
std::vector<double> analysis_level(const std::vector<double>& a, std::size_t n, int dim, const FilterPair& f,
                                   std::vector<std::vector<double>*> details) {
  const std::size_t half = n / 2;
  if (dim == 1) {
    std::vector<double> lo(half);
    details[0]->assign(half, 0.0);
    analysis_1d(a.data(), 1, n, f, lo.data(), details[0]->data(), 1);
    return lo;
  }
  // Rows (axis 1) first: tmp_lo/tmp_hi are n × half.
  std::vector<double> tmp_lo(n * half), tmp_hi(n * half);
  for (std::size_t r = 0; r < n; ++r)
    analysis_1d(a.data() + r * n, 1, n, f, tmp_lo.data() + r * half, tmp_hi.data() + r * half, 1);
  std::vector<double> ll(half * half);
  for (auto* d : details) d->assign(half * half, 0.0);
  for (std::size_t c = 0; c < half; ++c) {
    // axis 0 over tmp_lo column c: lowpass -> LL, highpass -> species 1 (1,0)
    analysis_1d(tmp_lo.data() + c, half, n, f, ll.data() + c, details[0]->data() + c, half);
    // axis 0 over tmp_hi column c: lowpass -> species 2 (0,1), highpass -> species 3 (1,1)
    analysis_1d(tmp_hi.data() + c, half, n, f, details[1]->data() + c, details[2]->data() + c, half);
  }
  return ll;
}

std::vector<double> synthesis_level(const std::vector<double>& approx, std::size_t n, int dim,
                                    const FilterPair& f, const std::vector<const std::vector<double>*>& details) {
  const std::size_t half = n / 2;
  std::vector<double> out(dim == 1 ? n : n * n);
  if (dim == 1) {
    synthesis_1d(approx.data(), details[0] ? details[0]->data() : nullptr, 1, n, f, out.data(), 1);
    return out;
  }
  std::vector<double> zeros;
  auto ptr = [&](int s) -> const double* {
    if (details[s]) return details[s]->data();
    if (zeros.empty()) zeros.assign(half * half, 0.0);
    return zeros.data();
  };
  std::vector<double> tmp_lo(n * half), tmp_hi(n * half);
  for (std::size_t c = 0; c < half; ++c) {
    synthesis_1d(approx.data() + c, ptr(0) + c, half, n, f, tmp_lo.data() + c, half);
    synthesis_1d(ptr(1) + c, ptr(2) + c, half, n, f, tmp_hi.data() + c, half);
  }
  for (std::size_t r = 0; r < n; ++r) {
    // Combine the two row-halves: lowpass part from tmp_lo, highpass part from tmp_hi.
    synthesis_1d(tmp_lo.data() + r * half, tmp_hi.data() + r * half, 1, n, f, out.data() + r * n, 1);
  }
  return out;
}

}  // namespace

FilterPair build_filter(int d) {
  if (d < 1 || d > 16) throw Error(ErrorKind::UnsupportedRegularity, "d must lie in [1, 16]");
  FilterPair fp;
  fp.d = d;
  fp.support_length = 2 * d;
  fp.support_dilation = 2.0 * fp.support_length - 3.0;
  std::vector<cld> poly{1};
  for (int i = 0; i < d; ++i) mul_linear(poly, -1);  // (1+z)^d
  if (d > 1) {
    for (const cld& y : daubechies_y_roots(d)) {
      // 4y = 2 - z - 1/z  ->  z^2 - (2 - 4y) z + 1 = 0; keep the root inside the unit disk.
      const cld b = 2.0L - 4.0L * y;
      const cld disc = std::sqrt(b * b - 4.0L);
      cld z = (b + disc) / 2.0L;
      if (std::abs(z) > 1) z = (b - disc) / 2.0L;
      mul_linear(poly, z);
    }
  }
  long double sum = 0;
  for (const cld& c : poly) sum += c.real();
  const long double scale = std::sqrt(2.0L) / sum;
  fp.lowpass.resize(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i) fp.lowpass[i] = double(poly[i].real() * scale);
  const std::size_t L = fp.lowpass.size();
  fp.highpass.resize(L);
  for (std::size_t m = 0; m < L; ++m) fp.highpass[m] = (m % 2 ? -1.0 : 1.0) * fp.lowpass[L - 1 - m];
  return fp;
}

int coarsest_scale(const Grid& grid) {
  if (std::has_single_bit(unsigned(grid.L))) return -std::countr_zero(unsigned(grid.L));
  return 0;
}

WaveletExpansion::WaveletExpansion(const Grid& grid, int j0, int filter_length)
    : grid_(grid), j0_(j0), filter_length_(filter_length) {
  if (j0 > grid.J || j0 < coarsest_scale(grid))
    throw Error(ErrorKind::ScaleRange, "j0 = " + std::to_string(j0) + " outside admissible range");
  const std::size_t n = positions(j0);
  father_.assign(n, 0.0);
  for (int j = j0; j < grid.J; ++j)
    for (int s = 0; s < species_count(); ++s) mothers_.emplace_back(positions(j), 0.0);
}

std::size_t WaveletExpansion::positions(int j) const {
  const std::size_t n = level_size(grid_, j);
  return grid_.dim == 1 ? n : n * n;
}

std::vector<double>& WaveletExpansion::mother(int j, int lambda) {
  if (j < j0_ || j >= grid_.J || lambda < 1 || lambda > species_count())
    throw Error(ErrorKind::MalformedExpansion, "mother key outside [j0, J) or bad species");
  return mothers_[std::size_t(j - j0_) * species_count() + std::size_t(lambda - 1)];
}

const std::vector<double>& WaveletExpansion::mother(int j, int lambda) const {
  return const_cast<WaveletExpansion*>(this)->mother(j, lambda);
}

namespace {
std::size_t flat_position(const Grid& grid, const DyadicCube& cube, std::size_t n) {
  auto wrap = [n](long k) { return std::size_t(((k % long(n)) + long(n)) % long(n)); };
  return grid.dim == 1 ? wrap(cube.k[0]) : wrap(cube.k[0]) * n + wrap(cube.k[1]);
}
}  // namespace

double WaveletExpansion::coefficient(const DyadicCube& cube, int lambda) const {
  const std::size_t n = level_size(grid_, cube.j);
  if (lambda == kFather) {
    if (cube.j != j0_) throw Error(ErrorKind::MalformedExpansion, "father coefficients live at j0 only");
    return father_[flat_position(grid_, cube, n)];
  }
  return mother(cube.j, lambda)[flat_position(grid_, cube, n)];
}

void WaveletExpansion::set_coefficient(const DyadicCube& cube, int lambda, double value) {
  const std::size_t n = level_size(grid_, cube.j);
  if (lambda == kFather) {
    if (cube.j != j0_) throw Error(ErrorKind::MalformedExpansion, "father coefficients live at j0 only");
    father_[flat_position(grid_, cube, n)] = value;
    return;
  }
  mother(cube.j, lambda)[flat_position(grid_, cube, n)] = value;
}

bool WaveletExpansion::wrapped(int j, std::size_t flat_k) const {
  const std::size_t n = level_size(grid_, j);
  const std::size_t reach = std::size_t(filter_length_ - 1);
  if (grid_.dim == 1) return flat_k + reach > n;
  return flat_k / n + reach > n || flat_k % n + reach > n;
}

void WaveletExpansion::zero_wrapped_mothers() {
  for (int j = j0_; j < grid_.J; ++j)
    for (int s = 1; s <= species_count(); ++s) {
      auto& v = mother(j, s);
      for (std::size_t k = 0; k < v.size(); ++k)
        if (wrapped(j, k)) v[k] = 0.0;
    }
}

void WaveletExpansion::zero_mothers() {
  for (auto& v : mothers_) std::fill(v.begin(), v.end(), 0.0);
}

void WaveletExpansion::zero_father() { std::fill(father_.begin(), father_.end(), 0.0); }

void WaveletExpansion::validate() const {
  if (j0_ > grid_.J || j0_ < coarsest_scale(grid_))
    throw Error(ErrorKind::MalformedExpansion, "j0 outside admissible range");
  if (father_.size() != positions(j0_)) throw Error(ErrorKind::MalformedExpansion, "father level has wrong size");
  if (mothers_.size() != std::size_t(grid_.J - j0_) * std::size_t(species_count()))
    throw Error(ErrorKind::MalformedExpansion, "mother levels outside [j0, J)");
  for (int j = j0_; j < grid_.J; ++j)
    for (int s = 1; s <= species_count(); ++s)
      if (mother(j, s).size() != positions(j)) throw Error(ErrorKind::MalformedExpansion, "mother level has wrong size");
}

WaveletExpansion forward(const GridFunction& f, int j0, const FilterPair& filter) {
  const Grid& grid = f.grid();
  if (j0 > grid.J || j0 < coarsest_scale(grid))
    throw Error(ErrorKind::ScaleRange, "j0 = " + std::to_string(j0) + " outside admissible range");
  f.check_finite();
  WaveletExpansion w(grid, j0, int(filter.lowpass.size()));
  const double norm = std::sqrt(grid.cell_volume());
  std::vector<double> a(f.data());
  for (double& v : a) v *= norm;
  for (int j = grid.J - 1; j >= j0; --j) {
    std::vector<std::vector<double>*> det;
    for (int s = 1; s <= w.species_count(); ++s) det.push_back(&w.mother(j, s));
    a = analysis_level(a, level_size(grid, j + 1), grid.dim, filter, det);
  }
  w.father() = std::move(a);
  return w;
}

GridFunction inverse(const WaveletExpansion& w, const FilterPair& filter) {
  w.validate();
  const Grid& grid = w.grid();
  std::vector<double> a = w.father();
  for (int j = w.j0(); j < grid.J; ++j) {
    std::vector<const std::vector<double>*> det;
    for (int s = 1; s <= w.species_count(); ++s) {
      const auto& m = w.mother(j, s);
      const bool nz = std::any_of(m.begin(), m.end(), [](double v) { return v != 0.0; });
      det.push_back(nz ? &m : nullptr);
    }
    a = synthesis_level(a, level_size(grid, j + 1), grid.dim, filter, det);
  }
  const double inv = 1.0 / std::sqrt(grid.cell_volume());
  for (double& v : a) v *= inv;
  return GridFunction(grid, std::move(a));
}

std::vector<std::vector<double>> approximation_pyramid(const WaveletExpansion& w, const FilterPair& filter) {
  w.validate();
  const Grid& grid = w.grid();
  std::vector<std::vector<double>> out;
  out.push_back(w.father());
  for (int j = w.j0(); j < grid.J; ++j) {
    std::vector<const std::vector<double>*> det;
    for (int s = 1; s <= w.species_count(); ++s) det.push_back(&w.mother(j, s));
    out.push_back(synthesis_level(out.back(), level_size(grid, j + 1), grid.dim, filter, det));
  }
  return out;
}

GridFunction synthesize_level(const Grid& grid, int j, const std::vector<double>& approx,
                              const std::vector<const std::vector<double>*>& details, const FilterPair& filter) {
  if (j > grid.J || j < coarsest_scale(grid)) throw Error(ErrorKind::ScaleRange, "level outside grid range");
  const std::size_t n = level_size(grid, j);
  const std::size_t count = grid.dim == 1 ? n : n * n;
  std::vector<double> a = approx.empty() ? std::vector<double>(count, 0.0) : approx;
  if (a.size() != count) throw Error(ErrorKind::MalformedExpansion, "approximation has wrong size");
  std::vector<const std::vector<double>*> none(grid.dim == 1 ? 1 : 3, nullptr);
  for (int jj = j; jj < grid.J; ++jj)
    a = synthesis_level(a, level_size(grid, jj + 1), grid.dim, filter, jj == j ? details : none);
  const double inv = 1.0 / std::sqrt(grid.cell_volume());
  for (double& v : a) v *= inv;
  return GridFunction(grid, std::move(a));
}

GridFunction project_Pj(const GridFunction& f, int j, const FilterPair& filter) {
  WaveletExpansion w = forward(f, j, filter);
  w.zero_mothers();
  return inverse(w, filter);
}

GridFunction project_Qj(const GridFunction& f, int j, const FilterPair& filter) {
  if (j >= f.grid().J) throw Error(ErrorKind::ScaleRange, "Q_j needs j < J");
  WaveletExpansion w = forward(f, j, filter);
  w.zero_father();
  for (int jj = j + 1; jj < f.grid().J; ++jj)
    for (int s = 1; s <= w.species_count(); ++s) {
      auto& v = w.mother(jj, s);
      std::fill(v.begin(), v.end(), 0.0);
    }
  return inverse(w, filter);
}

GridFunction basis_function(const Grid& grid, const DyadicCube& cube, int lambda, const FilterPair& filter) {
  WaveletExpansion w(grid, cube.j, int(filter.lowpass.size()));
  w.set_coefficient(cube, lambda, 1.0);
  return inverse(w, filter);
}

void dump_coefficients(std::ostream& os, const WaveletExpansion& w, double threshold) {
  const Grid& grid = w.grid();
  const auto old = os.precision(17);
  auto emit = [&](int j, std::size_t flat, int lambda, double v) {
    if (std::abs(v) <= threshold) return;
    const std::size_t n = level_size(grid, j);
    os << j << ' ';
    if (grid.dim == 1)
      os << flat;
    else
      os << flat / n << ' ' << flat % n;
    os << ' ' << lambda << ' ' << v << '\n';
  };
  for (std::size_t k = 0; k < w.father().size(); ++k) emit(w.j0(), k, kFather, w.father()[k]);
  for (int j = w.j0(); j < grid.J; ++j) {
    const std::size_t count = w.positions(j);
    for (std::size_t k = 0; k < count; ++k)
      for (int s = 1; s <= w.species_count(); ++s) emit(j, k, s, w.mother(j, s)[k]);
  }
  os.precision(old);
}

}  // namespace renorm
