#include "renorm/divcurl.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "renorm/campanato.hpp"
#include "renorm/spectral.hpp"

namespace renorm {

namespace {

using cplx = std::complex<double>;

// Applies m(k0, k1) to the half spectrum. `odd_axis` >= 0 zeroes that axis's Nyquist line.
template <class M>
GridFunction apply_multiplier(const GridFunction& f, int odd_axis, M&& m) {
  SpectralField s = fft(f);
  const Grid& grid = f.grid();
  const std::size_t n = grid.per_axis();
  const std::size_t last = s.last_axis();
  const std::size_t rows = grid.dim == 1 ? 1 : n;
  for (std::size_t i0 = 0; i0 < rows; ++i0)
    for (std::size_t i1 = 0; i1 < last; ++i1) {
      long k0, k1;
      if (grid.dim == 1) {
        k0 = SpectralField::wavenumber(i1, n);
        k1 = 0;
      } else {
        k0 = SpectralField::wavenumber(i0, n);
        k1 = long(i1);
      }
      const bool nyquist0 = grid.dim == 1 ? (i1 == n / 2) : (i0 == n / 2);
      const bool nyquist1 = grid.dim == 2 && i1 == n / 2;
      cplx& c = s.coeffs[i0 * last + i1];
      if ((odd_axis == 0 && nyquist0) || (odd_axis == 1 && nyquist1))
        c = 0.0;
      else
        c *= m(k0, k1);
    }
  return ifft(s);
}

void check_axis(const GridFunction& f, int j) {
  if (j < 0 || j >= f.grid().dim) throw Error(ErrorKind::InvalidArgument, "axis out of range");
}

void require_2d(const Grid& grid) {
  if (grid.dim != 2) throw Error(ErrorKind::InvalidArgument, "vector fields live on 2-D grids");
}

double vector_norm(const VectorField2D& F, const std::function<double(const GridFunction&)>& norm) {
  const double a = norm(F[0]);
  const double b = norm(F[1]);
  return std::sqrt(a * a + b * b);
}

// Largest derivative multiplier magnitude on the grid.
double derivative_scale(const Grid& grid) { return std::numbers::pi * double(grid.per_axis()) / grid.L; }

}  // namespace

VectorField2D::VectorField2D(GridFunction f1, GridFunction f2) : f1_(std::move(f1)), f2_(std::move(f2)) {
  require_same_grid(f1_, f2_);
  require_2d(f1_.grid());
  f1_.check_finite();
  f2_.check_finite();
}

GridFunction riesz(int j, const GridFunction& f) {
  check_axis(f, j);
  return apply_multiplier(f, j, [j](long k0, long k1) {
    if (k0 == 0 && k1 == 0) return cplx(0.0);
    const double kj = double(j == 0 ? k0 : k1);
    return cplx(0.0, -kj / std::hypot(double(k0), double(k1)));
  });
}

GridFunction derivative(int j, const GridFunction& f) {
  check_axis(f, j);
  const double w = 2.0 * std::numbers::pi / f.grid().L;
  return apply_multiplier(f, j, [j, w](long k0, long k1) { return cplx(0.0, w * double(j == 0 ? k0 : k1)); });
}

GridFunction divergence(const VectorField2D& F) { return derivative(0, F[0]) + derivative(1, F[1]); }

GridFunction curl2d(const VectorField2D& F) { return derivative(0, F[1]) - derivative(1, F[0]); }

VectorField2D gradient(const GridFunction& u) {
  require_2d(u.grid());
  return {derivative(0, u), derivative(1, u)};
}

VectorField2D perp_gradient(const GridFunction& v) {
  require_2d(v.grid());
  return {-1.0 * derivative(1, v), derivative(0, v)};
}

GridFunction dot(const VectorField2D& F, const VectorField2D& G) {
  require_same_grid(F[0], G[0]);
  return pointwise_product(F[0], G[0]) + pointwise_product(F[1], G[1]);
}

GridFunction inhomogeneous_curl_residual(const VectorField2D& F, const Mollifier& psi) {
  return curl2d({mollifier_smooth(F[0], psi).rough, mollifier_smooth(F[1], psi).rough});
}

std::string to_string(DivCurlMode mode) {
  return mode == DivCurlMode::hp_times_lipschitz ? "hp_times_lipschitz" : "h1_times_bmo";
}

DivCurlMode parse_divcurl_mode(const std::string& tag) {
  if (tag == "hp_times_lipschitz") return DivCurlMode::hp_times_lipschitz;
  if (tag == "h1_times_bmo") return DivCurlMode::h1_times_bmo;
  throw Error(ErrorKind::Config, "unknown div-curl mode '" + tag + "'");
}

DivCurlReport divcurl_experiment(const VectorField2D& F, const VectorField2D& G, double p, DivCurlMode mode) {
  require_same_grid(F[0], G[0]);
  const Grid& grid = F.grid();
  const bool lip = mode == DivCurlMode::hp_times_lipschitz;
  if (lip && !(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "p must lie in (0, 1)");
  if (!lip && grid.L % 2 != 0) throw Error(ErrorKind::InvalidArgument, "the h1 x bmo target needs an even box side");

  DivCurlReport rep;
  rep.mode = mode;
  rep.p = lip ? p : 1.0;
  const double n_alpha = lip ? grid.dim * (1.0 / p - 1.0) : 0.0;
  const auto psi = Mollifier::moment_killed(int(std::floor(n_alpha + 1e-12)));

  const double scale = derivative_scale(grid);
  const double f_size = std::max(sup_norm(F[0]), sup_norm(F[1]));
  const double g_size = std::max(sup_norm(G[0]), sup_norm(G[1]));
  const double curl = sup_norm(inhomogeneous_curl_residual(F, psi));
  const double div = sup_norm(divergence(G));
  rep.curl_residual = f_size > 0.0 ? curl / (scale * f_size) : 0.0;
  rep.div_residual = g_size > 0.0 ? div / (scale * g_size) : 0.0;
  rep.certified = rep.curl_residual <= kCertifyTolerance && rep.div_residual <= kCertifyTolerance;

  const HardySpec source = lip ? HardySpec{HardySpace::hp, p} : HardySpec::h1();
  const HardySpec target = lip ? HardySpec{HardySpace::hPhi, p} : HardySpec{HardySpace::h_star_Phi, 1.0, 2};
  const DualNormSpec dual = lip ? DualNormSpec::lipschitz(n_alpha) : DualNormSpec::bmo();

  const auto hardy = [&](const GridFunction& f) { return hardy_quasinorm(f, source); };
  rep.target = hardy_quasinorm(dot(F, G), target);
  rep.source = vector_norm(F, hardy);
  rep.dual = vector_norm(G, [&](const GridFunction& g) { return dual_norm(g, dual); });
  const double denom = rep.source * rep.dual;
  rep.ratio = denom > 0.0 ? rep.target / denom : 0.0;

  const Smoothing s0 = mollifier_smooth(F[0], psi);
  const Smoothing s1 = mollifier_smooth(F[1], psi);
  rep.rough_source = vector_norm({s0.rough, s1.rough}, hardy);
  rep.smooth_source = vector_norm({s0.smooth, s1.smooth}, hardy);
  return rep;
}

}  // namespace renorm
