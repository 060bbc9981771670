#include "renorm/paraproducts.hpp"

#include <bit>
#include <cmath>

namespace renorm {

namespace {

struct SparseTemplate {
  std::vector<std::size_t> i0, i1;
  std::vector<double> value;
};

// Squared basis function at position 0 of level j, kept as its nonzero entries.
SparseTemplate squared_template(const Grid& grid, int j, int lambda, const FilterPair& filter) {
  WaveletExpansion unit(grid, j, int(filter.lowpass.size()));
  if (lambda == kFather)
    unit.father()[0] = 1.0;
  else
    unit.mother(j, lambda)[0] = 1.0;
  const GridFunction b = inverse(unit, filter);
  SparseTemplate t;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i] != 0.0) {
      const auto [a0, a1] = grid.unflatten(i);
      t.i0.push_back(a0);
      t.i1.push_back(a1);
      t.value.push_back(b[i] * b[i]);
    }
  return t;
}

// out += Σ_k c_k · T(· − k·2^{J−j}) with c_k = a_k b_k.
void add_diagonal(GridFunction& out, int j, const std::vector<double>& a, const std::vector<double>& b,
                  const SparseTemplate& t) {
  const Grid& grid = out.grid();
  const std::size_t n = grid.per_axis();
  const std::size_t shift = std::size_t(1) << (grid.J - j);
  const std::size_t nj = grid.dim == 1 ? a.size() : std::size_t(std::lround(std::sqrt(double(a.size()))));
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double c = a[k] * b[k];
    if (c == 0.0) continue;
    const std::size_t k0 = grid.dim == 1 ? k : k / nj;
    const std::size_t k1 = grid.dim == 1 ? 0 : k % nj;
    for (std::size_t e = 0; e < t.value.size(); ++e) {
      const std::size_t p0 = (t.i0[e] + k0 * shift) % n;
      if (grid.dim == 1) {
        out[p0] += c * t.value[e];
      } else {
        const std::size_t p1 = (t.i1[e] + k1 * shift) % n;
        out[grid.flatten(p0, p1)] += c * t.value[e];
      }
    }
  }
}

void accumulate_product(GridFunction& out, const GridFunction& a, const GridFunction& b) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += a[i] * b[i];
}

}  // namespace

const char* to_string(Variant v) { return v == Variant::Inhomogeneous ? "inhomogeneous" : "homogeneous"; }

int variant_j0(const Grid& grid, Variant v) {
  if (v == Variant::Inhomogeneous) return 0;
  if (!std::has_single_bit(unsigned(grid.L)))
    throw Error(ErrorKind::InvalidVariant, "homogeneous variant needs L to be a power of two");
  return -std::countr_zero(unsigned(grid.L));
}

ParaproductResult renormalize(const GridFunction& f, const GridFunction& g, const FilterPair& filter,
                              Variant variant) {
  require_same_grid(f, g);
  const int j0 = variant_j0(f.grid(), variant);
  return renormalize(forward(f, j0, filter), forward(g, j0, filter), filter, variant);
}

ParaproductResult renormalize(const WaveletExpansion& wf, const WaveletExpansion& wg, const FilterPair& filter,
                              Variant variant) {
  const Grid& grid = wf.grid();
  if (!(grid == wg.grid())) throw Error(ErrorKind::GridMismatch, "expansions live on different grids");
  if (wf.j0() != wg.j0()) throw Error(ErrorKind::InvalidVariant, "expansions use different father scales");
  if (wf.j0() != variant_j0(grid, variant))
    throw Error(ErrorKind::InvalidVariant, std::string("father scale does not match the ") + to_string(variant) +
                                               " variant");
  const int species = wf.species_count();
  const auto af = approximation_pyramid(wf, filter);
  const auto ag = approximation_pyramid(wg, filter);

  ParaproductResult r;
  r.variant = variant;
  r.pi1 = r.pi2 = r.pi4 = r.pi3_1 = r.pi3_2 = GridFunction(grid);

  const int j0 = wf.j0();
  {
    std::vector<const std::vector<double>*> none(std::size_t(species), nullptr);
    const GridFunction Pf = synthesize_level(grid, j0, af[0], none, filter);
    const GridFunction Pg = synthesize_level(grid, j0, ag[0], none, filter);
    GridFunction fdiag(grid);
    add_diagonal(fdiag, j0, wf.father(), wg.father(), squared_template(grid, j0, kFather, filter));
    accumulate_product(r.pi3_2, Pf, Pg);
    r.pi3_2 -= fdiag;
    r.pi4 += fdiag;
  }
  for (int j = j0; j < grid.J; ++j) {
    const auto& a_f = af[std::size_t(j - j0)];
    const auto& a_g = ag[std::size_t(j - j0)];
    std::vector<const std::vector<double>*> df, dg, none(std::size_t(species), nullptr);
    for (int s = 1; s <= species; ++s) {
      df.push_back(&wf.mother(j, s));
      dg.push_back(&wg.mother(j, s));
    }
    const GridFunction Pf = synthesize_level(grid, j, a_f, none, filter);
    const GridFunction Pg = synthesize_level(grid, j, a_g, none, filter);
    const GridFunction Qf = synthesize_level(grid, j, {}, df, filter);
    const GridFunction Qg = synthesize_level(grid, j, {}, dg, filter);
    accumulate_product(r.pi1, Pf, Qg);
    accumulate_product(r.pi2, Qf, Pg);

    GridFunction diag(grid);
    for (int s = 1; s <= species; ++s)
      add_diagonal(diag, j, wf.mother(j, s), wg.mother(j, s), squared_template(grid, j, s, filter));
    accumulate_product(r.pi3_1, Qf, Qg);
    r.pi3_1 -= diag;
    r.pi4 += diag;
  }

  r.pi3 = r.pi3_1 + r.pi3_2;
  return r;
}

Pi4Bound pi4_l1_bound_check(const GridFunction& f, const GridFunction& g, const FilterPair& filter, Variant variant) {
  const auto r = renormalize(f, g, filter, variant);
  return {integrate(abs(r.pi4)), std::sqrt(inner_product(f, f) * inner_product(g, g))};
}

GridFunction S_operator(const GridFunction& f, const GridFunction& g, const FilterPair& filter, Variant variant) {
  return renormalize(f, g, filter, variant).pi4;
}

GridFunction T_operator(const GridFunction& f, const GridFunction& g, const FilterPair& filter, Variant variant) {
  auto r = renormalize(f, g, filter, variant);
  return r.pi1 + r.pi2 + r.pi3;
}

}  // namespace renorm
