#include "renorm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "renorm/atoms.hpp"
#include "renorm/campanato.hpp"
#include "renorm/maximal.hpp"
#include "renorm/wavelets.hpp"

namespace renorm {

namespace {

using nlohmann::json;

// Random streams. Each corpus draws from its own stream so that adding a
// subcommand never perturbs another one's data.
enum Stream : std::uint64_t {
  kIdentityF = 1,
  kIdentityG = 2,
  kNorms = 10,
  kStructure = 20,
  kDivF = 30,
  kDivG = 31,
  kBoundsBase = 100,  // + 2·family (f), + 2·family + 1 (g)
};

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::Config, what); }

bool power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names{"hp_lambda", "Hp_lambda", "H1_bmo"};
  return names;
}

std::uint64_t family_index(const std::string& family) {
  const auto& names = family_names();
  const auto it = std::find(names.begin(), names.end(), family);
  if (it == names.end()) config_error("unknown bounds family '" + family + "'");
  return std::uint64_t(it - names.begin());
}

// Per-axis tables cos(2πkx/L), sin(2πkx/L) at cell midpoints, k = 0..K.
struct TrigTable {
  std::vector<double> c, s;  // index k * n + i
  std::size_t n = 0;
};

TrigTable trig_table(const Grid& grid, int K) {
  TrigTable t;
  t.n = grid.per_axis();
  t.c.resize((std::size_t(K) + 1) * t.n);
  t.s.resize(t.c.size());
  const double h = grid.spacing();
  for (int k = 0; k <= K; ++k)
    for (std::size_t i = 0; i < t.n; ++i) {
      const double a = 2.0 * std::numbers::pi * double(k) * (double(i) + 0.5) * h / double(grid.L);
      t.c[std::size_t(k) * t.n + i] = std::cos(a);
      t.s[std::size_t(k) * t.n + i] = std::sin(a);
    }
  return t;
}

void scale_to_unit_sup(GridFunction& f) {
  const double m = sup_norm(f);
  if (m > 0.0) f *= 1.0 / m;
}

std::string hardy_or_l1_tag(const std::string& target, double p) {
  return target == "L1" ? "L1" : HardySpec::parse(target, p).tag();
}

double target_norm(const GridFunction& f, const std::string& target, double p) {
  if (target == "L1") return lp_norm(f, 1.0);
  return hardy_quasinorm(f, HardySpec::parse(target, p));
}

struct FamilySetup {
  Variant variant;
  bool mother_only;
  HardySpec source;
  DualNormSpec dual;
  bool bmo_g;
};

FamilySetup family_setup(const std::string& family, const ExperimentConfig& cfg) {
  const double n_alpha = double(cfg.dim) * (1.0 / cfg.p - 1.0);
  if (family == "hp_lambda")
    return {Variant::Inhomogeneous, false, {HardySpace::hp, cfg.p}, DualNormSpec::lipschitz(n_alpha), false};
  if (family == "Hp_lambda")
    return {Variant::Homogeneous, true, {HardySpace::Hp, cfg.p}, DualNormSpec::lipschitz(n_alpha), false};
  if (family == "H1_bmo") return {Variant::Homogeneous, true, {HardySpace::Hp, 1.0}, DualNormSpec::bmo(), true};
  config_error("unknown bounds family '" + family + "'");
}

Grid config_grid(const ExperimentConfig& cfg) { return Grid(cfg.dim, cfg.J, cfg.L); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  os << text;
  if (!os) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

template <class T>
std::vector<T> read_list(const json& v, const std::string& key) {
  if (!v.is_array()) config_error("'" + key + "' must be an array");
  try {
    return v.get<std::vector<T>>();
  } catch (const json::exception&) {
    config_error("'" + key + "' has elements of the wrong type");
  }
}

}  // namespace

std::string to_string(Subcommand s) {
  switch (s) {
    case Subcommand::identity: return "identity";
    case Subcommand::bounds: return "bounds";
    case Subcommand::norms: return "norms";
    case Subcommand::structure: return "structure";
    case Subcommand::divcurl: return "divcurl";
  }
  return "?";
}

Subcommand parse_subcommand(const std::string& name) {
  for (auto s : {Subcommand::identity, Subcommand::bounds, Subcommand::norms, Subcommand::structure,
                 Subcommand::divcurl})
    if (to_string(s) == name) return s;
  config_error("unknown subcommand '" + name + "'");
}

ExperimentConfig ExperimentConfig::defaults(Subcommand s) {
  ExperimentConfig c;
  switch (s) {
    case Subcommand::identity:
      c.J = 10;
      c.corpus_size = 100;
      break;
    case Subcommand::bounds:
      c.J = 8;
      c.corpus_size = 30;
      break;
    case Subcommand::norms:
      c.J = 10;
      c.corpus_size = 10;
      break;
    case Subcommand::structure:
      c.J = 8;
      c.corpus_size = 50;
      break;
    case Subcommand::divcurl:
      c.dim = 2;
      c.J = 8;
      c.L = 2;
      c.corpus_size = 30;
      break;
  }
  return c;
}

ExperimentConfig ExperimentConfig::parse(const std::string& json_text, const ExperimentConfig& base) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) config_error("config must be a JSON object");
  ExperimentConfig c = base;
  const auto integer = [](const json& v, const std::string& key) {
    if (!v.is_number_integer()) config_error("'" + key + "' must be an integer");
    return v.get<long long>();
  };
  const auto number = [](const json& v, const std::string& key) {
    if (!v.is_number()) config_error("'" + key + "' must be a number");
    return v.get<double>();
  };
  for (const auto& [key, v] : doc.items()) {
    if (key == "dim") c.dim = int(integer(v, key));
    else if (key == "j") c.J = int(integer(v, key));
    else if (key == "l") c.L = int(integer(v, key));
    else if (key == "p") c.p = number(v, key);
    else if (key == "d") c.d = int(integer(v, key));
    else if (key == "seed") {
      if (!v.is_number_unsigned()) config_error("'seed' must be an unsigned integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "corpus_size") c.corpus_size = int(integer(v, key));
    else if (key == "threads") c.threads = int(integer(v, key));
    else if (key == "variant") {
      if (!v.is_string()) config_error("'variant' must be a string");
      const auto name = v.get<std::string>();
      if (name == "inhomogeneous") c.variant = Variant::Inhomogeneous;
      else if (name == "homogeneous") c.variant = Variant::Homogeneous;
      else config_error("unknown variant '" + name + "'");
    } else if (key == "families") c.families = read_list<std::string>(v, key);
    else if (key == "spaces") c.spaces = read_list<std::string>(v, key);
    else if (key == "j_values") c.j_values = read_list<int>(v, key);
    else if (key == "modes") {
      c.modes.clear();
      for (const auto& m : read_list<std::string>(v, key)) c.modes.push_back(parse_divcurl_mode(m));
    } else if (key == "c_max") c.c_max = number(v, key);
    else if (key == "tolerances") {
      if (!v.is_object()) config_error("'tolerances' must be an object");
      for (const auto& [tk, tv] : v.items()) {
        if (tk == "identity") c.tol.identity = number(tv, tk);
        else if (tk == "reconstruction") c.tol.reconstruction = number(tv, tk);
        else if (tk == "certify") c.tol.certify = number(tv, tk);
        else config_error("unknown tolerance '" + tk + "'");
      }
    } else config_error("unknown config key '" + key + "'");
  }
  return c;
}

void ExperimentConfig::validate(Subcommand s) const {
  if (dim != 1 && dim != 2) config_error("dim must be 1 or 2");
  if (J < 1 || J > 24) config_error("j must lie in [1, 24]");
  if (L < 1) config_error("l must be positive");
  if (!(p > 0.0 && p <= 1.0)) config_error("p must lie in (0, 1]");
  if (d < 1 || d > 10) config_error("d must lie in [1, 10]");
  if (corpus_size < 0) config_error("corpus_size must be >= 0");
  if (threads < 1) config_error("threads must be >= 1");
  if (!(tol.identity > 0.0) || !(tol.reconstruction > 0.0) || !(tol.certify > 0.0))
    config_error("tolerances must be positive");
  switch (s) {
    case Subcommand::identity:
      if (variant == Variant::Homogeneous && !power_of_two(L)) config_error("the homogeneous variant needs l = 2^m");
      break;
    case Subcommand::bounds:
      if (!(p < 1.0)) config_error("bounds needs p < 1");
      if (families.empty()) config_error("families must not be empty");
      for (const auto& f : families) {
        family_index(f);
        if (f != "hp_lambda" && !power_of_two(L)) config_error("homogeneous families need l = 2^m");
      }
      break;
    case Subcommand::norms:
      for (const auto& t : spaces)
        if (t != "lipschitz" && t != "bmo") {
          try {
            HardySpec::parse(t, p);
          } catch (const Error&) {
            config_error("unknown space tag '" + t + "'");
          }
        }
      if (p >= 1.0 && std::find(spaces.begin(), spaces.end(), "lipschitz") != spaces.end())
        config_error("the lipschitz norm uses α = 1/p − 1 and needs p < 1");
      break;
    case Subcommand::structure:
      if (dim != 1) config_error("structure runs on 1-D grids");
      if (!(p < 1.0)) config_error("structure needs p < 1");
      if (!(c_max > 0.0)) config_error("c_max must be positive");
      break;
    case Subcommand::divcurl:
      if (dim != 2) config_error("divcurl runs on 2-D grids");
      if (j_values.empty()) config_error("j_values must not be empty");
      for (int j : j_values)
        if (j < 1 || j > 12) config_error("j_values entries must lie in [1, 12]");
      if (modes.empty()) config_error("modes must not be empty");
      for (auto m : modes) {
        if (m == DivCurlMode::h1_times_bmo && L % 2 != 0) config_error("h1_times_bmo needs an even l");
        if (m == DivCurlMode::hp_times_lipschitz && !(p < 1.0)) config_error("hp_times_lipschitz needs p < 1");
      }
      break;
  }
}

std::string ExperimentConfig::to_json() const {
  json tol_j{{"identity", tol.identity}, {"reconstruction", tol.reconstruction}, {"certify", tol.certify}};
  std::vector<std::string> mode_names;
  for (auto m : modes) mode_names.push_back(to_string(m));
  json doc{{"dim", dim},
           {"j", J},
           {"l", L},
           {"p", p},
           {"d", d},
           {"seed", seed},
           {"corpus_size", corpus_size},
           {"threads", threads},
           {"variant", variant == Variant::Inhomogeneous ? "inhomogeneous" : "homogeneous"},
           {"families", families},
           {"spaces", spaces},
           {"j_values", j_values},
           {"modes", mode_names},
           {"c_max", c_max},
           {"tolerances", tol_j}};
  return doc.dump(2);
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t trial) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream), std::uint32_t(trial),
                    std::uint32_t(trial >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (std::uint64_t(out[0]) << 32) | out[1];
}

GridFunction random_coeff_expansion(const Grid& grid, const FilterPair& filter, Variant variant, bool mother_only,
                                    std::uint64_t seed) {
  const int j0 = variant_j0(grid, variant);
  WaveletExpansion w(grid, j0, int(filter.lowpass.size()));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> amp(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int species = w.species_count();
  const auto position = [&](int j) {
    const long n = long(double(grid.L) * std::ldexp(1.0, j));
    const long k0 = std::min(n - 1, long(unit(rng) * double(n)));
    const long k1 = std::min(n - 1, long(unit(rng) * double(n)));
    return DyadicCube{j, {k0, grid.dim == 2 ? k1 : 0}, grid.dim};
  };
  // Every term consumes the same draws whether or not it fits on this grid.
  for (int t = 0; t < 6; ++t) {
    const int j = j0 + int(unit(rng) * 6.0);
    const int lambda = 1 + std::min(species - 1, int(unit(rng) * double(species)));
    const DyadicCube cube = position(std::min(j, j0 + 5));
    const double a = amp(rng);
    if (j < grid.J) w.set_coefficient(cube, lambda, w.coefficient(cube, lambda) + a);
  }
  for (int t = 0; t < 2; ++t) {
    const DyadicCube cube = position(j0);
    const double a = amp(rng);
    if (!mother_only) w.set_coefficient(cube, kFather, w.coefficient(cube, kFather) + a);
  }
  w.finite = true;
  return inverse(w, filter);
}

GridFunction random_fourier_series(const Grid& grid, int K, double decay, std::uint64_t seed) {
  if (K < 1) throw Error(ErrorKind::InvalidArgument, "K must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> amp(0.0, 1.0);
  const TrigTable t = trig_table(grid, K);
  const std::size_t n = t.n;
  GridFunction f(grid);
  if (grid.dim == 1) {
    for (int k = 1; k <= K; ++k) {
      const double w = std::pow(double(k), -decay);
      const double a = w * amp(rng), b = w * amp(rng);
      const double* c = &t.c[std::size_t(k) * n];
      const double* s = &t.s[std::size_t(k) * n];
      for (std::size_t i = 0; i < n; ++i) f[i] += a * c[i] + b * s[i];
    }
  } else {
    // Half plane k0 > 0, or k0 = 0 and k1 > 0; k1 may be negative via sin(−x) = −sin x.
    for (int k0 = 0; k0 <= K; ++k0)
      for (int k1 = -K; k1 <= K; ++k1) {
        if (k0 == 0 && k1 <= 0) continue;
        const double w = std::pow(std::hypot(double(k0), double(k1)), -decay);
        const double a = w * amp(rng), b = w * amp(rng);
        const double sign = k1 < 0 ? -1.0 : 1.0;
        const std::size_t m1 = std::size_t(std::abs(k1));
        const double* c0 = &t.c[std::size_t(k0) * n];
        const double* s0 = &t.s[std::size_t(k0) * n];
        const double* c1 = &t.c[m1 * n];
        const double* s1 = &t.s[m1 * n];
        for (std::size_t i0 = 0; i0 < n; ++i0) {
          // cos(x+y) = c0c1 − s0s1, sin(x+y) = s0c1 + c0s1, with s1 → sign·s1.
          const double ca = a * c0[i0] + b * s0[i0];
          const double cb = b * c0[i0] - a * s0[i0];
          double* row = &f[i0 * n];
          for (std::size_t i1 = 0; i1 < n; ++i1) row[i1] += ca * c1[i1] + cb * sign * s1[i1];
        }
      }
  }
  scale_to_unit_sup(f);
  return f;
}

GridFunction lipschitz_sample(const Grid& grid, double alpha, std::uint64_t seed) {
  return random_fourier_series(grid, grid.dim == 1 ? 32 : 8, 1.0 + alpha, seed);
}

GridFunction bmo_sample(const Grid& grid, std::uint64_t seed) {
  return random_fourier_series(grid, grid.dim == 1 ? 32 : 8, 1.0, seed);
}

VectorField2D gradient_field(const Grid& grid, std::uint64_t seed) {
  if (grid.dim != 2) throw Error(ErrorKind::InvalidArgument, "gradient fields live on 2-D grids");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> amp(0.0, 1.0);
  struct Bump {
    Point c;
    double rho, a;
  };
  std::vector<Bump> bumps(1 + std::size_t(unit(rng) * 3.0) % 3);
  for (auto& b : bumps) {
    b.c = {unit(rng) * grid.L, unit(rng) * grid.L};
    b.rho = 0.25 + 0.25 * unit(rng);
    b.a = amp(rng);
  }
  const GridFunction u = GridFunction::sample(grid, [&](const Point& x) {
    double v = 0.0;
    for (const auto& b : bumps) {
      const double d0 = grid.wrap_offset(x[0], b.c[0]), d1 = grid.wrap_offset(x[1], b.c[1]);
      const double t = 1.0 - (d0 * d0 + d1 * d1) / (b.rho * b.rho);
      if (t > 0.0) v += b.a * t * t * t * t;
    }
    return v;
  });
  return gradient(u);
}

VectorField2D perp_gradient_field(const Grid& grid, double alpha, std::uint64_t seed) {
  if (grid.dim != 2) throw Error(ErrorKind::InvalidArgument, "perp-gradient fields live on 2-D grids");
  return perp_gradient(random_fourier_series(grid, 8, 2.0 + alpha, seed));
}

std::vector<BoundOperator> bound_operators(const std::string& family) {
  if (family == "hp_lambda")
    return {{"pi1", "h1"}, {"pi2", "hPhi"}, {"pi3", "h1"}, {"pi4", "L1"}, {"S", "L1"}, {"T", "hPhi"}};
  if (family == "Hp_lambda")
    return {{"pi1", "H1"}, {"pi2", "HPhi"}, {"pi3", "H1"}, {"pi4", "L1"}, {"S", "L1"}, {"T", "HPhi"}};
  if (family == "H1_bmo")
    return {{"pi1", "H1"}, {"pi2", "H_star_Phi"}, {"pi3", "H1"}, {"pi4", "L1"}, {"S", "L1"}, {"T", "H_star_Phi"}};
  config_error("unknown bounds family '" + family + "'");
}

void parallel_for(int count, int threads, const std::function<void(int)>& task) {
  if (count <= 0) return;
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first) first = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

std::vector<BoundRow> run_bounds_family(const ExperimentConfig& cfg, const std::string& family) {
  const Grid grid = config_grid(cfg);
  const FilterPair filter = build_filter(cfg.d);
  const FamilySetup setup = family_setup(family, cfg);
  const auto ops = bound_operators(family);
  const std::uint64_t fi = family_index(family);
  const double alpha = 1.0 / cfg.p - 1.0;
  const std::size_t trials = std::size_t(cfg.corpus_size);
  std::vector<BoundRow> rows(ops.size() * trials);
  parallel_for(cfg.corpus_size, cfg.threads, [&](int t) {
    const GridFunction f = random_coeff_expansion(grid, filter, setup.variant, setup.mother_only,
                                                  trial_seed(cfg.seed, kBoundsBase + 2 * fi, std::uint64_t(t)));
    const std::uint64_t gs = trial_seed(cfg.seed, kBoundsBase + 2 * fi + 1, std::uint64_t(t));
    const GridFunction g = setup.bmo_g ? bmo_sample(grid, gs) : lipschitz_sample(grid, alpha, gs);
    const ParaproductResult r = renormalize(f, g, filter, setup.variant);
    const double nf = hardy_quasinorm(f, setup.source);
    const double ng = dual_norm(g, setup.dual);
    for (std::size_t o = 0; o < ops.size(); ++o) {
      const std::string& name = ops[o].name;
      GridFunction value;
      if (name == "pi1") value = r.pi1;
      else if (name == "pi2") value = r.pi2;
      else if (name == "pi3") value = r.pi3;
      else if (name == "pi4" || name == "S") value = r.pi4;
      else value = r.pi1 + r.pi2 + r.pi3;
      BoundRow& row = rows[o * trials + std::size_t(t)];
      row.family = family;
      row.op = name;
      row.trial = t;
      row.J = cfg.J;
      row.target = hardy_or_l1_tag(ops[o].target, cfg.p);
      row.norm_target = target_norm(value, ops[o].target, cfg.p);
      row.norm_f = nf;
      row.norm_g = ng;
      const double denom = nf * ng;
      row.ratio = denom > 0.0 ? row.norm_target / denom : 0.0;
    }
  });
  return rows;
}

std::vector<IdentityRow> run_identity(const ExperimentConfig& cfg) {
  const Grid grid = config_grid(cfg);
  const FilterPair filter = build_filter(cfg.d);
  std::vector<IdentityRow> rows(std::size_t(cfg.corpus_size));
  parallel_for(cfg.corpus_size, cfg.threads, [&](int t) {
    std::mt19937_64 rf(trial_seed(cfg.seed, kIdentityF, std::uint64_t(t)));
    std::mt19937_64 rg(trial_seed(cfg.seed, kIdentityG, std::uint64_t(t)));
    std::normal_distribution<double> nd(0.0, 1.0);
    GridFunction f(grid), g(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = nd(rf);
    for (std::size_t i = 0; i < grid.size(); ++i) g[i] = nd(rg);
    const ParaproductResult r = renormalize(f, g, filter, cfg.variant);
    const GridFunction fg = pointwise_product(f, g);
    IdentityRow& row = rows[std::size_t(t)];
    row.trial = t;
    const double scale = sup_norm(fg);
    row.residual_relative = scale > 0.0 ? sup_norm(r.sum() - fg) / scale : sup_norm(r.sum());
    const GridFunction* parts[4] = {&r.pi1, &r.pi2, &r.pi3, &r.pi4};
    for (int i = 0; i < 4; ++i) row.norm_pi[i] = lp_norm(*parts[i], 2.0);
  });
  return rows;
}

std::vector<NormRow> run_norms(const ExperimentConfig& cfg) {
  const Grid grid = config_grid(cfg);
  const FilterPair filter = build_filter(cfg.d);
  const std::size_t per = cfg.spaces.size();
  std::vector<NormRow> rows(per * std::size_t(cfg.corpus_size));
  parallel_for(cfg.corpus_size, cfg.threads, [&](int t) {
    const GridFunction f = random_coeff_expansion(grid, filter, Variant::Inhomogeneous, false,
                                                  trial_seed(cfg.seed, kNorms, std::uint64_t(t)));
    for (std::size_t s = 0; s < per; ++s) {
      const std::string& tag = cfg.spaces[s];
      NormRow& row = rows[std::size_t(t) * per + s];
      row.function_id = t;
      if (tag == "lipschitz") {
        const auto spec = DualNormSpec::lipschitz(double(cfg.dim) * (1.0 / cfg.p - 1.0));
        row.space_tag = spec.tag();
        row.value = dual_norm(f, spec);
      } else if (tag == "bmo") {
        row.space_tag = "bmo";
        row.value = dual_norm(f, DualNormSpec::bmo());
      } else {
        const HardySpec spec = HardySpec::parse(tag, cfg.p);
        row.space_tag = spec.tag();
        row.value = hardy_quasinorm(f, spec);
      }
    }
  });
  return rows;
}

std::vector<StructureRow> run_structure(const ExperimentConfig& cfg) {
  const Grid grid = config_grid(cfg);
  const FilterPair filter = build_filter(cfg.d);
  const HardySpec hphi{HardySpace::hPhi, cfg.p};
  const HardySpec hp{HardySpace::hp, cfg.p};
  std::vector<StructureRow> rows(std::size_t(cfg.corpus_size));
  parallel_for(cfg.corpus_size, cfg.threads, [&](int t) {
    GridFunction f = random_coeff_expansion(grid, filter, Variant::Inhomogeneous, false,
                                            trial_seed(cfg.seed, kStructure, std::uint64_t(t)));
    const double raw = hardy_quasinorm(f, hphi);
    if (raw > 0.0) f *= 1.0 / raw;
    const StructureSplit split = structure_split(f, cfg.p);
    StructureRow& row = rows[std::size_t(t)];
    row.trial = t;
    row.norm_f_hPhi = hardy_quasinorm(f, hphi);
    row.norm_f0_h1 = hardy_quasinorm(split.f0, HardySpec::h1());
    row.norm_f1_hp = hardy_quasinorm(split.f1, hp);
    row.C_ratio = row.norm_f_hPhi > 0.0 ? (row.norm_f0_h1 + row.norm_f1_hp) / row.norm_f_hPhi : 0.0;
    row.n_atoms0 = int(split.atoms0.size());
    row.n_atoms1 = int(split.atoms1.size());
    row.reconstruction = sup_norm(split.f0 + split.f1 - f);
    for (const auto* list : {&split.atoms0, &split.atoms1})
      for (const auto& a : *list) row.atoms_valid = row.atoms_valid && a.report.overall;
  });
  return rows;
}

std::vector<DivCurlRow> run_divcurl(const ExperimentConfig& cfg) {
  const std::size_t nj = cfg.j_values.size();
  const std::size_t nm = cfg.modes.size();
  const double alpha = 1.0 / cfg.p - 1.0;
  std::vector<DivCurlRow> rows(std::size_t(cfg.corpus_size) * nj * nm);
  parallel_for(cfg.corpus_size * int(nj), cfg.threads, [&](int task) {
    const std::size_t t = std::size_t(task) / nj;
    const std::size_t ji = std::size_t(task) % nj;
    const Grid grid(2, cfg.j_values[ji], cfg.L);
    const VectorField2D F = gradient_field(grid, trial_seed(cfg.seed, kDivF, t));
    const VectorField2D G = perp_gradient_field(grid, alpha, trial_seed(cfg.seed, kDivG, t));
    for (std::size_t m = 0; m < nm; ++m) {
      DivCurlRow& row = rows[(t * nj + ji) * nm + m];
      row.trial = int(t);
      row.J = grid.J;
      row.report = divcurl_experiment(F, G, cfg.p, cfg.modes[m]);
      row.report.certified =
          row.report.curl_residual <= cfg.tol.certify && row.report.div_residual <= cfg.tol.certify;
    }
  });
  return rows;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_header(Subcommand s) {
  switch (s) {
    case Subcommand::identity: return "trial,residual_relative,norm_pi1,norm_pi2,norm_pi3,norm_pi4\n";
    case Subcommand::bounds: return "family,operator,trial,J,target,norm_target,norm_f,norm_g,ratio\n";
    case Subcommand::norms: return "function_id,space_tag,value\n";
    case Subcommand::structure: return "trial,norm_f_hPhi,norm_f0_h1,norm_f1_hp,C_ratio,n_atoms0,n_atoms1\n";
    case Subcommand::divcurl: return "trial,J,curl_residual,div_residual,ratio,mode\n";
  }
  return "\n";
}

RunResult run(Subcommand s, const ExperimentConfig& cfg, const std::string& out_dir, bool dump_coeffs) {
  cfg.validate(s);
  namespace fs = std::filesystem;
  const fs::path out(out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + out.string() + ": " + ec.message());

  RunResult result;
  std::ostringstream csv;
  csv << csv_header(s);
  json meta{{"subcommand", to_string(s)}, {"config", json::parse(cfg.to_json())}};
  const auto fail = [&](const std::string& what) { result.failures.push_back(what); };
  const auto fd = format_double;

  switch (s) {
    case Subcommand::identity: {
      double worst = 0.0;
      for (const auto& r : run_identity(cfg)) {
        csv << r.trial << ',' << fd(r.residual_relative);
        for (double v : r.norm_pi) csv << ',' << fd(v);
        csv << '\n';
        worst = std::max(worst, r.residual_relative);
        if (!(r.residual_relative <= cfg.tol.identity))
          fail("trial " + std::to_string(r.trial) + ": identity residual " + fd(r.residual_relative));
      }
      meta["max_residual_relative"] = worst;
      break;
    }
    case Subcommand::bounds: {
      json maxima = json::object();
      for (const auto& family : cfg.families) {
        for (const auto& r : run_bounds_family(cfg, family)) {
          csv << r.family << ',' << r.op << ',' << r.trial << ',' << r.J << ',' << r.target << ','
              << fd(r.norm_target) << ',' << fd(r.norm_f) << ',' << fd(r.norm_g) << ',' << fd(r.ratio) << '\n';
          if (!std::isfinite(r.ratio)) fail(family + "/" + r.op + " trial " + std::to_string(r.trial) + ": ratio not finite");
          const std::string key = family + "/" + r.op;
          if (maxima[key].is_null()) maxima[key] = 0.0;
          maxima[key] = std::max(maxima[key].get<double>(), r.ratio);
        }
      }
      meta["max_ratio"] = maxima;
      break;
    }
    case Subcommand::norms: {
      const auto rows = run_norms(cfg);
      for (const auto& r : rows) csv << r.function_id << ',' << r.space_tag << ',' << fd(r.value) << '\n';
      // ‖f‖_{h^{Φ_p}} ≤ min(‖f‖_{h¹}, ‖f‖_{hᵖ}) whenever all three were requested.
      const auto find = [&](const std::string& tag) {
        const auto it = std::find(cfg.spaces.begin(), cfg.spaces.end(), tag);
        return it == cfg.spaces.end() ? -1 : int(it - cfg.spaces.begin());
      };
      const int iphi = find("hPhi"), ih1 = find("h1"), ihp = find("hp");
      if (iphi >= 0 && ih1 >= 0 && ihp >= 0)
        for (int t = 0; t < cfg.corpus_size; ++t) {
          const std::size_t base = std::size_t(t) * cfg.spaces.size();
          const double phi = rows[base + std::size_t(iphi)].value;
          const double bound = std::min(rows[base + std::size_t(ih1)].value, rows[base + std::size_t(ihp)].value);
          if (!(phi <= bound * (1.0 + 1e-9))) fail("function " + std::to_string(t) + ": hPhi exceeds min(h1, hp)");
        }
      break;
    }
    case Subcommand::structure: {
      double worst = 0.0;
      for (const auto& r : run_structure(cfg)) {
        csv << r.trial << ',' << fd(r.norm_f_hPhi) << ',' << fd(r.norm_f0_h1) << ',' << fd(r.norm_f1_hp) << ','
            << fd(r.C_ratio) << ',' << r.n_atoms0 << ',' << r.n_atoms1 << '\n';
        worst = std::max(worst, r.C_ratio);
        const std::string id = "trial " + std::to_string(r.trial);
        if (!(r.reconstruction <= cfg.tol.reconstruction)) fail(id + ": f0 + f1 differs from f by " + fd(r.reconstruction));
        if (!(r.C_ratio <= cfg.c_max)) fail(id + ": C_ratio " + fd(r.C_ratio) + " above c_max");
        if (!r.atoms_valid) fail(id + ": an atom failed validation");
      }
      meta["max_C_ratio"] = worst;
      break;
    }
    case Subcommand::divcurl: {
      json maxima = json::object();
      for (const auto& r : run_divcurl(cfg)) {
        const auto& rep = r.report;
        csv << r.trial << ',' << r.J << ',' << fd(rep.curl_residual) << ',' << fd(rep.div_residual) << ','
            << fd(rep.ratio) << ',' << to_string(rep.mode) << '\n';
        const std::string id = "trial " + std::to_string(r.trial) + " J=" + std::to_string(r.J);
        if (!rep.certified) fail(id + ": pair not certified");
        if (!std::isfinite(rep.ratio)) fail(id + ": ratio not finite");
        const std::string key = to_string(rep.mode) + "/J=" + std::to_string(r.J);
        if (maxima[key].is_null()) maxima[key] = 0.0;
        maxima[key] = std::max(maxima[key].get<double>(), rep.ratio);
      }
      meta["max_ratio"] = maxima;
      meta["domain"] = "periodic torus [0,l)^2; Riesz transforms and norms are periodized, so ratios are not "
                       "the constants of the whole-space statements";
      break;
    }
  }

  meta["failures"] = result.failures;
  const fs::path csv_path = out / (to_string(s) + ".csv");
  const fs::path meta_path = out / (to_string(s) + "_meta.json");
  write_text(csv_path, csv.str());
  write_text(meta_path, meta.dump(2) + "\n");
  result.files = {csv_path.string(), meta_path.string()};

  if (dump_coeffs && s != Subcommand::divcurl) {
    const fs::path dir = out / "coeffs";
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
    const Grid grid = config_grid(cfg);
    const FilterPair filter = build_filter(cfg.d);
    const auto dump = [&](const std::string& name, const GridFunction& f, Variant v) {
      std::ostringstream os;
      dump_coefficients(os, forward(f, variant_j0(grid, v), filter), 1e-14);
      const fs::path path = dir / (name + ".txt");
      write_text(path, os.str());
      result.files.push_back(path.string());
    };
    for (int t = 0; t < cfg.corpus_size; ++t) {
      const auto ut = std::uint64_t(t);
      const std::string id = std::to_string(t);
      switch (s) {
        case Subcommand::identity: {
          std::mt19937_64 rf(trial_seed(cfg.seed, kIdentityF, ut));
          std::normal_distribution<double> nd(0.0, 1.0);
          GridFunction f(grid);
          for (std::size_t i = 0; i < grid.size(); ++i) f[i] = nd(rf);
          dump("identity_f_" + id, f, cfg.variant);
          break;
        }
        case Subcommand::bounds:
          for (const auto& family : cfg.families) {
            const FamilySetup setup = family_setup(family, cfg);
            dump("bounds_" + family + "_f_" + id,
                 random_coeff_expansion(grid, filter, setup.variant, setup.mother_only,
                                        trial_seed(cfg.seed, kBoundsBase + 2 * family_index(family), ut)),
                 setup.variant);
          }
          break;
        case Subcommand::norms:
          dump("norms_f_" + id,
               random_coeff_expansion(grid, filter, Variant::Inhomogeneous, false, trial_seed(cfg.seed, kNorms, ut)),
               Variant::Inhomogeneous);
          break;
        case Subcommand::structure:
          dump("structure_f_" + id,
               random_coeff_expansion(grid, filter, Variant::Inhomogeneous, false, trial_seed(cfg.seed, kStructure, ut)),
               Variant::Inhomogeneous);
          break;
        case Subcommand::divcurl:
          break;
      }
    }
  }

  result.exit_code = result.failures.empty() ? 0 : 3;
  return result;
}

}  // namespace renorm
