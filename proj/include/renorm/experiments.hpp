#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "renorm/divcurl.hpp"
#include "renorm/grid.hpp"
#include "renorm/paraproducts.hpp"

namespace renorm {

enum class Subcommand { identity, bounds, norms, structure, divcurl };

std::string to_string(Subcommand s);
/// Throws Config on an unknown name.
Subcommand parse_subcommand(const std::string& name);

struct Tolerances {
  double identity = 1e-8;        // relative sup residual of fg − ΣΠᵢ
  double reconstruction = 1e-9;  // sup|f0 + f1 − f|
  double certify = kCertifyTolerance;
};

/// Config file keys are the lowercase field names ("j", "l", "corpus_size", ...).
struct ExperimentConfig {
  int dim = 1;
  int J = 10;
  int L = 8;
  double p = 0.6;
  int d = 4;  // wavelet regularity
  std::uint64_t seed = 1;
  int corpus_size = 30;
  int threads = 1;

  Variant variant = Variant::Inhomogeneous;  // identity
  /// bounds: any of "hp_lambda", "Hp_lambda", "H1_bmo".
  std::vector<std::string> families{"hp_lambda", "Hp_lambda", "H1_bmo"};
  /// norms: Hardy tags understood by HardySpec::parse plus "lipschitz" and "bmo".
  std::vector<std::string> spaces{"hp", "Hp", "hPhi", "HPhi", "h1", "h_star_Phi", "h_musielak_phi_p", "lipschitz", "bmo"};
  std::vector<int> j_values{6, 7, 8};  // divcurl
  std::vector<DivCurlMode> modes{DivCurlMode::hp_times_lipschitz, DivCurlMode::h1_times_bmo};
  double c_max = 100.0;  // structure: largest acceptable (‖f0‖_{h¹} + ‖f1‖_{hᵖ}) / ‖f‖_{h^{Φ_p}}
  Tolerances tol;

  /// Per-subcommand defaults (grid sizes the acceptance runs use).
  static ExperimentConfig defaults(Subcommand s);
  /// Overlays JSON text on `base`. Throws Config on malformed input, unknown keys
  /// or values outside their invariants.
  static ExperimentConfig parse(const std::string& json_text, const ExperimentConfig& base);
  /// Throws Config unless the fields satisfy their invariants for `s`.
  void validate(Subcommand s) const;
  std::string to_json() const;
};

/// Per-trial generator. Every draw depends only on (seed, stream, trial), so a
/// trial regenerates bit-exactly at any grid resolution and in any thread.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t trial);

/// Sparse random wavelet expansion: a few coefficients on levels j0..j0+5
/// (scale ≥ 2^{-5}), fathers included unless `mother_only`. Coefficients are
/// drawn independently of J, so different resolutions sample the same function.
GridFunction random_coeff_expansion(const Grid& grid, const FilterPair& filter, Variant variant, bool mother_only,
                                    std::uint64_t seed);

/// Random Fourier series Σ_{0<|k|∞≤K} |k|^{-decay}(a_k cos + b_k sin)(2πk·x/L) scaled to sup 1.
GridFunction random_fourier_series(const Grid& grid, int K, double decay, std::uint64_t seed);

/// Λ_{nα}-type sample: decay 1 + α, K = 32 (1-D) or 8 (2-D).
GridFunction lipschitz_sample(const Grid& grid, double alpha, std::uint64_t seed);
/// bmo-type sample: decay 1, K = 32 (1-D) or 8 (2-D).
GridFunction bmo_sample(const Grid& grid, std::uint64_t seed);

/// ∇u for u a sum of one to three compact bumps (1 − |x−c|²/ρ²)⁴₊ on a 2-D grid.
VectorField2D gradient_field(const Grid& grid, std::uint64_t seed);
/// ∇⊥v for a random 2-D Fourier series v; divergence free on the grid.
VectorField2D perp_gradient_field(const Grid& grid, double alpha, std::uint64_t seed);

/// Bilinear operator tags of the bounds sweeps and their target spaces.
struct BoundOperator {
  std::string name;    // pi1 .. pi4, S, T
  std::string target;  // Hardy tag or "L1"
};
std::vector<BoundOperator> bound_operators(const std::string& family);

struct BoundRow {
  std::string family;
  std::string op;
  int trial = 0;
  int J = 0;
  std::string target;
  double norm_target = 0.0;
  double norm_f = 0.0;
  double norm_g = 0.0;
  double ratio = 0.0;
};

/// Rows for one family at the configured grid, ordered by (operator, trial).
std::vector<BoundRow> run_bounds_family(const ExperimentConfig& cfg, const std::string& family);

struct IdentityRow {
  int trial = 0;
  double residual_relative = 0.0;
  double norm_pi[4] = {0.0, 0.0, 0.0, 0.0};  // L² norms
};
std::vector<IdentityRow> run_identity(const ExperimentConfig& cfg);

struct NormRow {
  int function_id = 0;
  std::string space_tag;
  double value = 0.0;
};
std::vector<NormRow> run_norms(const ExperimentConfig& cfg);

struct StructureRow {
  int trial = 0;
  double norm_f_hPhi = 0.0;
  double norm_f0_h1 = 0.0;
  double norm_f1_hp = 0.0;
  double C_ratio = 0.0;
  int n_atoms0 = 0;
  int n_atoms1 = 0;
  double reconstruction = 0.0;  // sup|f0 + f1 − f|, not part of the CSV
  bool atoms_valid = true;      // every atom passed validate_atom
};
std::vector<StructureRow> run_structure(const ExperimentConfig& cfg);

struct DivCurlRow {
  int trial = 0;
  int J = 0;
  DivCurlReport report;
};
/// Rows ordered by (trial, J, mode).
std::vector<DivCurlRow> run_divcurl(const ExperimentConfig& cfg);

/// Runs `task(i)` for i in [0, count) on up to `threads` workers. Rethrows the
/// first exception after all workers stop.
void parallel_for(int count, int threads, const std::function<void(int)>& task);

struct RunResult {
  int exit_code = 0;  // 0 success, 3 invariant failure
  std::vector<std::string> failures;
  std::vector<std::string> files;
};

/// Writes <out>/<subcommand>.csv and <out>/<subcommand>_meta.json; with
/// `dump_coeffs`, also <out>/coeffs/ with the corpus wavelet coefficients.
RunResult run(Subcommand s, const ExperimentConfig& cfg, const std::string& out_dir, bool dump_coeffs = false);

/// The CSV text of a run, without touching the filesystem.
std::string csv_header(Subcommand s);
std::string format_double(double v);

}  // namespace renorm
