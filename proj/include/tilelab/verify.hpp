#pragma once

// Verification suites: each experiment sweeps a parameter range, turns an
// inequality into ratios and checks every ratio against a band.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tilelab/carleson.hpp"
#include "tilelab/dyadic.hpp"
#include "tilelab/setmodel.hpp"
#include "tilelab/tilealg.hpp"

namespace tilelab {

struct Band {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
  friend bool operator==(const Band&, const Band&) = default;
};

struct RatioPoint {
  std::string point;
  double ratio = 0.0;
  Band band;

  bool pass() const { return band.contains(ratio); }
};

/// Rows carry their own band; most share the report band, a few (spreads,
/// exponents, violation counts) have a fixed one.
struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<RatioPoint> ratios;
  Band band;
  bool pass = false;
  std::int64_t runtime_ms = 0;
  std::vector<std::pair<std::string, double>> stats;  // diagnostics, never gate `pass`

  void add(std::string point, double ratio) { ratios.push_back({std::move(point), ratio, band}); }
  void add(std::string point, double ratio, Band b) { ratios.push_back({std::move(point), ratio, b}); }
  void param(std::string key, std::string value) { params.emplace_back(std::move(key), std::move(value)); }
  void stat(std::string key, double value) { stats.emplace_back(std::move(key), value); }
  /// pass = every row inside its band.
  void finalize();
  /// Smallest and largest ratio among rows whose point starts with `prefix`.
  std::pair<double, double> range(const std::string& prefix = "") const;
};

/// Frozen ratio bands keyed by experiment.
class GoldenBands {
 public:
  GoldenBands() = default;
  explicit GoldenBands(std::map<std::string, Band> bands) : bands_(std::move(bands)) {}

  /// Reads {"bands": {key: {"lo": x, "hi": y, ...}}}; throws std::runtime_error.
  static GoldenBands load(const std::string& path);
  /// $TILELAB_GOLDEN when set, otherwise the file shipped with the sources.
  static std::string default_path();
  static GoldenBands load_default() { return load(default_path()); }

  /// Throws std::out_of_range for an unknown key.
  Band at(const std::string& key) const;
  bool has(const std::string& key) const { return bands_.count(key) != 0; }
  const std::map<std::string, Band>& bands() const { return bands_; }

 private:
  std::map<std::string, Band> bands_;
};

// Bands fixed by the checked statements themselves rather than by calibration.
inline constexpr double kSpreadLimit = 4.0;
inline constexpr double kOverlapLimit = 100.0;
inline constexpr double kExponentTarget = 2.0;
inline constexpr double kExponentSlack = 0.2;
inline constexpr int kZygmundMaxTerms = 64;

/// log2(4 / |F|) |F|.
double llog_denominator(double measure);

/// Sum over dyadic value layers F_l = {2^l <= |f| < 2^(l+1)} of 2^l |F_l| log2(4/|F_l|),
/// for cell values on a uniform grid.
double llogl_norm(const std::vector<double>& values);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// ------------------------------------------------------------------ lower bound

struct LowerBoundParams {
  int grid_level = 16;
  int n_min = 4;
  int n_max = 10;
};

/// F = [1/2 - 2^-N, 1/2): r(N) = ||sup_j |H_{n_j} χ_F| ||_1 / (|F| log2(4/|F|)).
/// Rows "N=.." in the golden band plus "spread" = max/min in [1, 4].
/// Throws std::invalid_argument when N > L - 4 or the range is empty.
ExperimentReport lower_bound_experiment(const LowerBoundParams& params, const LacunarySequence& seq,
                                        const Band& band);

/// The N ≡ 0 reduction: ||H χ_F||_1 / (|F| log2(4/|F|)) for the same F.
double hilbert_lower_ratio(int grid_level, int big_n);

// ------------------------------------------------------------------ upper bound

enum class UpperMode { random, adversarial };

struct UpperTrial {
  double ratio = 0.0;
  double measure = 0.0;
  UpperMode mode = UpperMode::random;
};

struct UpperBoundParams {
  int trials = 200;
  int grid_level = 14;
  std::uint64_t seed = 1;
  int measure_exp_min = 2;
  int measure_exp_max = 10;
};

/// ||χ_F C^* g||_1 / (|F| log2(4/|F|)) for one (F, g, N).
double adjoint_ratio(const DyadicSet& f, const GridFunction& g, const Linearizer& nfun);

/// Trial t alternates between a random blockwise N with random unimodular g and
/// the adversarial pair N = linearizer of χ_F, g = phase of T χ_F.
UpperTrial upper_bound_trial(const UpperBoundParams& params, const LacunarySequence& seq, int trial);

ExperimentReport upper_bound_experiment(const UpperBoundParams& params, const LacunarySequence& seq,
                                        const Band& band);

// ---------------------------------------------------------------------- Zygmund

enum class SetKind { interval, cantor };

struct ZygmundParams {
  int n_min = 3;
  int n_max = 6;
  int s_min = 1;
  int s_max = 3;
  std::vector<SetKind> kinds{SetKind::interval, SetKind::cantor};
  std::uint64_t samples = 1 << 16;
  std::uint64_t seed = 1;
};

/// Monte Carlo ∫_F |sum_{j=1}^M e^{2 pi i 2^j x}| dx / (|F| min(√N, √M) √M).
/// Throws std::invalid_argument when M exceeds kZygmundMaxTerms.
double zygmund_ratio(const DyadicSet& f, int big_n, int m_terms, std::uint64_t samples, std::uint64_t seed);

/// Every (N, s, kind) against the upper band; Cantor rows also against the
/// lower band; interval rows with M = N against [0, 1].
ExperimentReport zygmund_experiment(const ZygmundParams& params, const Band& upper, const Band& cantor);

// ------------------------------------------------------------------- Main Lemma

/// A generated instance: a tree under a top with mass at most 2^-n, the
/// interval family with its weights, and both sides of the inequality.
struct MainLemmaInstance {
  int n = 0;
  int k = 0;
  Tile top;
  std::vector<Tile> tree;
  Linearizer nfun;
  GridFunction g;
  std::vector<DyadicInterval> min_cells;   // minimal adjoint-support cells
  std::vector<DyadicInterval> cz;          // CZ decomposition of Ĩ_top
  std::vector<DyadicInterval> family;      // 𝓘 of the lemma
  std::vector<int> weights;                // k(I) per family member
  double lhs = 0.0;
  double rhs = 0.0;
  int retries = 0;                         // CZ or packing draws thrown away
};

struct MainLemmaParams {
  int trials = 200;
  int grid_level = 12;
  std::uint64_t seed = 1;
  int n_max = 4;
  int k_max = 8;
};

MainLemmaInstance main_lemma_instance(const MainLemmaParams& params, int trial);

/// Σ_I 2^-k(I) ∫_I |g|^2 for grid samples.
double weighted_energy(const GridFunction& u, std::span<const DyadicInterval> family, std::span<const int> weights);

ExperimentReport main_lemma_check(const MainLemmaParams& params, const Band& band);

// ---------------------------------------------------------------- L^2 mass

struct MassTreeParams {
  int grid_level = 12;
  int n_min = 0;
  int n_max = 6;
  int trials = 50;
  int iterations = 24;
  std::uint64_t seed = 1;
};

struct MassTree {
  int n = 0;
  std::vector<Tile> tree;
  Linearizer nfun;
};

/// Tree under a random top, every tile with |E(P)| / |I_P| = 2^-n exactly.
MassTree uniform_mass_tree(int grid_level, int n, std::uint64_t seed);

/// Power iteration for ||T^tree||_{2 -> 2}.
double tree_operator_norm(const MassTree& t, const KernelFamily& kern, int iterations, std::uint64_t seed);

/// ||T^tree|| / 2^(-n/2) over the sweep.
ExperimentReport l2_mass_check(const MassTreeParams& params, const Band& band);

// ---------------------------------------------------------------------- packing

struct PackingParams {
  int trials = 10000;
  int grid_level = 12;
  std::uint64_t seed = 1;
  int block = 500;
  int max_tiles = 48;
};

struct PackingTrial {
  DyadicInterval top;
  std::vector<Tile> antichain;
  Linearizer nfun;
  std::int64_t e_total = 0;      // Σ |E(P)| in cells
  std::int64_t top_cells = 0;    // |I| in cells
  std::int64_t multiplicity = 0; // max over x of #{P : x in E(P)}
};

/// Tiles drawn at random below `top` and kept when incomparable with every tile kept so far.
std::vector<Tile> random_antichain(Rng& rng, const DyadicInterval& top, int grid_level, std::int64_t band, int count);

PackingTrial packing_trial(const PackingParams& params, int trial);

/// Rows per block of trials: "sum" = max Σ|E(P)|/|I| in [0, 1] and
/// "multiplicity" = max pointwise count of the E(P) in [0, 1].
ExperimentReport packing_check(const PackingParams& params);

// ------------------------------------------------------------------- foliation

struct FoliationParams {
  int trials = 1000;
  int grid_level = 9;
  int extra_band = 3;
  std::uint64_t seed = 1;
  int block = 50;
  int adversarial_trials = 1000;
};

struct FoliationTrial {
  int max_overlap = 0;         // layer-1 tops, over all (l, n) groups
  int max_layers = 0;
  int k_f = 0;
  std::size_t trees = 0;
};

FoliationTrial foliation_trial(const FoliationParams& params, int trial);

struct TripleTrial {
  std::vector<TreeFamily> trees;
  int admitted = 0;            // nested triples among layer-1 tops with a common point
  int nested_present = 0;      // triples among all tops with a common point
};

/// Tops at scales k, k + 10, k + 20 (plus decoys) sharing a point, often with
/// aligned Ĩ endpoints, run through the foliation.
TripleTrial nested_triple_trial(std::uint64_t seed, int trial);

/// Nested triples (strictly decreasing |I|) among `tops` whose closed Ĩ share a point.
int count_common_point_triples(std::span<const DyadicInterval> tops);

ExperimentReport foliation_overlap_check(const FoliationParams& params);

// ------------------------------------------------------------------------ Walsh

struct WalshParams {
  int grid_level = 16;
  int n_min = 4;
  int n_max = 10;
};

/// f_n = min(2^n, 1/x) at the left endpoints of the grid cells (2^n at x = 0).
std::vector<double> walsh_test_function(int grid_level, int n);

struct WalshPoint {
  int n = 0;
  double carleson_l1 = 0.0;
  double llogl = 0.0;
};

WalshPoint walsh_point(int grid_level, int n);

/// Rows "n=.." = ||C_W f_n||_1 / ||f_n||_{L log L} in the band and "exponent" =
/// fitted growth of ||C_W f_n||_1 in [2 - 0.2, 2 + 0.2].
ExperimentReport walsh_sharpness_experiment(const WalshParams& params, const Band& band);

// -------------------------------------------------------------- TFR invariants

struct TfrSuiteParams {
  int sets = 100;
  int grid_level = 12;
  std::uint64_t seed = 1;
};

/// One row per structural property: its violation count, band [0, 0].
ExperimentReport tfr_invariant_suite(const TfrSuiteParams& params);

/// The random set used by trial t of the suite.
DyadicSet tfr_suite_set(const TfrSuiteParams& params, int trial);

}  // namespace tilelab
