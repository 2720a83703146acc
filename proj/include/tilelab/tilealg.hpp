#pragma once

// Tile bookkeeping on a finite universe: cluster/separated/zero classes, the
// F-mass partition, mass classes, trees, the tree foliation into layers and
// the set-resolution families attached to the TFR forests.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tilelab/carleson.hpp"
#include "tilelab/dyadic.hpp"
#include "tilelab/setmodel.hpp"
#include "tilelab/tfr.hpp"

namespace tilelab {

struct UniverseBounds {
  int k_min = kMinOperatorLevel;
  int k_max = -1;                  // -1: grid level - 2
  std::int64_t band_max = 0;       // 0: 2^(grid level - 1)
  bool scale_separated = false;    // keep scales congruent to k_min mod 10
};

struct TileRecord {
  Tile tile;
  std::int64_t e_count = 0;        // |E(P)| in grid cells
  DyadicRational itilde_f;         // |Ĩ_P ∩ F|
};

/// Every tile [ω, I] with |I| = 2^-k for the retained scales and ω ⊂ [0, ∞)
/// meeting [0, band_max). Tiles are stored scale by scale, then by I, then by ω.
class TileUniverse {
 public:
  /// Throws std::invalid_argument for bounds outside [kMinOperatorLevel, grid level]
  /// or a linearizer without a grid.
  TileUniverse(DyadicSet f, LacunarySequence seq, Linearizer nfun, UniverseBounds bounds = {});

  const DyadicSet& f() const { return f_; }
  const LacunarySequence& seq() const { return seq_; }
  const Linearizer& nfun() const { return nfun_; }
  int grid_level() const { return nfun_.grid_level; }
  std::int64_t band_max() const { return band_max_; }
  const std::vector<int>& scales() const { return scales_; }

  std::size_t size() const { return records_.size(); }
  const TileRecord& operator[](std::size_t i) const { return records_[i]; }
  const Tile& tile(std::size_t i) const { return records_[i].tile; }
  std::span<const TileRecord> records() const { return records_; }

  std::optional<std::size_t> index_of(const Tile& p) const;
  /// Next retained scale below k (coarser), if any.
  std::optional<int> coarser_scale(int k) const;

 private:
  DyadicSet f_;
  LacunarySequence seq_;
  Linearizer nfun_;
  std::int64_t band_max_ = 0;
  std::vector<int> scales_;
  std::vector<std::size_t> offsets_;        // first record of each scale
  std::vector<std::int64_t> omega_counts_;  // frequency slots per scale
  std::vector<TileRecord> records_;
};

/// c(α) = 10 (1 + ⌊1/(α - 1)⌋); requires α > 1.
std::int64_t cluster_constant(const Rational& alpha);

/// 0 ∈ c ω, the dilation taken as an open interval.
bool is_cluster(const FrequencyInterval& omega, std::int64_t c);

struct TileClass {
  std::vector<std::size_t> cluster;
  std::vector<std::size_t> sep;
  std::vector<std::size_t> zero;
};

TileClass classify_tiles(const TileUniverse& u);

/// ∃ integer shift m with 5Ĩ_P + m ⊆ 200 I, both dilations open, and |I_P| <= |I|.
bool fmass_fits(const DyadicInterval& ip, const DyadicInterval& i);

struct FMassPartition {
  int k_f = 0;
  std::vector<int> class_of;                     // per universe tile; 0 when not in any 𝓟^k
  std::vector<std::vector<std::size_t>> classes; // classes[k] = 𝓟^k, k = 1..k_f (slot 0 unused)
  std::vector<std::size_t> unassigned;           // separated tiles never admitted

  /// Separated tiles outside 𝓟^1 .. 𝓟^k (unassigned ones included).
  bool above(std::size_t tile, int k) const { return class_of[tile] == 0 || class_of[tile] > k; }
};

/// 𝓟^k is the set of separated tiles whose smallest admissible k it is.
FMassPartition f_mass_partition(const TileUniverse& u, std::span<const std::size_t> sep);

/// A(P) straight from the definition: the max of |E(P')|/|I'| over P' ∈ 𝓟^k with P <= P'.
DyadicRational mass(std::size_t tile, int k, const TileUniverse& u, const FMassPartition& fm);

struct MassTable {
  std::vector<DyadicRational> mass;           // A(P) for tiles with an F-mass class, else 0
  std::vector<std::optional<int>> n_class;    // n with A(P) ∈ (2^-n-1, 2^-n]; none for A = 0
  std::vector<std::size_t> zero_mass;         // assigned tiles with A(P) = 0
};

/// A(P) for all assigned tiles by dynamic programming over coarser tiles.
MassTable mass_partition(const TileUniverse& u, const FMassPartition& fm);

/// n with a ∈ (2^-n-1, 2^-n]; requires 0 < a <= 1.
int mass_class(const DyadicRational& a);

/// Smallest 0-based j with n_j ∈ ω_P, if any.
std::optional<int> frequency_index(const Tile& p, const LacunarySequence& seq);

struct TreeFamily {
  Tile top;
  std::vector<Tile> members;     // top first, then by scale and position
  int l = 0;                     // 0-based lacunary index
  std::optional<int> n;          // mass class; none for zero mass or no F-mass class
  std::optional<int> m;          // F-mass class; none when unassigned
  std::optional<int> p;          // foliation layer, 1-based
  int a = 0;                     // tree index inside the (l, m) row
  int b = 0;                     // uniform-mass subtree index inside (l, m, a, n)
};

/// Maximal trees among `tiles` (all containing n_l) with uniform (m, n),
/// ordered by decreasing |I_top|, then leftmost top, then lowest frequency.
std::vector<TreeFamily> tree_decompose(const TileUniverse& u, std::span<const std::size_t> tiles, int l,
                                       const FMassPartition& fm, const MassTable& mt);

/// tree_decompose over every frequency class of the separated tiles.
std::vector<TreeFamily> decompose_all(const TileUniverse& u, const TileClass& tc, const FMassPartition& fm,
                                      const MassTable& mt);

struct FoliationResult {
  std::vector<int> layer;            // 1-based, per input tree
  std::vector<bool> selected;        // top of its layer family
  std::vector<std::size_t> family;   // index of the selected tree absorbing it (itself when selected)
  int layer_count = 0;
};

/// Layered selection on trees sharing (l, n): a tree is selected when some
/// positive-length part of Ĩ_top escapes every strictly larger remaining top;
/// each selected tree absorbs the remaining trees of its F-mass class that are
/// no larger than it and whose Ĩ overlaps its own. Repeats on what is left.
FoliationResult star_foliation(std::span<const TreeFamily> trees);

/// Writes the layers of `result` into `trees`.
void apply_layers(std::span<TreeFamily> trees, const FoliationResult& result);

/// Largest number of intervals Ĩ_P covering a single point.
int max_overlap(std::span<const DyadicInterval> tops);

/// Whether Ĩ_a and Ĩ_b share a set of positive length on the torus.
bool itilde_overlap(const DyadicInterval& a, const DyadicInterval& b);

/// Whether Ĩ_a and the torus interval b share a set of positive length.
bool itilde_meets(const DyadicInterval& a, const DyadicInterval& b);

struct ResolutionFamily {
  int k = 0;
  int kind = 0;                  // 1 or 2
  ZeroFreqTile r;
  DyadicInterval root;           // I ∈ 𝓘_k carrying R
  std::vector<std::size_t> tiles;
};

struct SetResolution {
  std::vector<ResolutionFamily> families;
  std::vector<std::size_t> f_zero;  // 𝓟[F,0]
};

/// Families for 1 <= k < k_F, empty ones omitted. `forests` must be
/// tfr_global(u.f()); throws std::invalid_argument when they were built from another set.
SetResolution set_resolution(const TileUniverse& u, const TileClass& tc, const FMassPartition& fm,
                             std::span<const TfrForest> forests);

/// Tiles missing from 𝓟(0) ∪ 𝓟_cluster ∪ 𝓟[F,0] ∪ every family.
std::vector<std::size_t> uncovered_tiles(const TileUniverse& u, const TileClass& tc, const SetResolution& res);

/// Random N(x): one uniformly chosen frequency index per cell of `block_level`.
Linearizer random_linearizer(Rng& rng, int grid_level, std::span<const std::int64_t> freqs, int block_level);

}  // namespace tilelab
