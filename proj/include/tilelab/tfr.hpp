#pragma once

// Time-frequency regularization of a set: the {U,L}-labelled recursion over
// the Hardy-Littlewood level sets producing forests of 0-frequency tiles.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tilelab/dyadic.hpp"
#include "tilelab/setmodel.hpp"

namespace tilelab {

/// Tile R(I) = [[0, |I|^-1), I], identified with its interval.
struct ZeroFreqTile {
  DyadicInterval interval;

  FrequencyInterval omega() const { return {interval.level, 0}; }
  Tile tile() const { return {omega(), interval}; }

  friend bool operator==(const ZeroFreqTile&, const ZeroFreqTile&) = default;
  friend std::strong_ordering operator<=>(const ZeroFreqTile&, const ZeroFreqTile&) = default;
};

struct TfrStep {
  std::int64_t alpha = 0;
  std::vector<DyadicInterval> b;
  std::vector<DyadicInterval> b_upper;  // |J|^-1 > alpha
  std::vector<DyadicInterval> b_lower;  // |J|^-1 < alpha
};

/// One pass of the central body on a nonempty disjoint family.
/// Throws std::invalid_argument for an empty or overlapping input.
TfrStep tfr_step(std::span<const DyadicInterval> a);

struct TfrNode {
  std::string word;                  // over {U, L}; empty at the root
  std::optional<std::int64_t> alpha;  // absent only for an empty root input
  std::vector<DyadicInterval> input;
  std::vector<DyadicInterval> c_set;
  std::vector<ZeroFreqTile> tiles;
  std::optional<std::size_t> upper;  // index of the U child
  std::optional<std::size_t> lower;  // index of the L child

  /// Level shared by every tile of the node.
  int tile_level() const { return tiles.front().interval.level; }
};

/// Nodes in depth-first order; nodes[0] is the root.
struct TfrTree {
  std::vector<TfrNode> nodes;

  const TfrNode& root() const { return nodes.front(); }
  const TfrNode* find(const std::string& word) const;
};

/// Runs the recursion below I ∈ 𝓘_k on the input 𝓘_{k-1}(I); requires k >= 2.
TfrTree tfr_build(const DyadicSet& f, int k, const DyadicInterval& i);

struct TfrRoot {
  DyadicInterval interval;
  ZeroFreqTile root_tile;
  TfrTree tree;  // empty for k = 1
};

struct TfrForest {
  int k = 0;
  std::uint64_t set_fingerprint = 0;  // DyadicSet::fingerprint of the source set
  std::vector<TfrRoot> roots;  // keyed by level_sets(f, k), in position order
  std::vector<DyadicInterval> tile_index;  // every tile interval, sorted, for lookups

  /// Index of the root whose interval contains iv, if any.
  std::optional<std::size_t> root_of(const DyadicInterval& iv) const;
  /// Whether R is a root tile or a tile of some node.
  bool contains(const ZeroFreqTile& r) const;
  std::size_t tile_count() const;
  std::vector<ZeroFreqTile> all_tiles() const;
};

TfrForest tfr_forest(const DyadicSet& f, int k);

/// Forests for k = 1 .. k_F; throws std::invalid_argument for an empty set.
std::vector<TfrForest> tfr_global(const DyadicSet& f);

/// Minimal tile of the forest whose interval strictly contains I_R.
/// Throws std::invalid_argument when r is a root tile or not in the forest.
ZeroFreqTile base_of(const ZeroFreqTile& r, const TfrForest& forest);

/// Tiles whose base is rbar.
std::vector<ZeroFreqTile> children_of(const ZeroFreqTile& rbar, const TfrForest& forest);

/// alpha ∈̄ R: alpha ∈ omega_R and alpha ∉ omega of the base.
bool strictly_in(std::int64_t alpha, const ZeroFreqTile& r, const ZeroFreqTile& base);

/// 𝔉[R] for one tile.
std::vector<std::int64_t> frequencies_of_tile(std::span<const std::int64_t> freqs, const ZeroFreqTile& r,
                                              const TfrForest& forest);

/// 𝔉 of a node, read off its first tile. Throws for an empty node.
std::vector<std::int64_t> frequencies_of_node(std::span<const std::int64_t> freqs, const TfrNode& node,
                                              const TfrForest& forest);

struct InvariantTally {
  std::int64_t checked = 0;
  std::int64_t violations = 0;
  std::string first_violation;

  /// `describe` is only called for the first violation.
  template <class Describe>
  void record(bool ok, Describe describe) {
    ++checked;
    if (!ok && violations++ == 0) first_violation = describe();
  }
  bool clean() const { return violations == 0; }
};

/// Structural properties of one forest, each counted separately.
struct TfrInvariantReport {
  InvariantTally geometric_decay;
  InvariantTally uniform_lengths;
  InvariantTally freq_containment;
  InvariantTally saturation_split;
  InvariantTally inside_level_sets;
  InvariantTally generalized_tree;
  InvariantTally representative_independence;

  TfrInvariantReport& operator+=(const TfrInvariantReport& other);
};

TfrInvariantReport check_tfr_invariants(const TfrForest& forest, std::span<const std::int64_t> freqs);

}  // namespace tilelab
