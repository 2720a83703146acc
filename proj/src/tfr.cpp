#include "tilelab/tfr.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tilelab {
namespace {

using i128 = __int128;

std::vector<DyadicInterval> sorted_by_position(std::vector<DyadicInterval> v) {
  std::sort(v.begin(), v.end(), position_less);
  return v;
}

// Σ|J| written over 2^-deepest.
i128 total_weight(std::span<const DyadicInterval> a, int deepest) {
  i128 w = 0;
  for (const auto& j : a) w += static_cast<i128>(1) << (deepest - j.level);
  return w;
}

int deepest_level(std::span<const DyadicInterval> a) {
  int d = 0;
  for (const auto& j : a) d = std::max(d, j.level);
  return d;
}

std::string describe(const DyadicInterval& iv) {
  std::ostringstream os;
  os << iv;
  return os.str();
}

void build_below(TfrTree& tree, std::string word, std::vector<DyadicInterval> input) {
  const std::size_t at = tree.nodes.size();
  tree.nodes.emplace_back();
  tree.nodes[at].word = word;
  if (input.empty()) return;
  auto step = tfr_step(input);
  tree.nodes[at].alpha = step.alpha;
  tree.nodes[at].input = sorted_by_position(std::move(input));
  for (const auto& j : step.b) tree.nodes[at].tiles.push_back({j});
  tree.nodes[at].c_set = std::move(step.b);
  if (!step.b_upper.empty()) {
    tree.nodes[at].upper = tree.nodes.size();
    build_below(tree, word + 'U', std::move(step.b_upper));
  }
  if (!step.b_lower.empty()) {
    tree.nodes[at].lower = tree.nodes.size();
    build_below(tree, word + 'L', std::move(step.b_lower));
  }
}

TfrTree build_from_input(std::vector<DyadicInterval> input) {
  TfrTree tree;
  build_below(tree, "", std::move(input));
  return tree;
}

std::vector<DyadicInterval> inside(std::span<const DyadicInterval> family, const DyadicInterval& i) {
  std::vector<DyadicInterval> out;
  for (const auto& j : family) {
    if (i.contains(j)) out.push_back(j);
  }
  return out;
}

bool is_prefix(const std::string& p, const std::string& w) { return w.size() >= p.size() && w.compare(0, p.size(), p) == 0; }

DyadicRational node_length(const TfrNode& n) {
  DyadicRational s{0};
  for (const auto& r : n.tiles) s = s + r.interval.length();
  return s;
}

}  // namespace

TfrStep tfr_step(std::span<const DyadicInterval> a) {
  if (a.empty()) throw std::invalid_argument("tfr_step: empty input");
  const auto sorted = sorted_by_position({a.begin(), a.end()});
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    if (sorted[i].hi() > sorted[i + 1].lo()) throw std::invalid_argument("tfr_step: intervals overlap");
  }
  const int deepest = deepest_level(sorted);
  const i128 total = total_weight(sorted, deepest);

  // Smallest size |J0| whose cumulative mass from below reaches half the total.
  std::map<int, i128, std::greater<>> by_level;
  for (const auto& j : sorted) by_level[j.level] += static_cast<i128>(1) << (deepest - j.level);
  int level0 = sorted.front().level;
  i128 cumulative = 0;
  for (const auto& [level, w] : by_level) {
    cumulative += w;
    if (2 * cumulative >= total) {
      level0 = level;
      break;
    }
  }

  TfrStep out;
  out.alpha = std::int64_t{1} << level0;
  for (const auto& j : sorted) {
    if (j.level >= level0) {
      const auto anc = j.ancestor(level0);
      if (out.b.empty() || out.b.back() != anc) out.b.push_back(anc);
    }
    if (j.level > level0) out.b_upper.push_back(j);
    if (j.level < level0) out.b_lower.push_back(j);
  }
  return out;
}

const TfrNode* TfrTree::find(const std::string& word) const {
  for (const auto& n : nodes) {
    if (n.word == word) return &n;
  }
  return nullptr;
}

TfrTree tfr_build(const DyadicSet& f, int k, const DyadicInterval& i) {
  if (k < 2) throw std::invalid_argument("tfr_build: k must be at least 2");
  const auto lk = level_sets(f, k);
  if (std::find(lk.intervals.begin(), lk.intervals.end(), i) == lk.intervals.end()) {
    throw std::invalid_argument("tfr_build: interval is not in the level-set family");
  }
  return build_from_input(inside(level_sets(f, k - 1).intervals, i));
}

std::optional<std::size_t> TfrForest::root_of(const DyadicInterval& iv) const {
  // Roots are disjoint and position-sorted: the candidate is the last root starting at or before iv.
  const auto it = std::upper_bound(roots.begin(), roots.end(), iv.lo(),
                                   [](const DyadicRational& x, const TfrRoot& r) { return x < r.interval.lo(); });
  if (it == roots.begin()) return std::nullopt;
  const auto idx = static_cast<std::size_t>(std::prev(it) - roots.begin());
  if (!roots[idx].interval.contains(iv)) return std::nullopt;
  return idx;
}

bool TfrForest::contains(const ZeroFreqTile& r) const {
  return std::binary_search(tile_index.begin(), tile_index.end(), r.interval, position_less);
}

std::size_t TfrForest::tile_count() const { return tile_index.size(); }

std::vector<ZeroFreqTile> TfrForest::all_tiles() const {
  std::vector<ZeroFreqTile> out;
  out.reserve(tile_index.size());
  for (const auto& iv : tile_index) out.push_back({iv});
  return out;
}

TfrForest tfr_forest(const DyadicSet& f, int k) {
  TfrForest forest;
  forest.k = k;
  forest.set_fingerprint = f.fingerprint();
  const auto lk = level_sets(f, k);
  forest.roots.resize(lk.intervals.size());
  std::vector<DyadicInterval> below;
  if (k >= 2) below = level_sets(f, k - 1).intervals;
  const auto count = static_cast<std::ptrdiff_t>(lk.intervals.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    auto& root = forest.roots[static_cast<std::size_t>(r)];
    root.interval = lk.intervals[static_cast<std::size_t>(r)];
    root.root_tile = {root.interval};
    if (k >= 2) root.tree = build_from_input(inside(below, root.interval));
  }
  for (const auto& root : forest.roots) {
    forest.tile_index.push_back(root.interval);
    for (const auto& node : root.tree.nodes) {
      for (const auto& t : node.tiles) forest.tile_index.push_back(t.interval);
    }
  }
  std::sort(forest.tile_index.begin(), forest.tile_index.end(), position_less);
  forest.tile_index.erase(std::unique(forest.tile_index.begin(), forest.tile_index.end()), forest.tile_index.end());
  return forest;
}

std::vector<TfrForest> tfr_global(const DyadicSet& f) {
  if (f.empty()) throw std::invalid_argument("tfr_global: zero-measure set");
  std::vector<TfrForest> out;
  for (int k = 1; k <= k_F(f); ++k) out.push_back(tfr_forest(f, k));
  return out;
}

ZeroFreqTile base_of(const ZeroFreqTile& r, const TfrForest& forest) {
  if (!forest.contains(r)) throw std::invalid_argument("base_of: tile not in forest");
  const auto root = forest.root_of(r.interval);
  if (!root || forest.roots[*root].interval == r.interval) throw std::invalid_argument("base_of: root tiles have no base");
  for (int level = r.interval.level - 1; level >= 0; --level) {
    const ZeroFreqTile cand{r.interval.ancestor(level)};
    if (forest.contains(cand)) return cand;
  }
  throw std::logic_error("base_of: no containing tile");
}

std::vector<ZeroFreqTile> children_of(const ZeroFreqTile& rbar, const TfrForest& forest) {
  std::vector<ZeroFreqTile> out;
  const auto root = forest.root_of(rbar.interval);
  if (!root || !forest.contains(rbar)) return out;
  for (const auto& node : forest.roots[*root].tree.nodes) {
    for (const auto& t : node.tiles) {
      if (rbar.interval.contains(t.interval) && rbar != t && base_of(t, forest) == rbar) out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end(), [](const ZeroFreqTile& a, const ZeroFreqTile& b) {
    return position_less(a.interval, b.interval);
  });
  return out;
}

bool strictly_in(std::int64_t alpha, const ZeroFreqTile& r, const ZeroFreqTile& base) {
  return r.omega().contains(alpha) && !base.omega().contains(alpha);
}

std::vector<std::int64_t> frequencies_of_tile(std::span<const std::int64_t> freqs, const ZeroFreqTile& r,
                                              const TfrForest& forest) {
  const auto base = base_of(r, forest);
  std::vector<std::int64_t> out;
  for (auto a : freqs) {
    if (strictly_in(a, r, base)) out.push_back(a);
  }
  return out;
}

std::vector<std::int64_t> frequencies_of_node(std::span<const std::int64_t> freqs, const TfrNode& node,
                                              const TfrForest& forest) {
  if (node.tiles.empty()) throw std::invalid_argument("frequencies_of_node: empty node");
  return frequencies_of_tile(freqs, node.tiles.front(), forest);
}

TfrInvariantReport& TfrInvariantReport::operator+=(const TfrInvariantReport& other) {
  auto add = [](InvariantTally& a, const InvariantTally& b) {
    if (a.violations == 0 && b.violations > 0) a.first_violation = b.first_violation;
    a.checked += b.checked;
    a.violations += b.violations;
  };
  add(geometric_decay, other.geometric_decay);
  add(uniform_lengths, other.uniform_lengths);
  add(freq_containment, other.freq_containment);
  add(saturation_split, other.saturation_split);
  add(inside_level_sets, other.inside_level_sets);
  add(generalized_tree, other.generalized_tree);
  add(representative_independence, other.representative_independence);
  return *this;
}

TfrInvariantReport check_tfr_invariants(const TfrForest& forest, std::span<const std::int64_t> freq_list) {
  std::vector<std::int64_t> freqs(freq_list.begin(), freq_list.end());
  std::sort(freqs.begin(), freqs.end());
  TfrInvariantReport rep;
  for (const auto& root : forest.roots) {
    const auto& nodes = root.tree.nodes;
    const auto where = [&](const std::string& word) { return describe(root.interval) + " node '" + word + "'"; };

    for (const auto& node : nodes) {
      if (node.tiles.empty()) continue;
      const int lev = node.tile_level();
      rep.uniform_lengths.record(
          std::all_of(node.tiles.begin(), node.tiles.end(), [&](const ZeroFreqTile& r) { return r.interval.level == lev; }),
          [&] { return where(node.word); });

      // Saturation and the U-side split, recomputed from the node input.
      const int deepest = deepest_level(node.input);
      const i128 total = total_weight(node.input, deepest);
      i128 upto = 0, strictly_below = 0;
      for (const auto& j : node.input) {
        const i128 w = static_cast<i128>(1) << (deepest - j.level);
        if (j.level >= lev) upto += w;
        if (j.level > lev) strictly_below += w;
      }
      rep.saturation_split.record(2 * upto >= total && 2 * strictly_below < total,
                                  [&] { return where(node.word); });

      for (const auto& r : node.tiles) {
        rep.inside_level_sets.record(root.interval.contains(r.interval) && r.interval != root.interval,
                                     [&] { return where(node.word) + " tile " + describe(r.interval); });
        const auto base = base_of(r, forest);
        rep.generalized_tree.record(tile_leq(r.tile(), base.tile()) && tile_leq(base.tile(), root.root_tile.tile()) &&
                                        base.interval != r.interval,
                                    [&] { return where(node.word) + " tile " + describe(r.interval); });
      }

      const auto ref = frequencies_of_node(freqs, node, forest);
      for (const auto& r : node.tiles) {
        rep.representative_independence.record(frequencies_of_tile(freqs, r, forest) == ref, [&] {
          return where(node.word) + " tile " + describe(r.interval);
        });
      }

      const DyadicRational mine = node_length(node);
      for (const auto& other : nodes) {
        if (other.tiles.empty() || !is_prefix(node.word, other.word)) continue;
        if (other.word.size() >= node.word.size() + 2) {
          rep.geometric_decay.record(node_length(other) <= mine.half(),
                                     [&] { return where(node.word) + " vs '" + other.word + "'"; });
        }
        if (other.word.size() > node.word.size() && other.word[node.word.size()] == 'L') {
          for (const auto& r : other.tiles) {
            const auto fr = frequencies_of_tile(freqs, r, forest);
            rep.freq_containment.record(std::includes(ref.begin(), ref.end(), fr.begin(), fr.end()), [&] {
              return where(node.word) + " vs '" + other.word + "' tile " + describe(r.interval);
            });
          }
        }
      }
    }
  }
  return rep;
}

}  // namespace tilelab
