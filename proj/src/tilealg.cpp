#include "tilelab/tilealg.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>

namespace tilelab {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

std::int64_t pmod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

// Arc [lo, lo + len) on the circle of circumference m, in integer units.
struct Arc {
  std::int64_t lo = 0;
  std::int64_t len = 0;
  std::int64_t m = 1;

  bool full() const { return len >= m; }
};

Arc itilde_arc(const DyadicInterval& iv, int units) {
  const std::int64_t m = std::int64_t{1} << units;
  const std::int64_t s = std::int64_t{1} << (units - iv.level);
  return {pmod((iv.index - 8) * s, m), 17 * s, m};
}

Arc plain_arc(const DyadicInterval& iv, int units) {
  const std::int64_t s = std::int64_t{1} << (units - iv.level);
  return {iv.index * s, s, std::int64_t{1} << units};
}

bool arcs_overlap(const Arc& a, const Arc& b) {
  if (a.len <= 0 || b.len <= 0) return false;
  if (a.full() || b.full()) return true;
  return pmod(b.lo - a.lo, a.m) < a.len || pmod(a.lo - b.lo, a.m) < b.len;
}

using Piece = std::pair<std::int64_t, std::int64_t>;

void append_pieces(const Arc& a, std::vector<Piece>& out) {
  if (a.full()) {
    out.emplace_back(0, a.m);
  } else if (a.lo + a.len <= a.m) {
    out.emplace_back(a.lo, a.lo + a.len);
  } else {
    out.emplace_back(a.lo, a.m);
    out.emplace_back(0, a.lo + a.len - a.m);
  }
}

// Sorted, disjoint, non-adjacent pieces.
void merge_pieces(std::vector<Piece>& v) {
  std::sort(v.begin(), v.end());
  std::vector<Piece> out;
  for (const auto& p : v) {
    if (!out.empty() && p.first <= out.back().second) {
      out.back().second = std::max(out.back().second, p.second);
    } else {
      out.push_back(p);
    }
  }
  v = std::move(out);
}

bool covered_by(const Arc& a, const std::vector<Piece>& merged) {
  std::vector<Piece> pieces;
  append_pieces(a, pieces);
  for (const auto& [lo, hi] : pieces) {
    auto it = std::upper_bound(merged.begin(), merged.end(), Piece{lo, INT64_MAX});
    if (it == merged.begin()) return false;
    --it;
    if (it->second < hi) return false;
  }
  return true;
}

int ceil_log2(std::int64_t x) {
  int r = 0;
  while ((std::int64_t{1} << r) < x) ++r;
  return r;
}

bool tree_order_less(const Tile& a, const Tile& b) {
  return std::make_tuple(a.scale(), a.interval().index, a.omega().lo()) <
         std::make_tuple(b.scale(), b.interval().index, b.omega().lo());
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

// ---------------------------------------------------------------- universe

TileUniverse::TileUniverse(DyadicSet f, LacunarySequence seq, Linearizer nfun, UniverseBounds bounds)
    : f_(std::move(f)), seq_(std::move(seq)), nfun_(std::move(nfun)) {
  const int grid = nfun_.grid_level;
  if (grid <= 0 || nfun_.choice.size() != (std::size_t{1} << grid)) {
    throw std::invalid_argument("TileUniverse: linearizer has no grid");
  }
  const int k_max = bounds.k_max < 0 ? grid - 2 : bounds.k_max;
  band_max_ = bounds.band_max == 0 ? (std::int64_t{1} << (grid - 1)) : bounds.band_max;
  if (bounds.k_min < kMinOperatorLevel || k_max > grid || bounds.k_min > k_max || band_max_ < 0) {
    throw std::invalid_argument("TileUniverse: scale bounds outside [" + std::to_string(kMinOperatorLevel) +
                                ", grid level]");
  }
  for (int k = bounds.k_min; k <= k_max; ++k) {
    if (!bounds.scale_separated || (k - bounds.k_min) % 10 == 0) scales_.push_back(k);
  }
  for (int k : scales_) {
    offsets_.push_back(records_.size());
    const std::int64_t len = std::int64_t{1} << k;
    const std::int64_t n_omega = ceil_div(band_max_, len);
    omega_counts_.push_back(n_omega);
    for (std::int64_t i = 0; i < len; ++i) {
      const DyadicInterval iv{k, i};
      const auto mass_f = f_.measure_in(itilde(iv));
      for (std::int64_t w = 0; w < n_omega; ++w) {
        records_.push_back({Tile{FrequencyInterval{k, w}, iv}, 0, mass_f});
      }
    }
  }
  const auto n_scales = static_cast<std::ptrdiff_t>(scales_.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t s = 0; s < n_scales; ++s) {
    const auto si = static_cast<std::size_t>(s);
    const int k = scales_[si];
    const std::int64_t n_omega = omega_counts_[si];
    for (std::size_t t = 0; t < nfun_.choice.size(); ++t) {
      const std::int64_t v = nfun_.value(t);
      if (v < 0) continue;
      const std::int64_t w = v >> k;
      if (w >= n_omega) continue;
      const auto i = static_cast<std::int64_t>(t >> (grid - k));
      ++records_[offsets_[si] + static_cast<std::size_t>(i * n_omega + w)].e_count;
    }
  }
}

std::optional<std::size_t> TileUniverse::index_of(const Tile& p) const {
  const auto it = std::find(scales_.begin(), scales_.end(), p.scale());
  if (it == scales_.end()) return std::nullopt;
  const auto s = static_cast<std::size_t>(it - scales_.begin());
  const std::int64_t w = p.omega().index;
  const std::int64_t i = p.interval().index;
  if (p.omega().level != p.scale() || w < 0 || w >= omega_counts_[s]) return std::nullopt;
  if (i < 0 || i >= (std::int64_t{1} << p.scale())) return std::nullopt;
  return offsets_[s] + static_cast<std::size_t>(i * omega_counts_[s] + w);
}

std::optional<int> TileUniverse::coarser_scale(int k) const {
  const auto it = std::lower_bound(scales_.begin(), scales_.end(), k);
  if (it == scales_.begin()) return std::nullopt;
  return *(it - 1);
}

// ---------------------------------------------------------------- classes

std::int64_t cluster_constant(const Rational& alpha) {
  if (alpha.num <= alpha.den) throw std::invalid_argument("cluster_constant: alpha must exceed 1");
  return 10 * (1 + alpha.den / (alpha.num - alpha.den));
}

bool is_cluster(const FrequencyInterval& omega, std::int64_t c) {
  const __int128 twice_center = static_cast<__int128>(omega.lo()) + omega.hi();
  const __int128 reach = static_cast<__int128>(c) * omega.length();
  return (twice_center < 0 ? -twice_center : twice_center) < reach;
}

std::optional<int> frequency_index(const Tile& p, const LacunarySequence& seq) {
  const auto& terms = seq.terms();
  const auto it = std::lower_bound(terms.begin(), terms.end(), p.omega().lo());
  if (it == terms.end() || *it >= p.omega().hi()) return std::nullopt;
  return static_cast<int>(it - terms.begin());
}

TileClass classify_tiles(const TileUniverse& u) {
  const std::int64_t c = cluster_constant(u.seq().alpha());
  TileClass out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Tile& p = u.tile(i);
    if (is_cluster(p.omega(), c)) {
      out.cluster.push_back(i);
    } else if (frequency_index(p, u.seq())) {
      out.sep.push_back(i);
    } else {
      out.zero.push_back(i);
    }
  }
  return out;
}

// ---------------------------------------------------------------- F-mass

bool fmass_fits(const DyadicInterval& ip, const DyadicInterval& i) {
  if (ip.level < i.level) return false;
  // Units of 2^-(|I_P| level + 1): centers and the radius 42.5 |I_P| are integers.
  const int units = ip.level + 1;
  const std::int64_t m = std::int64_t{1} << units;
  const std::int64_t si = std::int64_t{1} << (units - i.level - 1);
  const std::int64_t a0 = 2 * ip.index + 1 - 85;
  const std::int64_t b0 = 2 * ip.index + 1 + 85;
  const std::int64_t lo = (2 * i.index + 1 - 200) * si;
  const std::int64_t hi = (2 * i.index + 1 + 200) * si;
  return ceil_div(lo - a0, m) <= floor_div(hi - b0, m);
}

FMassPartition f_mass_partition(const TileUniverse& u, std::span<const std::size_t> sep) {
  FMassPartition out;
  out.class_of.assign(u.size(), 0);
  if (u.f().empty()) {
    out.unassigned.assign(sep.begin(), sep.end());
    out.classes.resize(1);
    return out;
  }
  out.k_f = k_F(u.f());
  std::vector<std::vector<DyadicInterval>> sets(static_cast<std::size_t>(out.k_f) + 1);
  for (int k = 1; k <= out.k_f; ++k) sets[static_cast<std::size_t>(k)] = level_sets(u.f(), k).intervals;
  const auto n = static_cast<std::ptrdiff_t>(sep.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    const std::size_t t = sep[static_cast<std::size_t>(s)];
    const auto& ip = u.tile(t).interval();
    for (int k = 1; k <= out.k_f && out.class_of[t] == 0; ++k) {
      for (const auto& i : sets[static_cast<std::size_t>(k)]) {
        if (fmass_fits(ip, i)) {
          out.class_of[t] = k;
          break;
        }
      }
    }
  }
  out.classes.resize(static_cast<std::size_t>(out.k_f) + 1);
  for (std::size_t t : sep) {
    if (out.class_of[t] == 0) {
      out.unassigned.push_back(t);
    } else {
      out.classes[static_cast<std::size_t>(out.class_of[t])].push_back(t);
    }
  }
  return out;
}

// ---------------------------------------------------------------- mass

DyadicRational mass(std::size_t tile, int k, const TileUniverse& u, const FMassPartition& fm) {
  const Tile& p = u.tile(tile);
  DyadicRational best{0};
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (fm.class_of[j] != k || !tile_leq(p, u.tile(j))) continue;
    const DyadicRational ratio{u[j].e_count, u.grid_level() - u.tile(j).scale()};
    best = std::max(best, ratio);
  }
  return best;
}

int mass_class(const DyadicRational& a) {
  if (a <= DyadicRational{0} || a > DyadicRational{1}) throw std::invalid_argument("mass_class: need 0 < a <= 1");
  return a.exp() - ceil_log2(a.num());
}

MassTable mass_partition(const TileUniverse& u, const FMassPartition& fm) {
  const int grid = u.grid_level();
  const auto& scales = u.scales();
  MassTable out;
  out.mass.assign(u.size(), DyadicRational{0});
  out.n_class.assign(u.size(), std::nullopt);

  // Best ratio numerator over 2^grid among tiles >= P in class c; -1 for none.
  std::vector<std::int64_t> best(u.size(), -1);
  std::vector<std::int64_t> block;
  for (int c = 1; c <= fm.k_f; ++c) {
    if (fm.classes[static_cast<std::size_t>(c)].empty()) continue;
    for (std::size_t s = 0; s < scales.size(); ++s) {
      const int k = scales[s];
      const std::size_t first = *u.index_of(Tile{FrequencyInterval{k, 0}, DyadicInterval{k, 0}});
      const std::int64_t n_i = std::int64_t{1} << k;
      const std::int64_t n_w = ceil_div(u.band_max(), n_i);
      // Reduce the previous scale to blocks matching this scale's ω.
      std::int64_t prev_w = 0;
      std::size_t prev_first = 0;
      int shift = 0;
      if (s > 0) {
        const int kp = scales[s - 1];
        shift = k - kp;
        prev_first = *u.index_of(Tile{FrequencyInterval{kp, 0}, DyadicInterval{kp, 0}});
        prev_w = ceil_div(u.band_max(), std::int64_t{1} << kp);
        const std::int64_t prev_i = std::int64_t{1} << kp;
        block.assign(static_cast<std::size_t>(prev_i * n_w), -1);
        for (std::int64_t i = 0; i < prev_i; ++i) {
          for (std::int64_t w = 0; w < prev_w; ++w) {
            auto& slot = block[static_cast<std::size_t>(i * n_w + (w >> shift))];
            slot = std::max(slot, best[prev_first + static_cast<std::size_t>(i * prev_w + w)]);
          }
        }
      }
      for (std::int64_t i = 0; i < n_i; ++i) {
        for (std::int64_t w = 0; w < n_w; ++w) {
          const std::size_t t = first + static_cast<std::size_t>(i * n_w + w);
          std::int64_t v = -1;
          if (fm.class_of[t] == c) v = u[t].e_count << k;
          if (s > 0) v = std::max(v, block[static_cast<std::size_t>((i >> shift) * n_w + w)]);
          best[t] = v;
        }
      }
    }
    for (std::size_t t : fm.classes[static_cast<std::size_t>(c)]) out.mass[t] = DyadicRational{best[t], grid};
  }
  for (int c = 1; c <= fm.k_f; ++c) {
    for (std::size_t t : fm.classes[static_cast<std::size_t>(c)]) {
      if (out.mass[t].is_zero()) {
        out.zero_mass.push_back(t);
      } else {
        out.n_class[t] = mass_class(out.mass[t]);
      }
    }
  }
  std::sort(out.zero_mass.begin(), out.zero_mass.end());
  return out;
}

// ---------------------------------------------------------------- trees

std::vector<TreeFamily> tree_decompose(const TileUniverse& u, std::span<const std::size_t> tiles, int l,
                                       const FMassPartition& fm, const MassTable& mt) {
  const std::int64_t nl = u.seq()[static_cast<std::size_t>(l)];
  std::unordered_map<std::size_t, std::size_t> pos;  // universe index -> slot in tiles
  for (std::size_t s = 0; s < tiles.size(); ++s) {
    if (!u.tile(tiles[s]).omega().contains(nl)) {
      throw std::invalid_argument("tree_decompose: tile does not contain the class frequency");
    }
    pos.emplace(tiles[s], s);
  }
  auto m_of = [&](std::size_t t) { return fm.class_of[t]; };
  auto n_of = [&](std::size_t t) { return mt.n_class[t].value_or(-1); };

  UnionFind trees(tiles.size());
  UnionFind rows(tiles.size());
  for (std::size_t s = 0; s < tiles.size(); ++s) {
    const Tile& p = u.tile(tiles[s]);
    const auto kp = u.coarser_scale(p.scale());
    if (!kp) continue;
    const Tile parent{FrequencyInterval::containing(nl, *kp), p.interval().ancestor(*kp)};
    const auto idx = u.index_of(parent);
    if (!idx) continue;
    const auto it = pos.find(*idx);
    if (it == pos.end()) continue;
    const std::size_t q = it->second;
    if (m_of(tiles[q]) != m_of(tiles[s])) continue;
    rows.unite(s, q);
    if (n_of(tiles[q]) == n_of(tiles[s])) trees.unite(s, q);
  }

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t s = 0; s < tiles.size(); ++s) groups[trees.find(s)].push_back(s);

  std::vector<TreeFamily> out;
  std::vector<std::size_t> row_of;
  for (auto& [root, slots] : groups) {
    std::sort(slots.begin(), slots.end(),
              [&](std::size_t a, std::size_t b) { return tree_order_less(u.tile(tiles[a]), u.tile(tiles[b])); });
    TreeFamily tree;
    tree.top = u.tile(tiles[slots.front()]);
    for (std::size_t s : slots) tree.members.push_back(u.tile(tiles[s]));
    tree.l = l;
    const std::size_t t0 = tiles[slots.front()];
    if (m_of(t0) != 0) tree.m = m_of(t0);
    tree.n = mt.n_class[t0];
    out.push_back(std::move(tree));
    row_of.push_back(rows.find(slots.front()));
  }

  std::vector<std::size_t> order(out.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return tree_order_less(out[a].top, out[b].top); });

  // Rows are numbered in the order their first tree appears, per m.
  std::map<int, int> next_row;
  std::map<std::size_t, int> row_index;
  std::map<std::tuple<int, int, int>, int> next_b;
  std::vector<TreeFamily> sorted;
  for (std::size_t o : order) {
    TreeFamily tree = std::move(out[o]);
    const int mkey = tree.m.value_or(0);
    auto [it, fresh] = row_index.try_emplace(row_of[o], 0);
    if (fresh) it->second = next_row[mkey]++;
    tree.a = it->second;
    tree.b = next_b[{mkey, tree.a, tree.n.value_or(-1)}]++;
    sorted.push_back(std::move(tree));
  }
  return sorted;
}

std::vector<TreeFamily> decompose_all(const TileUniverse& u, const TileClass& tc, const FMassPartition& fm,
                                      const MassTable& mt) {
  std::map<int, std::vector<std::size_t>> by_l;
  for (std::size_t t : tc.sep) by_l[*frequency_index(u.tile(t), u.seq())].push_back(t);
  std::vector<TreeFamily> out;
  for (const auto& [l, tiles] : by_l) {
    auto part = tree_decompose(u, tiles, l, fm, mt);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

// ---------------------------------------------------------------- foliation

bool itilde_overlap(const DyadicInterval& a, const DyadicInterval& b) {
  const int units = std::max(a.level, b.level);
  return arcs_overlap(itilde_arc(a, units), itilde_arc(b, units));
}

bool itilde_meets(const DyadicInterval& a, const DyadicInterval& b) {
  const int units = std::max(a.level, b.level);
  return arcs_overlap(itilde_arc(a, units), plain_arc(b, units));
}

int max_overlap(std::span<const DyadicInterval> tops) {
  if (tops.empty()) return 0;
  int units = 0;
  for (const auto& t : tops) units = std::max(units, t.level);
  int base = 0;
  std::vector<std::pair<std::int64_t, int>> events;
  for (const auto& t : tops) {
    const Arc a = itilde_arc(t, units);
    if (a.full()) {
      ++base;
      continue;
    }
    std::vector<Piece> pieces;
    append_pieces(a, pieces);
    for (const auto& [lo, hi] : pieces) {
      events.emplace_back(lo, +1);
      events.emplace_back(hi, -1);
    }
  }
  std::sort(events.begin(), events.end());  // -1 sorts before +1 at a shared point
  int cur = 0;
  int best = 0;
  for (const auto& e : events) {
    cur += e.second;
    best = std::max(best, cur);
  }
  return base + best;
}

FoliationResult star_foliation(std::span<const TreeFamily> trees) {
  FoliationResult out;
  const std::size_t n = trees.size();
  out.layer.assign(n, 0);
  out.selected.assign(n, false);
  out.family.assign(n, 0);
  if (n == 0) return out;
  int units = 0;
  for (const auto& t : trees) units = std::max(units, t.top.scale());
  std::vector<Arc> arcs;
  for (const auto& t : trees) arcs.push_back(itilde_arc(t.top.interval(), units));

  std::vector<std::size_t> remaining(n);
  std::iota(remaining.begin(), remaining.end(), 0);
  std::stable_sort(remaining.begin(), remaining.end(), [&](std::size_t a, std::size_t b) {
    return tree_order_less(trees[a].top, trees[b].top);
  });
  int layer = 0;
  while (!remaining.empty()) {
    ++layer;
    std::vector<std::size_t> chosen;
    std::vector<Piece> larger;
    for (std::size_t g = 0; g < remaining.size();) {
      std::size_t h = g;
      const int level = trees[remaining[g]].top.scale();
      while (h < remaining.size() && trees[remaining[h]].top.scale() == level) ++h;
      for (std::size_t j = g; j < h; ++j) {
        if (!covered_by(arcs[remaining[j]], larger)) chosen.push_back(remaining[j]);
      }
      for (std::size_t j = g; j < h; ++j) append_pieces(arcs[remaining[j]], larger);
      merge_pieces(larger);
      g = h;
    }
    for (std::size_t s : chosen) {
      out.selected[s] = true;
      out.family[s] = s;
      out.layer[s] = layer;
    }
    std::vector<std::size_t> next;
    for (std::size_t t : remaining) {
      if (out.selected[t]) continue;
      bool absorbed = false;
      for (std::size_t s : chosen) {
        if (trees[s].m == trees[t].m && trees[s].top.scale() <= trees[t].top.scale() &&
            arcs_overlap(arcs[s], arcs[t])) {
          out.family[t] = s;
          out.layer[t] = layer;
          absorbed = true;
          break;
        }
      }
      if (!absorbed) next.push_back(t);
    }
    remaining = std::move(next);
  }
  out.layer_count = layer;
  return out;
}

void apply_layers(std::span<TreeFamily> trees, const FoliationResult& result) {
  for (std::size_t i = 0; i < trees.size(); ++i) trees[i].p = result.layer[i];
}

// ---------------------------------------------------------------- set resolution

SetResolution set_resolution(const TileUniverse& u, const TileClass& tc, const FMassPartition& fm,
                             std::span<const TfrForest> forests) {
  const std::uint64_t fp = u.f().fingerprint();
  if (static_cast<int>(forests.size()) != fm.k_f) {
    throw std::invalid_argument("set_resolution: expected one forest per k = 1..k_F");
  }
  for (std::size_t i = 0; i < forests.size(); ++i) {
    if (forests[i].set_fingerprint != fp || forests[i].k != static_cast<int>(i) + 1) {
      throw std::invalid_argument("set_resolution: forests were built from a different set");
    }
  }
  SetResolution out;
  for (std::size_t t : tc.sep) {
    if (u[t].itilde_f.is_zero()) out.f_zero.push_back(t);
  }
  const int kf = fm.k_f;
  if (kf < 2) return out;

  auto meeting = [&](const DyadicInterval& iv) {
    std::vector<std::size_t> v;
    for (std::size_t t : tc.sep) {
      if (itilde_meets(u.tile(t).interval(), iv)) v.push_back(t);
    }
    return v;
  };
  auto below = [](const Tile& p, int level) { return p.omega().lo() < (std::int64_t{1} << level); };

  for (int k = 1; k < kf; ++k) {
    const TfrForest& forest = forests[static_cast<std::size_t>(k - 1)];
    for (const auto& root : forest.roots) {
      const auto candidates = meeting(root.interval);
      const int top = root.interval.level;
      ResolutionFamily one{k, 1, root.root_tile, root.interval, {}};
      for (std::size_t t : candidates) {
        const int c = fm.class_of[t];
        const bool in_class = k == 1 ? (c == 1 || c == 2) : c == k + 1;
        if (in_class && below(u.tile(t), top)) one.tiles.push_back(t);
      }
      if (!one.tiles.empty()) out.families.push_back(std::move(one));
      if (k == 1) {
        ResolutionFamily two{k, 2, root.root_tile, root.interval, {}};
        for (std::size_t t : candidates) {
          if (!below(u.tile(t), top)) two.tiles.push_back(t);
        }
        if (!two.tiles.empty()) out.families.push_back(std::move(two));
        continue;
      }
      // Same length and same base give the same family, so cache on the pair.
      std::map<std::pair<int, int>, std::vector<std::size_t>> cache;
      for (const auto& node : root.tree.nodes) {
        for (const auto& r : node.tiles) {
          const int base_level = base_of(r, forest).interval.level;
          auto [it, fresh] = cache.try_emplace({r.interval.level, base_level});
          if (fresh) {
            for (std::size_t t : candidates) {
              const Tile& p = u.tile(t);
              if (fm.above(t, k) && !below(p, base_level) && below(p, r.interval.level)) it->second.push_back(t);
            }
          }
          if (!it->second.empty()) out.families.push_back({k, 2, r, root.interval, it->second});
        }
      }
    }
  }
  return out;
}

std::vector<std::size_t> uncovered_tiles(const TileUniverse& u, const TileClass& tc, const SetResolution& res) {
  std::vector<char> hit(u.size(), 0);
  for (std::size_t t : tc.zero) hit[t] = 1;
  for (std::size_t t : tc.cluster) hit[t] = 1;
  for (std::size_t t : res.f_zero) hit[t] = 1;
  for (const auto& fam : res.families) {
    for (std::size_t t : fam.tiles) hit[t] = 1;
  }
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < u.size(); ++t) {
    if (!hit[t]) out.push_back(t);
  }
  return out;
}

Linearizer random_linearizer(Rng& rng, int grid_level, std::span<const std::int64_t> freqs, int block_level) {
  if (freqs.empty() || block_level < 0 || block_level > grid_level) {
    throw std::invalid_argument("random_linearizer: need frequencies and 0 <= block_level <= grid_level");
  }
  Linearizer out;
  out.grid_level = grid_level;
  out.frequencies.assign(freqs.begin(), freqs.end());
  out.choice.resize(std::size_t{1} << grid_level);
  const int shift = grid_level - block_level;
  std::vector<int> per_block(std::size_t{1} << block_level);
  for (auto& c : per_block) c = static_cast<int>(uniform_index(rng, freqs.size()));
  for (std::size_t t = 0; t < out.choice.size(); ++t) out.choice[t] = per_block[t >> shift];
  return out;
}

}  // namespace tilelab
