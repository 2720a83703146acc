#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "tilelab/tilealg.hpp"

using namespace tilelab;

namespace {

struct World {
  DyadicSet f;
  std::optional<TileUniverse> u;
  TileClass tc;
  FMassPartition fm;
  MassTable mt;
};

// Grid level L, band 2^(L-1+extra), powers of two up to the band, random set of
// measure 2^-measure_exp and a random blockwise linearizer.
World make_world_for(DyadicSet f, Rng& rng, int level, int extra) {
  World w;
  w.f = std::move(f);
  auto seq = LacunarySequence::powers_of_two(level - 2 + extra);
  auto nfun = random_linearizer(rng, level, seq.terms(), 3 + static_cast<int>(uniform_index(rng, level - 3)));
  UniverseBounds b;
  b.band_max = std::int64_t{1} << (level - 1 + extra);
  w.u.emplace(w.f, seq, nfun, b);
  w.tc = classify_tiles(*w.u);
  w.fm = f_mass_partition(*w.u, w.tc.sep);
  w.mt = mass_partition(*w.u, w.fm);
  return w;
}

World make_world(std::uint64_t seed, int level, int extra, int measure_exp) {
  Rng rng(seed);
  auto f = random_set(rng, level, measure_exp);
  return make_world_for(std::move(f), rng, level, extra);
}

Linearizer constant_linearizer(int level, std::int64_t value) {
  Linearizer n;
  n.grid_level = level;
  n.frequencies = {value};
  n.choice.assign(std::size_t{1} << level, 0);
  return n;
}

bool point_in_torus(const DyadicRational& x, const RealInterval& iv) {
  for (std::int64_t m = -2; m <= 2; ++m) {
    const auto y = x + DyadicRational{m};
    if (iv.lo <= y && y < iv.hi) return true;
  }
  return false;
}

// Every tile strictly between p and q (p <= q) at the universe's scales.
std::vector<Tile> between(const TileUniverse& u, const Tile& p, const Tile& q) {
  std::vector<Tile> out;
  for (int k : u.scales()) {
    if (k <= q.scale() || k >= p.scale()) continue;
    out.emplace_back(FrequencyInterval::containing(q.omega().lo(), k), p.interval().ancestor(k));
  }
  return out;
}

bool is_tree(const TileUniverse& u, const std::set<Tile>& s) {
  const bool has_top = std::any_of(s.begin(), s.end(), [&](const Tile& t) {
    return std::all_of(s.begin(), s.end(), [&](const Tile& p) { return tile_leq(p, t); });
  });
  if (!has_top) return false;
  for (const auto& p : s) {
    for (const auto& q : s) {
      if (p == q || !tile_leq(p, q)) continue;
      for (const auto& mid : between(u, p, q)) {
        if (!s.contains(mid)) return false;
      }
    }
  }
  return true;
}

TreeFamily synthetic_tree(int level, std::int64_t index) {
  TreeFamily t;
  t.top = Tile{FrequencyInterval{level, 1}, DyadicInterval{level, index}};
  t.members = {t.top};
  return t;
}

}  // namespace

// ---------------------------------------------------------------- classes

TEST(TileClasses, ClusterConstant) {
  EXPECT_EQ(cluster_constant(Rational{2}), 20);
  EXPECT_EQ(cluster_constant(Rational{3}), 10);
  EXPECT_EQ(cluster_constant(Rational{3, 2}), 30);
  EXPECT_EQ(cluster_constant(Rational{11, 10}), 110);
  EXPECT_THROW(cluster_constant(Rational{1}), std::invalid_argument);
}

TEST(TileClasses, DilatedFrequencyExamples) {
  // 20 [4,8) = (-34, 46)
  EXPECT_TRUE(is_cluster(FrequencyInterval{2, 1}, 20));
  const auto d = dilate(RealInterval{DyadicRational{4}, DyadicRational{8}}, DyadicRational{20});
  EXPECT_EQ(d.lo, DyadicRational{-34});
  EXPECT_EQ(d.hi, DyadicRational{46});
  // [1024, 1056) holds n_10 = 1024 and 20 times it stays right of 0.
  const FrequencyInterval w{5, 32};
  EXPECT_FALSE(is_cluster(w, 20));
  const auto seq = LacunarySequence::powers_of_two(11);
  ASSERT_TRUE(frequency_index(Tile{w, DyadicInterval{5, 0}}, seq));
  EXPECT_EQ(seq[static_cast<std::size_t>(*frequency_index(Tile{w, DyadicInterval{5, 0}}, seq))], 1024);
  // [1024, 2048) is separated from 0 by less than 20 lengths.
  EXPECT_TRUE(is_cluster(FrequencyInterval{10, 1}, 20));
  // Open dilation: 0 on the boundary is outside.
  EXPECT_FALSE(is_cluster(FrequencyInterval{0, 5}, 10));
  EXPECT_TRUE(is_cluster(FrequencyInterval{0, 4}, 10));
}

TEST(TileClasses, PartitionMatchesDefinitionAndZeroTilesMissTheLinearizer) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const World w = make_world(seed, 10, 3, 3);
    const TileUniverse& u = *w.u;
    const std::int64_t c = cluster_constant(u.seq().alpha());
    std::vector<int> seen(u.size(), 0);
    for (auto t : w.tc.cluster) seen[t] += 1;
    for (auto t : w.tc.sep) seen[t] += 10;
    for (auto t : w.tc.zero) seen[t] += 100;
    for (std::size_t t = 0; t < u.size(); ++t) {
      const Tile& p = u.tile(t);
      const auto d = dilate(RealInterval{DyadicRational{p.omega().lo()}, DyadicRational{p.omega().hi()}},
                            DyadicRational{c});
      const bool cluster = d.lo < DyadicRational{0} && DyadicRational{0} < d.hi;
      bool holds = false;
      for (auto n : u.seq().terms()) holds = holds || p.omega().contains(n);
      const int expected = cluster ? 1 : (holds ? 10 : 100);
      ASSERT_EQ(seen[t], expected) << p;
      if (expected == 100) {
        EXPECT_EQ(u[t].e_count, 0) << p;
      }
    }
  }
}

// ---------------------------------------------------------------- universe

TEST(TileUniverse, CachedQuantitiesMatchDirectEvaluation) {
  const World w = make_world(7, 10, 2, 2);
  const TileUniverse& u = *w.u;
  std::size_t expected_size = 0;
  for (int k : u.scales()) expected_size += static_cast<std::size_t>((u.band_max() + (1 << k) - 1) >> k) << k;
  EXPECT_EQ(u.size(), expected_size);
  EXPECT_EQ(u.scales(), (std::vector<int>{5, 6, 7, 8}));
  for (std::size_t t = 0; t < u.size(); t += 37) {
    const Tile& p = u.tile(t);
    EXPECT_EQ(u.index_of(p), t);
    EXPECT_EQ(u[t].e_count, e_count(p, u.nfun())) << p;
    EXPECT_EQ(u[t].itilde_f, w.f.measure_in(itilde(p.interval()))) << p;
  }
  EXPECT_FALSE(u.index_of(Tile{FrequencyInterval{4, 0}, DyadicInterval{4, 0}}));
  EXPECT_FALSE(u.index_of(Tile{FrequencyInterval{5, u.band_max() >> 5}, DyadicInterval{5, 0}}));
  EXPECT_EQ(u.coarser_scale(6), 5);
  EXPECT_FALSE(u.coarser_scale(5));
}

TEST(TileUniverse, ScaleSeparationAndBounds) {
  const auto seq = LacunarySequence::powers_of_two(14);
  UniverseBounds b;
  b.scale_separated = true;
  b.k_max = 15;
  const TileUniverse u(DyadicSet::full(4), seq, constant_linearizer(16, 4096), b);
  EXPECT_EQ(u.scales(), (std::vector<int>{5, 15}));
  EXPECT_EQ(u.coarser_scale(15), 5);
  UniverseBounds bad;
  bad.k_min = 4;
  EXPECT_THROW(TileUniverse(DyadicSet::full(4), seq, constant_linearizer(10, 4), bad), std::invalid_argument);
  bad.k_min = 5;
  bad.k_max = 11;
  EXPECT_THROW(TileUniverse(DyadicSet::full(4), seq, constant_linearizer(10, 4), bad), std::invalid_argument);
}

// ---------------------------------------------------------------- F-mass

TEST(FMass, LiftedContainmentExamples) {
  // Same length 2^-8: 5Ĩ_P has radius 42.5, 200I radius 100 (units of 2^-8).
  EXPECT_TRUE(fmass_fits({8, 0}, {8, 57}));
  EXPECT_FALSE(fmass_fits({8, 0}, {8, 58}));
  EXPECT_TRUE(fmass_fits({8, 0}, {8, 199}));   // across the wrap
  EXPECT_FALSE(fmass_fits({8, 0}, {8, 198}));
  EXPECT_TRUE(fmass_fits({8, 100}, {0, 0}));
  EXPECT_FALSE(fmass_fits({5, 0}, {8, 0}));    // |I_P| > |I|
  EXPECT_TRUE(fmass_fits({5, 3}, {5, 20}));    // 200 |I| exceeds the torus
}

TEST(FMass, FullTorusSendsEverythingToClassOne) {
  const auto seq = LacunarySequence::powers_of_two(10);
  const TileUniverse u(DyadicSet::full(3), seq, constant_linearizer(10, 256));
  const auto tc = classify_tiles(u);
  const auto fm = f_mass_partition(u, tc.sep);
  EXPECT_EQ(fm.k_f, 1);
  EXPECT_EQ(fm.classes[1].size(), tc.sep.size());
  EXPECT_TRUE(fm.unassigned.empty());
}

TEST(FMass, QuarterIntervalMatchesBruteForcePredicate) {
  const DyadicSet f = interval_set(2, 0, 1);
  const auto seq = LacunarySequence::powers_of_two(12);
  UniverseBounds b;
  b.band_max = 1 << 12;
  Rng rng(3);
  const TileUniverse u(f, seq, random_linearizer(rng, 10, seq.terms(), 5), b);
  const auto tc = classify_tiles(u);
  const auto fm = f_mass_partition(u, tc.sep);
  ASSERT_EQ(fm.k_f, 3);
  ASSERT_FALSE(tc.sep.empty());
  for (std::size_t t : tc.sep) {
    const auto& ip = u.tile(t).interval();
    const auto five = dilate(itilde(ip), DyadicRational{5});
    int expected = 0;
    for (int k = 1; k <= 3 && expected == 0; ++k) {
      for (const auto& i : level_sets(f, k).intervals) {
        if (ip.level < i.level) continue;
        const auto big = dilate(i, DyadicRational{200});
        for (std::int64_t m = -3; m <= 3; ++m) {
          const RealInterval shifted{five.lo + DyadicRational{m}, five.hi + DyadicRational{m}};
          if (big.contains(shifted)) expected = k;
        }
        if (expected) break;
      }
    }
    EXPECT_EQ(fm.class_of[t], expected) << u.tile(t);
  }
}

TEST(FMass, ShortIntervalSpreadsTilesOverSeveralClasses) {
  // F = [0, 2^-9): 200 I for I in the low level sets no longer wraps the torus.
  const DyadicSet f = interval_set(12, 0, 8);
  const auto seq = LacunarySequence::powers_of_two(13);
  UniverseBounds b;
  b.band_max = 1 << 13;
  Rng rng(4);
  const TileUniverse u(f, seq, random_linearizer(rng, 12, seq.terms(), 6), b);
  const auto tc = classify_tiles(u);
  const auto fm = f_mass_partition(u, tc.sep);
  std::map<int, int> sizes;
  for (std::size_t t : tc.sep) {
    const auto& ip = u.tile(t).interval();
    int expected = 0;
    for (int k = 1; k <= fm.k_f && expected == 0; ++k) {
      for (const auto& i : level_sets(f, k).intervals) {
        const auto big = dilate(i, DyadicRational{200});
        const auto five = dilate(itilde(ip), DyadicRational{5});
        for (std::int64_t m = -3; m <= 3 && ip.level >= i.level; ++m) {
          if (big.contains({five.lo + DyadicRational{m}, five.hi + DyadicRational{m}})) expected = k;
        }
        if (expected) break;
      }
    }
    EXPECT_EQ(fm.class_of[t], expected) << u.tile(t);
    ++sizes[fm.class_of[t]];
  }
  EXPECT_GE(sizes.size(), 3u);
}

TEST(FMass, TopLevelSetIsTheTorusSoNothingIsUnassigned) {
  for (std::uint64_t seed = 11; seed <= 16; ++seed) {
    const World w = make_world(seed, 10, 3, 1 + static_cast<int>(seed % 6));
    const auto top = level_sets(w.f, w.fm.k_f).intervals;
    ASSERT_EQ(top.size(), 1u);
    EXPECT_EQ(top.front(), (DyadicInterval{0, 0}));
    EXPECT_TRUE(w.fm.unassigned.empty());
  }
}

TEST(FMass, DensityAroundAdjointSupportIsControlled) {
  std::int64_t checked = 0;
  for (std::uint64_t seed = 21; seed <= 24; ++seed) {
    const World w = make_world(seed, 14, 0, 11 + static_cast<int>(seed % 2));
    const TileUniverse& u = *w.u;
    for (std::size_t t = 0; t < u.size(); ++t) {
      if (!w.mt.n_class[t]) continue;
      const int k = w.fm.class_of[t];
      ++checked;
      EXPECT_LT(u[t].itilde_f * DyadicRational{std::int64_t{1} << k},
                DyadicRational{1024} * u.tile(t).interval().length())
          << u.tile(t) << " k=" << k;
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(FMass, CzCellsOfUniformTreesHaveLowDensity) {
  std::int64_t decomposed = 0;
  for (std::uint64_t seed = 31; seed <= 34; ++seed) {
    const World w = make_world(seed, 14, 0, 11 + static_cast<int>(seed % 2));
    for (const auto& tree : decompose_all(*w.u, w.tc, w.fm, w.mt)) {
      if (!tree.n || !tree.m) continue;
      std::set<DyadicInterval> cells;
      for (const auto& p : tree.members) {
        for (const auto& c : adjoint_support(p).istar) cells.insert(c);
      }
      std::vector<DyadicInterval> minimal;
      for (const auto& c : cells) {
        if (std::none_of(cells.begin(), cells.end(), [&](const DyadicInterval& d) { return d != c && c.contains(d); })) {
          minimal.push_back(c);
        }
      }
      std::vector<DyadicInterval> cz;
      try {
        cz = cz_decompose(minimal, RealInterval{DyadicRational{0}, DyadicRational{1}});
      } catch (const std::domain_error&) {
        continue;
      }
      ++decomposed;
      for (const auto& i : cz) {
        EXPECT_LT(w.f.measure_in(i) * DyadicRational{std::int64_t{1} << *tree.m}, DyadicRational{1024} * i.length())
            << i << " m=" << *tree.m;
      }
    }
  }
  EXPECT_GT(decomposed, 100);
}

// ---------------------------------------------------------------- mass

TEST(Mass, ClassBoundaries) {
  EXPECT_EQ(mass_class(DyadicRational{1}), 0);
  EXPECT_EQ(mass_class(DyadicRational{3, 2}), 0);
  EXPECT_EQ(mass_class(DyadicRational{1, 1}), 1);
  EXPECT_EQ(mass_class(DyadicRational{3, 3}), 1);
  EXPECT_EQ(mass_class(DyadicRational{5, 4}), 1);
  EXPECT_EQ(mass_class(DyadicRational{1, 10}), 10);
  EXPECT_THROW(mass_class(DyadicRational{0}), std::invalid_argument);
  EXPECT_THROW(mass_class(DyadicRational{3, 1}), std::invalid_argument);
}

TEST(Mass, EmptyFootprintsGiveZeroMass) {
  const auto seq = LacunarySequence::powers_of_two(12);
  UniverseBounds b;
  b.band_max = 1 << 12;
  const TileUniverse u(interval_set(3, 0, 3), seq, constant_linearizer(10, 3), b);
  const auto tc = classify_tiles(u);
  const auto fm = f_mass_partition(u, tc.sep);
  const auto mt = mass_partition(u, fm);
  ASSERT_FALSE(tc.sep.empty());
  for (std::size_t t : tc.sep) {
    EXPECT_TRUE(mt.mass[t].is_zero());
    EXPECT_FALSE(mt.n_class[t]);
  }
  EXPECT_EQ(mt.zero_mass.size(), tc.sep.size());
}

TEST(Mass, FullFootprintOnAMaximalTileGivesMassOne) {
  const auto seq = LacunarySequence::powers_of_two(12);
  UniverseBounds b;
  b.band_max = 1 << 12;
  const TileUniverse u(DyadicSet::full(2), seq, constant_linearizer(10, 2048), b);
  const auto tc = classify_tiles(u);
  const auto fm = f_mass_partition(u, tc.sep);
  const auto mt = mass_partition(u, fm);
  const Tile top{FrequencyInterval::containing(2048, 5), DyadicInterval{5, 9}};
  const auto t = u.index_of(top);
  ASSERT_TRUE(t);
  ASSERT_EQ(fm.class_of[*t], 1);
  EXPECT_EQ(mt.mass[*t], DyadicRational{1});
  EXPECT_EQ(mt.n_class[*t], 0);
  // Every finer tile below it on the same frequency inherits the sup.
  const Tile low{FrequencyInterval::containing(2048, 7), DyadicInterval{7, 9 * 4 + 1}};
  EXPECT_EQ(mt.mass[*u.index_of(low)], DyadicRational{1});
}

TEST(Mass, DynamicProgramMatchesDefinition) {
  for (std::uint64_t seed = 41; seed <= 44; ++seed) {
    const World w = make_world(seed, 10, 3, 1 + static_cast<int>(seed % 5));
    const TileUniverse& u = *w.u;
    int compared = 0;
    for (std::size_t t : w.tc.sep) {
      const int k = w.fm.class_of[t];
      ASSERT_GT(k, 0);
      const auto a = mass(t, k, u, w.fm);
      ASSERT_EQ(a, w.mt.mass[t]) << u.tile(t);
      if (a.is_zero()) {
        EXPECT_FALSE(w.mt.n_class[t]);
      } else {
        ASSERT_TRUE(w.mt.n_class[t]);
        const int n = *w.mt.n_class[t];
        EXPECT_GT(a, DyadicRational(1, n + 1));
        EXPECT_LE(a, DyadicRational(1, n));
      }
      ++compared;
    }
    EXPECT_GT(compared, 100);
  }
}

TEST(Mass, UniformClassesAreConvex) {
  std::int64_t triples = 0;
  for (std::uint64_t seed = 51; seed <= 56; ++seed) {
    const World w = make_world(seed, 12, 3, 8 + static_cast<int>(seed % 3));
    const TileUniverse& u = *w.u;
    auto key = [&](std::size_t t) { return std::make_pair(w.fm.class_of[t], w.mt.n_class[t].value_or(-1)); };
    for (std::size_t i1 : w.tc.sep) {
      const Tile& p1 = u.tile(i1);
      const int k = w.fm.class_of[i1];
      if (!(1 < k && k < w.fm.k_f) || !w.mt.n_class[i1]) continue;
      for (std::size_t i3 : w.tc.sep) {
        const Tile& p3 = u.tile(i3);
        if (p3.scale() + 1 >= p1.scale() || !tile_leq(p1, p3) || key(i3) != key(i1)) continue;
        for (const auto& p2 : between(u, p1, p3)) {
          ++triples;
          const auto i2 = u.index_of(p2);
          ASSERT_TRUE(i2);
          EXPECT_EQ(key(*i2), key(i1)) << p1 << " < " << p2 << " < " << p3;
        }
      }
    }
  }
  EXPECT_GT(triples, 0);
}

// ---------------------------------------------------------------- trees

TEST(Trees, ChainAndDisjointPair) {
  const auto seq = LacunarySequence::powers_of_two(14);
  UniverseBounds b;
  b.band_max = 1 << 14;
  const TileUniverse u(DyadicSet::full(2), seq, constant_linearizer(10, 8192), b);
  FMassPartition fm;
  fm.k_f = 1;
  fm.class_of.assign(u.size(), 1);
  MassTable mt;
  mt.n_class.assign(u.size(), 0);
  const int l = 12;  // n_l = 8192
  auto at = [&](int k, std::int64_t i) {
    return *u.index_of(Tile{FrequencyInterval::containing(8192, k), DyadicInterval{k, i}});
  };
  const std::vector<std::size_t> chain{at(7, 12), at(5, 3), at(6, 6)};
  const auto one = tree_decompose(u, chain, l, fm, mt);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].top, u.tile(at(5, 3)));
  EXPECT_EQ(one[0].members.size(), 3u);
  EXPECT_EQ(one[0].members.back(), u.tile(at(7, 12)));

  const std::vector<std::size_t> pair{at(6, 40), at(6, 2)};
  const auto two = tree_decompose(u, pair, l, fm, mt);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].top.interval(), (DyadicInterval{6, 2}));
  EXPECT_EQ(two[1].top.interval(), (DyadicInterval{6, 40}));
  EXPECT_EQ(two[0].a, 0);
  EXPECT_EQ(two[1].a, 1);

  // A gap splits the chain.
  const std::vector<std::size_t> gap{at(5, 3), at(7, 12)};
  EXPECT_EQ(tree_decompose(u, gap, l, fm, mt).size(), 2u);
  // A tile not holding n_l is rejected.
  const std::vector<std::size_t> wrong{*u.index_of(Tile{FrequencyInterval{5, 1}, DyadicInterval{5, 0}})};
  EXPECT_THROW(tree_decompose(u, wrong, l, fm, mt), std::invalid_argument);
}

TEST(Trees, RandomUniversesGiveMaximalConvexUniformTrees) {
  for (std::uint64_t seed = 61; seed <= 64; ++seed) {
    const World w = make_world(seed, 10, 3, 2 + static_cast<int>(seed % 4));
    const TileUniverse& u = *w.u;
    const auto trees = decompose_all(u, w.tc, w.fm, w.mt);
    std::map<Tile, int> owner;
    std::set<std::tuple<int, int, int, int, int>> ids;
    for (std::size_t i = 0; i < trees.size(); ++i) {
      const auto& tree = trees[i];
      ASSERT_EQ(tree.members.front(), tree.top);
      EXPECT_TRUE(ids.insert({tree.l, tree.m.value_or(0), tree.a, tree.n.value_or(-1), tree.b}).second);
      std::set<Tile> s(tree.members.begin(), tree.members.end());
      EXPECT_TRUE(is_tree(u, s));
      for (const auto& p : tree.members) {
        EXPECT_TRUE(tile_leq(p, tree.top));
        const auto t = *u.index_of(p);
        EXPECT_EQ(frequency_index(p, u.seq()), tree.l);
        EXPECT_EQ(w.fm.class_of[t], tree.m.value_or(0));
        EXPECT_EQ(w.mt.n_class[t], tree.n);
        EXPECT_TRUE(owner.emplace(p, static_cast<int>(i)).second) << p << " in two trees";
      }
    }
    EXPECT_EQ(owner.size(), w.tc.sep.size());
    // Maximality: no leftover tile of the same class extends any tree.
    for (const auto& tree : trees) {
      std::set<Tile> s(tree.members.begin(), tree.members.end());
      for (const auto& [p, i] : owner) {
        const auto& other = trees[static_cast<std::size_t>(i)];
        if (s.contains(p) || other.l != tree.l || other.m != tree.m || other.n != tree.n) continue;
        auto grown = s;
        grown.insert(p);
        EXPECT_FALSE(is_tree(u, grown)) << p << " extends tree with top " << tree.top;
      }
    }
    // Output order within each frequency class.
    for (std::size_t i = 1; i < trees.size(); ++i) {
      if (trees[i].l != trees[i - 1].l) continue;
      const auto& a = trees[i - 1].top;
      const auto& b = trees[i].top;
      EXPECT_LE(std::make_tuple(a.scale(), a.interval().index, a.omega().lo()),
                std::make_tuple(b.scale(), b.interval().index, b.omega().lo()));
    }
  }
}

// ---------------------------------------------------------------- foliation

TEST(Foliation, DisjointTopsAllLandInLayerOne) {
  std::vector<TreeFamily> trees{synthetic_tree(6, 0), synthetic_tree(6, 20), synthetic_tree(6, 40)};
  const auto r = star_foliation(trees);
  EXPECT_EQ(r.layer_count, 1);
  for (std::size_t i = 0; i < trees.size(); ++i) {
    EXPECT_EQ(r.layer[i], 1);
    EXPECT_TRUE(r.selected[i]);
  }
  EXPECT_EQ(max_overlap(std::vector<DyadicInterval>{trees[0].top.interval()}), 1);
}

TEST(Foliation, NestedTopIsAbsorbedIntoTheLargerFamily) {
  std::vector<TreeFamily> trees{synthetic_tree(9, 83), synthetic_tree(6, 10)};
  const auto r = star_foliation(trees);
  EXPECT_EQ(r.layer_count, 1);
  EXPECT_TRUE(r.selected[1]);
  EXPECT_FALSE(r.selected[0]);
  EXPECT_EQ(r.family[0], 1u);
  EXPECT_EQ(r.layer[0], 1);
  apply_layers(trees, r);
  EXPECT_EQ(trees[0].p, 1);
}

TEST(Foliation, CoveredTopOfAnotherClassMovesToTheNextLayer) {
  std::vector<TreeFamily> trees{synthetic_tree(5, 4), synthetic_tree(7, 17), synthetic_tree(7, 18)};
  trees[0].m = 1;
  trees[1].m = 2;
  trees[2].m = 1;
  const auto r = star_foliation(trees);
  EXPECT_EQ(r.layer_count, 2);
  EXPECT_EQ(r.layer, (std::vector<int>{1, 2, 1}));
  EXPECT_EQ(r.selected, (std::vector<bool>{true, true, false}));
  EXPECT_EQ(r.family, (std::vector<std::size_t>{0, 1, 0}));
}

namespace {

// Pointwise re-implementation of the layered selection on midpoints of the finest cells.
FoliationResult foliation_oracle(const std::vector<TreeFamily>& trees) {
  FoliationResult out;
  const std::size_t n = trees.size();
  out.layer.assign(n, 0);
  out.selected.assign(n, false);
  out.family.assign(n, 0);
  int finest = 0;
  for (const auto& t : trees) finest = std::max(finest, t.top.scale());
  std::vector<DyadicRational> points;
  for (std::int64_t c = 0; c < (std::int64_t{1} << finest); ++c) points.emplace_back(2 * c + 1, finest + 1);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& p = trees[a].top;
    const auto& q = trees[b].top;
    return std::make_tuple(p.scale(), p.interval().index, p.omega().lo()) <
           std::make_tuple(q.scale(), q.interval().index, q.omega().lo());
  });
  std::vector<bool> gone(n, false);
  int layer = 0;
  for (std::size_t left = n; left > 0;) {
    ++layer;
    std::vector<std::size_t> chosen;
    for (std::size_t t : order) {
      if (gone[t]) continue;
      const auto mine = itilde(trees[t].top.interval());
      bool free_point = false;
      for (const auto& x : points) {
        if (!point_in_torus(x, mine)) continue;
        bool covered = false;
        for (std::size_t s = 0; s < n && !covered; ++s) {
          covered = !gone[s] && trees[s].top.scale() < trees[t].top.scale() &&
                    point_in_torus(x, itilde(trees[s].top.interval()));
        }
        if (!covered) {
          free_point = true;
          break;
        }
      }
      if (free_point) chosen.push_back(t);
    }
    for (std::size_t s : chosen) {
      out.selected[s] = true;
      out.family[s] = s;
      out.layer[s] = layer;
    }
    std::vector<std::size_t> absorbed;
    for (std::size_t t : order) {
      if (gone[t] || out.selected[t]) continue;
      for (std::size_t s : chosen) {
        if (trees[s].m == trees[t].m && trees[s].top.scale() <= trees[t].top.scale() &&
            torus_overlap(itilde(trees[s].top.interval()), itilde(trees[t].top.interval())) > DyadicRational{0}) {
          out.family[t] = s;
          out.layer[t] = layer;
          absorbed.push_back(t);
          break;
        }
      }
    }
    for (std::size_t s : chosen) gone[s] = true;
    for (std::size_t t : absorbed) gone[t] = true;
    left -= chosen.size() + absorbed.size();
  }
  out.layer_count = layer;
  return out;
}

int overlap_oracle(const std::vector<DyadicInterval>& tops) {
  int finest = 0;
  for (const auto& t : tops) finest = std::max(finest, t.level);
  int best = 0;
  for (std::int64_t c = 0; c < (std::int64_t{1} << finest); ++c) {
    const DyadicRational x{2 * c + 1, finest + 1};
    int hits = 0;
    for (const auto& t : tops) hits += point_in_torus(x, itilde(t)) ? 1 : 0;
    best = std::max(best, hits);
  }
  return best;
}

}  // namespace

TEST(Foliation, MatchesPointwiseOracleOnRandomTops) {
  Rng rng(71);
  int multi_layer = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TreeFamily> trees;
    const auto count = 1 + uniform_index(rng, 12);
    for (std::uint64_t i = 0; i < count; ++i) {
      const int level = 5 + static_cast<int>(uniform_index(rng, 5));
      trees.push_back(synthetic_tree(level, static_cast<std::int64_t>(uniform_index(rng, std::uint64_t{1} << level))));
      trees.back().m = 1 + static_cast<int>(uniform_index(rng, 3));
    }
    const auto got = star_foliation(trees);
    const auto want = foliation_oracle(trees);
    ASSERT_EQ(got.layer, want.layer) << "trial " << trial;
    ASSERT_EQ(got.selected, want.selected) << "trial " << trial;
    ASSERT_EQ(got.family, want.family) << "trial " << trial;
    ASSERT_EQ(got.layer_count, want.layer_count);
    multi_layer += got.layer_count > 1 ? 1 : 0;
    std::vector<DyadicInterval> tops;
    for (const auto& t : trees) tops.push_back(t.top.interval());
    ASSERT_EQ(max_overlap(tops), overlap_oracle(tops));
  }
  EXPECT_GT(multi_layer, 0);
}

TEST(Foliation, UniverseLayersStayWithinBoundAndLayerOneOverlapIsBounded) {
  for (std::uint64_t seed = 81; seed <= 86; ++seed) {
    const World w = make_world(seed, 10, 3, 1 + static_cast<int>(seed % 6));
    auto trees = decompose_all(*w.u, w.tc, w.fm, w.mt);
    std::map<std::pair<int, int>, std::vector<TreeFamily>> groups;
    for (const auto& t : trees) {
      if (t.n) groups[{t.l, *t.n}].push_back(t);
    }
    ASSERT_FALSE(groups.empty());
    for (auto& [key, group] : groups) {
      const auto r = star_foliation(group);
      EXPECT_LE(r.layer_count, w.fm.k_f + 1);
      std::vector<DyadicInterval> tops;
      for (std::size_t i = 0; i < group.size(); ++i) {
        EXPECT_GE(r.layer[i], 1);
        EXPECT_EQ(r.layer[r.family[i]], r.layer[i]);
        EXPECT_TRUE(r.selected[r.family[i]]);
        if (r.layer[i] == 1 && r.selected[i]) tops.push_back(group[i].top.interval());
      }
      EXPECT_LE(max_overlap(tops), 100);
    }
  }
}

// ---------------------------------------------------------------- set resolution

TEST(Resolution, CoverageAndFamilyDefinitions) {
  for (std::uint64_t seed = 91; seed <= 95; ++seed) {
    const World w = make_world(seed, 10, 3, 2 + static_cast<int>(seed % 4));
    const TileUniverse& u = *w.u;
    const auto forests = tfr_global(w.f);
    const auto res = set_resolution(u, w.tc, w.fm, forests);
    EXPECT_TRUE(uncovered_tiles(u, w.tc, res).empty()) << "seed " << seed;
    for (std::size_t t : res.f_zero) EXPECT_TRUE(u[t].itilde_f.is_zero());
    for (const auto& fam : res.families) {
      ASSERT_GE(fam.k, 1);
      ASSERT_LT(fam.k, w.fm.k_f);
      for (std::size_t t : fam.tiles) {
        const Tile& p = u.tile(t);
        EXPECT_GT(torus_overlap(itilde(p.interval()), fam.root.real()), DyadicRational{0});
        const bool meets_r = p.omega().intersects(fam.r.omega());
        const int c = w.fm.class_of[t];
        if (fam.kind == 1) {
          EXPECT_TRUE(meets_r);
          EXPECT_TRUE(fam.k == 1 ? (c == 1 || c == 2) : c == fam.k + 1);
        } else if (fam.k == 1) {
          EXPECT_FALSE(meets_r);
        } else {
          const auto base = base_of(fam.r, forests[static_cast<std::size_t>(fam.k - 1)]);
          EXPECT_TRUE(meets_r);
          EXPECT_FALSE(p.omega().intersects(base.omega()));
          EXPECT_TRUE(c == 0 || c > fam.k);
        }
      }
    }
  }
}

TEST(Resolution, SameNodeTilesShareTheirSecondFamily) {
  int shared = 0;
  const std::vector<std::pair<int, int>> cantor{{4, 2}, {3, 3}, {6, 1}, {5, 1}};
  for (std::size_t c = 0; c < cantor.size(); ++c) {
    Rng rng(101 + c);
    const World w = make_world_for(cantor_set(cantor[c].first, cantor[c].second).refined(12), rng, 12, 3);
    const auto forests = tfr_global(w.f);
    const auto res = set_resolution(*w.u, w.tc, w.fm, forests);
    std::map<ZeroFreqTile, std::vector<std::size_t>> second;
    for (const auto& fam : res.families) {
      if (fam.kind == 2 && fam.k > 1) second[fam.r] = fam.tiles;
    }
    for (int k = 2; k < w.fm.k_f; ++k) {
      const auto& forest = forests[static_cast<std::size_t>(k - 1)];
      for (const auto& root : forest.roots) {
        for (const auto& node : root.tree.nodes) {
          for (std::size_t i = 1; i < node.tiles.size(); ++i) {
            const auto a = second.find(node.tiles[0]);
            const auto b = second.find(node.tiles[i]);
            ASSERT_EQ(a == second.end(), b == second.end());
            if (a != second.end()) {
              EXPECT_EQ(a->second, b->second);
              ++shared;
            }
          }
        }
      }
    }
  }
  EXPECT_GT(shared, 0);
}

TEST(Resolution, TopClassHasNoFamiliesAndForeignForestsAreRejected) {
  const World w = make_world(121, 10, 3, 3);
  const auto forests = tfr_global(w.f);
  const auto res = set_resolution(*w.u, w.tc, w.fm, forests);
  for (const auto& fam : res.families) EXPECT_NE(fam.k, w.fm.k_f);
  Rng rng(5);
  const auto other = tfr_global(random_set(rng, 10, 3));
  EXPECT_THROW(set_resolution(*w.u, w.tc, w.fm, other), std::invalid_argument);
  EXPECT_THROW(set_resolution(*w.u, w.tc, w.fm, std::span(forests).first(1)), std::invalid_argument);
}

TEST(Resolution, SingleClassLeavesSeparatedTilesOutsideEveryFamily) {
  // k_F = 1: no family is defined, so only 𝓟[F,0] can absorb separated tiles.
  const auto seq = LacunarySequence::powers_of_two(12);
  UniverseBounds b;
  b.band_max = 1 << 12;
  const TileUniverse u(interval_set(1, 0, 1), seq, constant_linearizer(10, 2048), b);
  const auto tc = classify_tiles(u);
  const auto fm = f_mass_partition(u, tc.sep);
  ASSERT_EQ(fm.k_f, 2);
  const auto res = set_resolution(u, tc, fm, tfr_global(u.f()));
  EXPECT_TRUE(uncovered_tiles(u, tc, res).empty());

  const TileUniverse whole(DyadicSet::full(1), seq, constant_linearizer(10, 2048), b);
  const auto tc1 = classify_tiles(whole);
  const auto fm1 = f_mass_partition(whole, tc1.sep);
  ASSERT_EQ(fm1.k_f, 1);
  const auto res1 = set_resolution(whole, tc1, fm1, tfr_global(whole.f()));
  EXPECT_TRUE(res1.families.empty());
  EXPECT_TRUE(res1.f_zero.empty());
  EXPECT_EQ(uncovered_tiles(whole, tc1, res1).size(), tc1.sep.size());
}

TEST(Linearizer, RandomBlocksAreConstantOnCells) {
  Rng rng(9);
  const std::vector<std::int64_t> freqs{2, 4, 8};
  const auto n = random_linearizer(rng, 8, freqs, 3);
  ASSERT_EQ(n.choice.size(), 256u);
  for (std::size_t t = 0; t < 256; ++t) EXPECT_EQ(n.choice[t], n.choice[t & ~std::size_t{31}]);
  EXPECT_THROW(random_linearizer(rng, 8, {}, 3), std::invalid_argument);
}
