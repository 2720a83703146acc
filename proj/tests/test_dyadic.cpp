#include <gtest/gtest.h>

#include <random>
#include <stdexcept>

#include "tilelab/dyadic.hpp"

using namespace tilelab;

namespace {

DyadicRational q(std::int64_t n, int e = 0) { return {n, e}; }

Tile tile(int level, std::int64_t w, std::int64_t i) { return {FrequencyInterval{level, w}, DyadicInterval{level, i}}; }

bool open_contains(const RealInterval& open, const RealInterval& j) { return open.lo < j.lo && j.hi <= open.hi; }

bool conditions_hold(const DyadicInterval& i, const DyadicInterval& j) {
  return !open_contains(dilate(i, q(2)), j.real()) && !open_contains(dilate(j, q(2)), i.real());
}

// Existence of any admissible partition, by exhaustive recursion.
bool coverable(const DyadicInterval& j, const std::vector<DyadicInterval>& a, int max_level) {
  for (const auto& i : a) {
    if (i == j) return true;
  }
  bool meets = false;
  for (const auto& i : a) meets = meets || j.intersects(i);
  if (!meets) {
    bool ok = true;
    for (const auto& i : a) ok = ok && conditions_hold(i, j);
    if (ok) return true;
  }
  if (j.level >= max_level) return false;
  return coverable(j.child(0), a, max_level) && coverable(j.child(1), a, max_level);
}

std::vector<DyadicInterval> random_disjoint(std::mt19937_64& rng, int max_level, int attempts) {
  std::vector<DyadicInterval> out;
  std::uniform_int_distribution<int> lvl(1, max_level);
  for (int t = 0; t < attempts; ++t) {
    const int l = lvl(rng);
    std::uniform_int_distribution<std::int64_t> idx(0, (std::int64_t{1} << l) - 1);
    DyadicInterval c{l, idx(rng)};
    bool clash = false;
    for (const auto& x : out) clash = clash || x.intersects(c);
    if (!clash) out.push_back(c);
  }
  return out;
}

}  // namespace

TEST(DyadicRational, ArithmeticIsExactAndNormalized) {
  EXPECT_EQ(q(2, 2), q(1, 1));
  EXPECT_EQ(q(1, 1) + q(1, 1), q(1));
  EXPECT_EQ(q(3, 2) - q(1, 1), q(1, 2));
  EXPECT_EQ(q(3, 1) * q(1, 3), q(3, 4));
  EXPECT_EQ(q(-3, 1).floor(), -2);
  EXPECT_EQ(q(-3, 1).ceil(), -1);
  EXPECT_EQ(q(7, 2).floor(), 1);
  EXPECT_LT(q(-1, 5), q(0));
  EXPECT_DOUBLE_EQ(q(5, 3).to_double(), 0.625);
}

TEST(DyadicRational, OverflowIsReported) {
  EXPECT_THROW(q(1, 63), std::overflow_error);
  EXPECT_THROW(q(std::int64_t{1} << 62) + q(std::int64_t{1} << 62), std::overflow_error);
}

TEST(DyadicInterval, RejectsIndexOutsideTorus) {
  EXPECT_THROW(DyadicInterval(2, 4), std::invalid_argument);
  EXPECT_THROW(DyadicInterval(2, -1), std::invalid_argument);
}

TEST(DyadicInterval, NestedOrDisjoint) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 2000; ++t) {
    std::uniform_int_distribution<int> lvl(0, 8);
    const int la = lvl(rng), lb = lvl(rng);
    DyadicInterval a{la, std::uniform_int_distribution<std::int64_t>(0, (1 << la) - 1)(rng)};
    DyadicInterval b{lb, std::uniform_int_distribution<std::int64_t>(0, (1 << lb) - 1)(rng)};
    const bool overlap = a.real().overlaps(b.real());
    EXPECT_EQ(overlap, a.contains(b) || b.contains(a));
  }
}

TEST(Dilate, SpecExamples) {
  EXPECT_EQ(dilate(RealInterval{q(0), q(1, 1)}, q(3)), (RealInterval{q(-1, 1), q(1)}));
  EXPECT_EQ(dilate(DyadicInterval{2, 0}, q(1)), (RealInterval{q(0), q(1, 2)}));
  EXPECT_EQ(dilate(DyadicInterval{2, 1}, q(17)), (RealInterval{q(-7, 2), q(5, 1)}));
}

TEST(Dilate, RejectsNonPositiveFactor) {
  EXPECT_THROW(dilate(DyadicInterval{1, 0}, q(0)), std::invalid_argument);
}

TEST(TileLeq, SpecExamples) {
  const Tile p = tile(2, 0, 0);
  const Tile qq = tile(1, 0, 0);
  EXPECT_TRUE(tile_leq(p, qq));
  EXPECT_TRUE(tile_leq(p, p));
  EXPECT_FALSE(tile_leq(qq, p));
}

TEST(TileLeq, OrderAxiomsFuzzed) {
  std::mt19937_64 rng(5);
  std::vector<Tile> tiles;
  for (int l = 0; l <= 3; ++l) {
    for (std::int64_t i = 0; i < (1 << l); ++i) {
      for (std::int64_t w = -2; w < 2; ++w) tiles.push_back(tile(l, w, i));
    }
  }
  for (const auto& a : tiles) {
    EXPECT_TRUE(tile_leq(a, a));
    for (const auto& b : tiles) {
      if (tile_leq(a, b) && tile_leq(b, a)) {
        EXPECT_EQ(a, b);
      }
      for (int t = 0; t < 3; ++t) {
        const auto& c = tiles[std::uniform_int_distribution<std::size_t>(0, tiles.size() - 1)(rng)];
        if (tile_leq(a, b) && tile_leq(b, c)) {
          EXPECT_TRUE(tile_leq(a, c));
        }
      }
    }
  }
}

TEST(Tile, RequiresAreaOne) {
  EXPECT_THROW(Tile(FrequencyInterval{2, 0}, DyadicInterval{3, 0}), std::invalid_argument);
}

TEST(AdjointSupport, UnwrappedCellsOfCoarseInterval) {
  // I = [0,1/8): pieces [-1,-1/8) and [1/4,9/8).
  const auto cells = adjoint_cells_unwrapped(DyadicInterval{3, 0});
  EXPECT_EQ(cells.front().lo, q(-1));
  EXPECT_EQ(cells[6].hi, q(-1, 3));
  EXPECT_EQ(cells[7].lo, q(1, 2));
  EXPECT_EQ(cells.back().hi, q(9, 3));
  EXPECT_EQ(itilde(DyadicInterval{3, 0}), (RealInterval{q(-1), q(9, 3)}));
}

TEST(AdjointSupport, CoarseTilesRejected) {
  EXPECT_THROW(adjoint_support(tile(4, 0, 0)), std::invalid_argument);
  EXPECT_NO_THROW(adjoint_support(tile(5, 0, 0)));
}

TEST(AdjointSupport, PiecesDisjointFromIAndEachOther) {
  for (int l = 5; l <= 8; ++l) {
    for (std::int64_t i = 0; i < (1 << l); i += 3) {
      const Tile p = tile(l, 1, i);
      const auto s = adjoint_support(p);
      EXPECT_EQ(s.itilde, dilate(p.interval(), q(17)));
      DyadicRational total{0};
      for (std::size_t a = 0; a < s.istar.size(); ++a) {
        EXPECT_EQ(s.istar[a].level, l);
        EXPECT_FALSE(s.istar[a].intersects(p.interval()));
        total = total + s.istar[a].length();
        for (std::size_t b = a + 1; b < s.istar.size(); ++b) EXPECT_FALSE(s.istar[a].intersects(s.istar[b]));
        EXPECT_EQ(torus_overlap(s.istar[a].real(), s.itilde), s.istar[a].length());
      }
      EXPECT_EQ(total, p.interval().length() * q(14));
    }
  }
}

TEST(TorusOverlap, WrapsAroundZero) {
  const RealInterval a{q(-1, 2), q(1, 2)};
  EXPECT_EQ(torus_pieces(a).size(), 2u);
  EXPECT_EQ(torus_overlap(a, RealInterval{q(3, 2), q(1)}), q(1, 2));
  EXPECT_EQ(torus_overlap(a, RealInterval{q(1, 2), q(3, 2)}), q(0));
}

TEST(CzDecompose, SpecExamples) {
  const RealInterval base{q(0), q(1)};
  std::vector<DyadicInterval> a{{2, 0}};
  EXPECT_EQ(cz_decompose(a, base), (std::vector<DyadicInterval>{{2, 0}, {2, 1}, {1, 1}}));
  EXPECT_EQ(cz_decompose({}, base), (std::vector<DyadicInterval>{{0, 0}}));
  std::vector<DyadicInterval> all;
  for (int i = 0; i < 8; ++i) all.emplace_back(3, i);
  EXPECT_EQ(cz_decompose(all, base), all);
}

TEST(CzDecompose, RejectsOverlappingInput) {
  std::vector<DyadicInterval> a{{1, 0}, {2, 1}};
  EXPECT_THROW(cz_decompose(a, RealInterval{q(0), q(1)}), std::invalid_argument);
}

TEST(CzDecompose, AdjacentMismatchedSizesHaveNoDecomposition) {
  // [1/2,1) and [1/4,3/8): the gap [3/8,1/2) lies inside the double of [1/2,1).
  std::vector<DyadicInterval> a{{1, 1}, {3, 2}};
  EXPECT_THROW(cz_decompose(a, RealInterval{q(0), q(1)}), std::domain_error);
  EXPECT_FALSE(coverable(DyadicInterval{0, 0}, a, 12));
}

TEST(CzDecompose, FuzzedPartitionConditionsAndMaximality) {
  std::mt19937_64 rng(2024);
  int solved = 0;
  for (int t = 0; t < 600; ++t) {
    const auto a = random_disjoint(rng, 7, 1 + t % 6);
    const RealInterval base{q(0), q(1)};
    std::vector<DyadicInterval> out;
    try {
      out = cz_decompose(a, base);
    } catch (const std::domain_error&) {
      EXPECT_FALSE(coverable(DyadicInterval{0, 0}, a, 12));
      continue;
    }
    ++solved;
    EXPECT_TRUE(coverable(DyadicInterval{0, 0}, a, 12));
    DyadicRational total{0};
    for (std::size_t i = 0; i < out.size(); ++i) {
      total = total + out[i].length();
      if (i + 1 < out.size()) {
        EXPECT_EQ(out[i].hi(), out[i + 1].lo());
      }
    }
    EXPECT_EQ(total, q(1));
    for (const auto& i : a) EXPECT_NE(std::find(out.begin(), out.end(), i), out.end());
    for (const auto& j : out) {
      if (std::find(a.begin(), a.end(), j) != a.end()) continue;
      for (const auto& i : a) EXPECT_TRUE(conditions_hold(i, j)) << i << ' ' << j;
      // Maximality: the parent would either meet a or violate a condition.
      if (j.level == 0) continue;
      const auto par = j.parent();
      bool meets = false, ok = true;
      for (const auto& i : a) {
        meets = meets || par.intersects(i);
        ok = ok && conditions_hold(i, par);
      }
      EXPECT_TRUE(meets || !ok) << j;
    }
  }
  EXPECT_GT(solved, 200);
}

TEST(CzDecompose, SubBaseInterval) {
  std::vector<DyadicInterval> a{{3, 6}};
  const auto out = cz_decompose(a, RealInterval{q(1, 1), q(1)});
  DyadicRational total{0};
  for (const auto& j : out) total = total + j.length();
  EXPECT_EQ(total, q(1, 1));
  EXPECT_EQ(out.front().lo(), q(1, 1));
  EXPECT_EQ(out.back().hi(), q(1));
}

TEST(ScaleSeparation, NestedRetainedTilesHaveDisjointAdjointSupports) {
  std::mt19937_64 rng(9);
  std::vector<Tile> tiles;
  for (int l = 5; l <= 25; ++l) {
    for (int t = 0; t < 6; ++t) {
      const std::int64_t idx = std::uniform_int_distribution<std::int64_t>(0, (std::int64_t{1} << l) - 1)(rng);
      tiles.push_back(tile(l, 3, t < 2 ? (t == 0 ? 0 : (std::int64_t{1} << l) - 1) : idx));
    }
  }
  const auto kept = scale_separate(tiles, 5);
  for (const auto& p : kept) EXPECT_EQ((p.scale() - 5) % 10, 0);
  int nested = 0;
  for (const auto& p : kept) {
    for (const auto& r : kept) {
      if (p.scale() == r.scale()) continue;
      EXPECT_GE(std::abs(r.scale() - p.scale()), 10);
      if (!p.interval().contains(r.interval())) continue;
      ++nested;
      const auto sp = adjoint_support(p);
      const auto sr = adjoint_support(r);
      for (const auto& x : sp.istar) {
        for (const auto& y : sr.istar) EXPECT_FALSE(x.intersects(y)) << p << ' ' << r;
      }
    }
  }
  EXPECT_GT(nested, 0);
}
