#pragma once

// Measurable sets as finite unions of dyadic cells, grid functions on the
// torus, Hardy-Littlewood level sets and the Cantor-type extremal set.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "tilelab/dyadic.hpp"
#include "tilelab/random.hpp"

namespace tilelab {

using cd = std::complex<double>;

/// F = union of the level-L cells listed in `cells` (sorted, unique).
class DyadicSet {
 public:
  DyadicSet() = default;
  /// Sorts and deduplicates; throws std::invalid_argument for cells outside [0, 2^L).
  DyadicSet(int level, std::vector<std::int64_t> cells);

  static DyadicSet full(int level);
  static DyadicSet from_intervals(int level, std::span<const DyadicInterval> parts);

  int level() const { return level_; }
  const std::vector<std::int64_t>& cells() const { return cells_; }
  bool empty() const { return cells_.empty(); }

  DyadicRational measure() const;
  /// Number of level-L cells of F inside I (I may be finer than L).
  std::int64_t count_in(const DyadicInterval& iv) const;
  /// |F ∩ I| exactly.
  DyadicRational measure_in(const DyadicInterval& iv) const;
  /// |F ∩ iv| with iv read on the torus (length <= 1).
  DyadicRational measure_in(const RealInterval& iv) const;
  bool contains_cell(std::int64_t cell) const;

  /// Same set written at a finer level.
  DyadicSet refined(int level) const;
  /// Maximal runs of consecutive cells as [begin, end) cell indices.
  std::vector<std::pair<std::int64_t, std::int64_t>> runs() const;
  /// Stable 64-bit content hash used by reports and fixtures.
  std::uint64_t fingerprint() const;

  friend bool operator==(const DyadicSet&, const DyadicSet&) = default;

 private:
  int level_ = 0;
  std::vector<std::int64_t> cells_;
};

/// Complex function on the grid x_t = t 2^-L. Both the sample view and the
/// Fourier coefficient view are stored. Coefficient slot i holds frequency
/// m = i for i < 2^(L-1) and m = i - 2^L otherwise.
class GridFunction {
 public:
  GridFunction() = default;
  static GridFunction zero(int level);
  static GridFunction from_samples(int level, std::vector<cd> values);
  static GridFunction from_coefficients(int level, std::vector<cd> coeffs);

  int level() const { return level_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<cd>& values() const { return values_; }
  const std::vector<cd>& coeffs() const { return coeffs_; }
  cd coeff(std::int64_t m) const;

  static std::int64_t frequency_of_slot(std::size_t slot, int level);
  static std::size_t slot_of_frequency(std::int64_t m, int level);
  /// Lowest and one-past-highest representable frequency.
  static std::int64_t band_lo(int level) { return -(std::int64_t{1} << (level - 1)); }
  static std::int64_t band_hi(int level) { return std::int64_t{1} << (level - 1); }

  /// max |synthesis(coeffs) - values| / max(1, max |values|).
  double consistency_error() const;
  /// Grid averages: sum |v|^p 2^-L.
  double lp_norm(double p) const;

 private:
  int level_ = 0;
  std::vector<cd> values_;
  std::vector<cd> coeffs_;
};

struct LevelSetFamily {
  int k = 0;
  std::vector<DyadicInterval> intervals;  // sorted by position
  DyadicRational union_measure;
};

/// ⌊log2(1/|F|)⌋ + 1; throws std::invalid_argument for an empty set.
int k_F(const DyadicSet& f);

/// Maximal dyadic intervals with |F ∩ I| > 2^-k |I|, for 1 <= k <= k_F.
LevelSetFamily level_sets(const DyadicSet& f, int k);

/// The N-stage right-child Cantor construction with branching 2^s; level N(s+1).
DyadicSet cantor_set(int big_n, int s);

/// [lo, hi) rounded to level-L cells: cells lo_cell .. hi_cell-1.
DyadicSet interval_set(int level, std::int64_t lo_cell, std::int64_t hi_cell);

/// Exact Fourier coefficients of χ_F truncated to the band of `grid_level`; the
/// sample view is the band-limited synthesis of those coefficients.
GridFunction indicator(const DyadicSet& f, int grid_level);

/// χ_F sampled at the left endpoints of the grid cells (grid_level >= f.level()).
std::vector<double> indicator_samples(const DyadicSet& f, int grid_level);

/// Union of random dyadic cells until the measure is exactly 2^-measure_exp.
/// Cell lengths 2^-l have l uniform in (measure_exp, level], so lengths form a
/// geometric progression; requires 0 <= measure_exp < level.
DyadicSet random_set(Rng& rng, int level, int measure_exp);

}  // namespace tilelab
