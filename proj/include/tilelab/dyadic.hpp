#pragma once

// Dyadic geometry on the torus [0,1): exact dyadic rationals, time intervals,
// frequency intervals, tiles and the operations built on them.

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace tilelab {

/// Exact rational number num * 2^-exp with exp >= 0, kept in lowest terms.
class DyadicRational {
 public:
  constexpr DyadicRational() = default;
  DyadicRational(std::int64_t num, int exp = 0);  // NOLINT(google-explicit-constructor)

  std::int64_t num() const { return num_; }
  int exp() const { return exp_; }

  double to_double() const;
  std::int64_t floor() const;
  std::int64_t ceil() const;
  bool is_zero() const { return num_ == 0; }

  /// Numerator when written over the denominator 2^exp (requires exp >= this->exp()).
  std::int64_t scaled_to(int exp) const;

  DyadicRational operator-() const { return {-num_, exp_}; }
  friend DyadicRational operator+(const DyadicRational& a, const DyadicRational& b);
  friend DyadicRational operator-(const DyadicRational& a, const DyadicRational& b);
  friend DyadicRational operator*(const DyadicRational& a, const DyadicRational& b);
  DyadicRational half() const { return {num_, exp_ + 1}; }

  friend bool operator==(const DyadicRational& a, const DyadicRational& b) = default;
  friend std::strong_ordering operator<=>(const DyadicRational& a, const DyadicRational& b);

  std::string to_string() const;

 private:
  std::int64_t num_ = 0;
  int exp_ = 0;
};

std::ostream& operator<<(std::ostream& os, const DyadicRational& x);

/// Ordinary rational with positive denominator; used for ratios such as the
/// lacunarity constant where a power-of-two denominator is not guaranteed.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);  // NOLINT(google-explicit-constructor)
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);
};

/// Half-open interval [lo, hi) on the real line with dyadic endpoints.
/// Used for dilations which may leave [0,1) before the torus wrap.
struct RealInterval {
  DyadicRational lo;
  DyadicRational hi;

  RealInterval() = default;
  RealInterval(DyadicRational lo, DyadicRational hi);

  DyadicRational length() const { return hi - lo; }
  DyadicRational center() const { return (lo + hi).half(); }
  bool contains(const RealInterval& other) const { return lo <= other.lo && other.hi <= hi; }
  bool overlaps(const RealInterval& other) const { return lo < other.hi && other.lo < hi; }
  friend bool operator==(const RealInterval&, const RealInterval&) = default;
};

std::ostream& operator<<(std::ostream& os, const RealInterval& iv);

/// [index*2^-level, (index+1)*2^-level) inside [0,1).
struct DyadicInterval {
  int level = 0;
  std::int64_t index = 0;

  DyadicInterval() = default;
  DyadicInterval(int level, std::int64_t index);

  DyadicRational length() const { return {1, level}; }
  DyadicRational lo() const { return {index, level}; }
  DyadicRational hi() const { return {index + 1, level}; }
  RealInterval real() const { return {lo(), hi()}; }

  bool contains(const DyadicInterval& other) const;
  bool intersects(const DyadicInterval& other) const {
    return contains(other) || other.contains(*this);
  }
  DyadicInterval parent() const;
  DyadicInterval child(int which) const;
  DyadicInterval ancestor(int at_level) const;

  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
  friend std::strong_ordering operator<=>(const DyadicInterval&, const DyadicInterval&) = default;
};

std::ostream& operator<<(std::ostream& os, const DyadicInterval& iv);

/// Left-to-right order; nested intervals order coarse first.
bool position_less(const DyadicInterval& a, const DyadicInterval& b);

/// [index*2^level, (index+1)*2^level) inside the integers.
struct FrequencyInterval {
  int level = 0;
  std::int64_t index = 0;

  std::int64_t lo() const { return index * (std::int64_t{1} << level); }
  std::int64_t hi() const { return (index + 1) * (std::int64_t{1} << level); }
  std::int64_t length() const { return std::int64_t{1} << level; }
  bool contains(std::int64_t n) const { return lo() <= n && n < hi(); }
  bool contains(const FrequencyInterval& other) const {
    return lo() <= other.lo() && other.hi() <= hi();
  }
  bool intersects(const FrequencyInterval& other) const {
    return lo() < other.hi() && other.lo() < hi();
  }
  /// The frequency interval of the given level that contains n.
  static FrequencyInterval containing(std::int64_t n, int level);

  friend bool operator==(const FrequencyInterval&, const FrequencyInterval&) = default;
  friend std::strong_ordering operator<=>(const FrequencyInterval&,
                                          const FrequencyInterval&) = default;
};

/// Area-one rectangle [omega, I] in the time-frequency plane.
class Tile {
 public:
  Tile() = default;
  Tile(FrequencyInterval omega, DyadicInterval interval);

  const FrequencyInterval& omega() const { return omega_; }
  const DyadicInterval& interval() const { return interval_; }
  /// Scale k with |I| = 2^-k and |omega| = 2^k.
  int scale() const { return interval_.level; }

  friend bool operator==(const Tile&, const Tile&) = default;
  friend std::strong_ordering operator<=>(const Tile&, const Tile&) = default;

 private:
  FrequencyInterval omega_;
  DyadicInterval interval_;
};

std::ostream& operator<<(std::ostream& os, const Tile& p);

struct TileHash {
  std::size_t operator()(const Tile& p) const noexcept;
};

/// Interval with the same center and b times the length.
RealInterval dilate(const RealInterval& iv, const DyadicRational& b);
RealInterval dilate(const DyadicInterval& iv, const DyadicRational& b);

/// p <= q iff I_p is inside I_q and omega_p contains omega_q.
bool tile_leq(const Tile& p, const Tile& q);

/// Finest tile length the adjoint-support geometry accepts: |I| <= 2^-5.
inline constexpr int kMinOperatorLevel = 5;

struct AdjointSupport {
  /// Fourteen cells of length |I_P| forming the support of T_P^*, wrapped to the torus.
  std::array<DyadicInterval, 14> istar;
  /// 17 I_P on the real line (not wrapped).
  RealInterval itilde;
};

/// Throws std::invalid_argument when 17 |I_P| would exceed the torus.
AdjointSupport adjoint_support(const Tile& p);

/// The same fourteen cells on the real line, before the wrap; defined at every level.
std::array<RealInterval, 14> adjoint_cells_unwrapped(const DyadicInterval& iv);

/// Ĩ_P = 17 I_P.
RealInterval itilde(const DyadicInterval& iv);

/// Splits an interval of length <= 1 into at most two pieces inside [0,1)
/// after reducing mod 1.
std::vector<RealInterval> torus_pieces(const RealInterval& iv);

/// Length of the intersection of two intervals read on the torus.
DyadicRational torus_overlap(const RealInterval& a, const RealInterval& b);

/// Calderon-Zygmund decomposition of `base` relative to the disjoint family `a`:
/// returns a together with the maximal dyadic family B such that a ∪ B partitions
/// base and neither 2I ⊇ J nor 2J ⊇ I for I in a, J in B. Output is sorted by
/// position.
///
/// Throws std::invalid_argument when a is not pairwise disjoint or not inside
/// base, and std::domain_error when no such B exists (some region next to a
/// member of a can only be covered by cells inside its double).
std::vector<DyadicInterval> cz_decompose(std::span<const DyadicInterval> a,
                                         const RealInterval& base);

/// Keeps tiles whose scale is congruent to `first_scale` mod 10, so that any two
/// retained lengths differ by at least 2^10 when they differ at all.
std::vector<Tile> scale_separate(std::span<const Tile> tiles, int first_scale);

}  // namespace tilelab
