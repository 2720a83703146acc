#include "tilelab/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tilelab {
namespace {

using i128 = __int128;

constexpr int kMaxExp = 62;

std::int64_t narrow(i128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw std::overflow_error("dyadic rational overflow");
  }
  return static_cast<std::int64_t>(v);
}

// Numerators of a and b over the common denominator 2^max(exp).
std::pair<i128, i128> common(const DyadicRational& a, const DyadicRational& b, int& exp) {
  exp = std::max(a.exp(), b.exp());
  return {static_cast<i128>(a.num()) << (exp - a.exp()), static_cast<i128>(b.num()) << (exp - b.exp())};
}

DyadicRational from_wide(i128 num, int exp) {
  while (exp > 0 && (num & 1) == 0) {
    num >>= 1;
    --exp;
  }
  return {narrow(num), exp};
}

}  // namespace

DyadicRational::DyadicRational(std::int64_t num, int exp) : num_(num), exp_(exp) {
  if (exp_ < 0) {
    if (exp_ < -kMaxExp) throw std::overflow_error("dyadic exponent out of range");
    num_ = narrow(static_cast<i128>(num_) << -exp_);
    exp_ = 0;
  }
  if (num_ == 0) exp_ = 0;
  while (exp_ > 0 && (num_ & 1) == 0) {
    num_ >>= 1;
    --exp_;
  }
  if (exp_ > kMaxExp) throw std::overflow_error("dyadic exponent out of range");
}

double DyadicRational::to_double() const { return std::ldexp(static_cast<double>(num_), -exp_); }

std::int64_t DyadicRational::floor() const {
  // Arithmetic shift rounds toward minus infinity.
  return exp_ == 0 ? num_ : (num_ >> exp_);
}

std::int64_t DyadicRational::ceil() const { return -(-*this).floor(); }

std::int64_t DyadicRational::scaled_to(int exp) const {
  if (exp < exp_) throw std::invalid_argument("scaled_to: resolution too coarse");
  return narrow(static_cast<i128>(num_) << (exp - exp_));
}

DyadicRational operator+(const DyadicRational& a, const DyadicRational& b) {
  int e = 0;
  auto [x, y] = common(a, b, e);
  return from_wide(x + y, e);
}

DyadicRational operator-(const DyadicRational& a, const DyadicRational& b) {
  int e = 0;
  auto [x, y] = common(a, b, e);
  return from_wide(x - y, e);
}

DyadicRational operator*(const DyadicRational& a, const DyadicRational& b) {
  return from_wide(static_cast<i128>(a.num()) * b.num(), a.exp() + b.exp());
}

std::strong_ordering operator<=>(const DyadicRational& a, const DyadicRational& b) {
  int e = 0;
  auto [x, y] = common(a, b, e);
  if (x < y) return std::strong_ordering::less;
  if (x > y) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string DyadicRational::to_string() const {
  std::ostringstream os;
  os << num_;
  if (exp_ > 0) os << "/2^" << exp_;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const DyadicRational& x) { return os << x.to_string(); }

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) throw std::invalid_argument("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const std::int64_t g = std::gcd(n, d);
  num = g == 0 ? 0 : n / g;
  den = g == 0 ? 1 : d / g;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const i128 x = static_cast<i128>(a.num) * b.den;
  const i128 y = static_cast<i128>(b.num) * a.den;
  if (x < y) return std::strong_ordering::less;
  if (x > y) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

RealInterval::RealInterval(DyadicRational l, DyadicRational h) : lo(l), hi(h) {
  if (!(lo < hi)) throw std::invalid_argument("RealInterval requires lo < hi");
}

std::ostream& operator<<(std::ostream& os, const RealInterval& iv) {
  return os << '[' << iv.lo << ", " << iv.hi << ')';
}

DyadicInterval::DyadicInterval(int lvl, std::int64_t idx) : level(lvl), index(idx) {
  if (level < 0 || level > kMaxExp) throw std::invalid_argument("DyadicInterval level out of range");
  if (index < 0 || index >= (std::int64_t{1} << level)) {
    throw std::invalid_argument("DyadicInterval index out of range");
  }
}

bool DyadicInterval::contains(const DyadicInterval& other) const {
  return other.level >= level && (other.index >> (other.level - level)) == index;
}

DyadicInterval DyadicInterval::parent() const {
  if (level == 0) throw std::logic_error("[0,1) has no parent");
  return {level - 1, index >> 1};
}

DyadicInterval DyadicInterval::child(int which) const { return {level + 1, 2 * index + (which ? 1 : 0)}; }

DyadicInterval DyadicInterval::ancestor(int at_level) const {
  if (at_level > level || at_level < 0) throw std::invalid_argument("ancestor level out of range");
  return {at_level, index >> (level - at_level)};
}

std::ostream& operator<<(std::ostream& os, const DyadicInterval& iv) {
  return os << "I(" << iv.level << ',' << iv.index << ')';
}

bool position_less(const DyadicInterval& a, const DyadicInterval& b) {
  const auto la = a.lo();
  const auto lb = b.lo();
  if (la != lb) return la < lb;
  return a.level < b.level;
}

FrequencyInterval FrequencyInterval::containing(std::int64_t n, int level) {
  // Floor division for negative n.
  return {level, n >> level};
}

Tile::Tile(FrequencyInterval omega, DyadicInterval interval) : omega_(omega), interval_(interval) {
  if (omega_.level != interval_.level) throw std::invalid_argument("tile must have area one");
}

std::ostream& operator<<(std::ostream& os, const Tile& p) {
  return os << "P(k=" << p.scale() << ",w=" << p.omega().index << ",I=" << p.interval().index << ')';
}

std::size_t TileHash::operator()(const Tile& p) const noexcept {
  std::uint64_t h = static_cast<std::uint64_t>(p.scale()) * 0x9E3779B97F4A7C15ULL;
  h ^= static_cast<std::uint64_t>(p.interval().index) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
  h ^= static_cast<std::uint64_t>(p.omega().index) + 0x85EBCA77C2B2AE63ULL + (h << 6) + (h >> 2);
  return static_cast<std::size_t>(h);
}

RealInterval dilate(const RealInterval& iv, const DyadicRational& b) {
  if (b <= DyadicRational{0}) throw std::invalid_argument("dilation factor must be positive");
  const auto c = iv.center();
  const auto half = (iv.length() * b).half();
  return {c - half, c + half};
}

RealInterval dilate(const DyadicInterval& iv, const DyadicRational& b) { return dilate(iv.real(), b); }

bool tile_leq(const Tile& p, const Tile& q) {
  return q.interval().contains(p.interval()) && p.omega().contains(q.omega());
}

RealInterval itilde(const DyadicInterval& iv) { return dilate(iv, DyadicRational{17}); }

std::array<RealInterval, 14> adjoint_cells_unwrapped(const DyadicInterval& iv) {
  std::array<RealInterval, 14> out;
  std::size_t n = 0;
  for (std::int64_t d = -8; d <= 8; ++d) {
    if (d >= -1 && d <= 1) continue;
    out[n++] = {DyadicRational{iv.index + d, iv.level}, DyadicRational{iv.index + d + 1, iv.level}};
  }
  return out;
}

AdjointSupport adjoint_support(const Tile& p) {
  const auto& iv = p.interval();
  if (iv.level < kMinOperatorLevel) {
    throw std::invalid_argument("adjoint_support: |I_P| > 1/17 does not fit the torus");
  }
  const std::int64_t cells = std::int64_t{1} << iv.level;
  AdjointSupport out;
  std::size_t n = 0;
  for (std::int64_t d = -8; d <= 8; ++d) {
    if (d >= -1 && d <= 1) continue;
    const std::int64_t idx = ((iv.index + d) % cells + cells) % cells;
    out.istar[n++] = DyadicInterval{iv.level, idx};
  }
  out.itilde = itilde(iv);
  return out;
}

std::vector<RealInterval> torus_pieces(const RealInterval& iv) {
  const DyadicRational one{1};
  if (iv.length() > one) throw std::invalid_argument("torus_pieces: interval longer than the torus");
  const DyadicRational shift{iv.lo.floor()};
  const auto lo = iv.lo - shift;
  const auto hi = iv.hi - shift;
  if (hi <= one) return {RealInterval{lo, hi}};
  std::vector<RealInterval> out{RealInterval{lo, one}};
  if (hi - one > DyadicRational{0}) out.emplace_back(DyadicRational{0}, hi - one);
  return out;
}

DyadicRational torus_overlap(const RealInterval& a, const RealInterval& b) {
  DyadicRational total{0};
  for (const auto& x : torus_pieces(a)) {
    for (const auto& y : torus_pieces(b)) {
      const auto lo = std::max(x.lo, y.lo);
      const auto hi = std::min(x.hi, y.hi);
      if (lo < hi) total = total + (hi - lo);
    }
  }
  return total;
}

namespace {

// Half-open J inside the open interval (c, d).
bool open_contains(const RealInterval& open, const RealInterval& j) { return open.lo < j.lo && j.hi <= open.hi; }

// Maximal dyadic cells tiling [lo, hi) inside [0,1).
std::vector<DyadicInterval> maximal_cells(const RealInterval& base) {
  const int e = std::max(base.lo.exp(), base.hi.exp());
  std::int64_t x = base.lo.scaled_to(e);
  const std::int64_t end = base.hi.scaled_to(e);
  std::vector<DyadicInterval> out;
  while (x < end) {
    int lvl = e;
    // Grow while the cell stays aligned and inside the base.
    while (lvl > 0) {
      const std::int64_t len = std::int64_t{1} << (e - lvl + 1);
      if (x % len != 0 || x + len > end) break;
      --lvl;
    }
    const std::int64_t len = std::int64_t{1} << (e - lvl);
    out.emplace_back(lvl, x >> (e - lvl));
    x += len;
  }
  return out;
}

}  // namespace

std::vector<DyadicInterval> cz_decompose(std::span<const DyadicInterval> a, const RealInterval& base) {
  if (base.lo < DyadicRational{0} || base.hi > DyadicRational{1}) {
    throw std::invalid_argument("cz_decompose: base must lie in [0,1)");
  }
  std::vector<DyadicInterval> sorted(a.begin(), a.end());
  std::sort(sorted.begin(), sorted.end(), position_less);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!base.contains(sorted[i].real())) throw std::invalid_argument("cz_decompose: interval outside base");
    if (i + 1 < sorted.size() && sorted[i].hi() > sorted[i + 1].lo()) {
      throw std::invalid_argument("cz_decompose: intervals not pairwise disjoint");
    }
  }
  std::vector<RealInterval> doubles;
  doubles.reserve(sorted.size());
  for (const auto& iv : sorted) doubles.push_back(dilate(iv, DyadicRational{2}));

  std::vector<DyadicInterval> out;
  std::vector<DyadicInterval> stack;
  auto cells = maximal_cells(base);
  stack.assign(cells.rbegin(), cells.rend());
  while (!stack.empty()) {
    const DyadicInterval j = stack.back();
    stack.pop_back();
    if (std::binary_search(sorted.begin(), sorted.end(), j, position_less)) {
      out.push_back(j);
      continue;
    }
    // First element of a that starts at or after j.lo, and its predecessor.
    auto it = std::lower_bound(sorted.begin(), sorted.end(), j,
                               [](const DyadicInterval& x, const DyadicInterval& y) { return x.lo() < y.lo(); });
    const bool holds_member = it != sorted.end() && it->hi() <= j.hi() && j.contains(*it);
    if (holds_member) {
      stack.push_back(j.child(1));
      stack.push_back(j.child(0));
      continue;
    }
    bool split = false;
    const auto jr = j.real();
    const auto j2 = dilate(j, DyadicRational{2});
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (open_contains(doubles[i], jr)) {
        throw std::domain_error("cz_decompose: no admissible decomposition exists");
      }
      if (open_contains(j2, sorted[i].real())) split = true;
    }
    if (split) {
      stack.push_back(j.child(1));
      stack.push_back(j.child(0));
    } else {
      out.push_back(j);
    }
  }
  std::sort(out.begin(), out.end(), position_less);
  return out;
}

std::vector<Tile> scale_separate(std::span<const Tile> tiles, int first_scale) {
  std::vector<Tile> out;
  for (const auto& p : tiles) {
    if (((p.scale() - first_scale) % 10 + 10) % 10 == 0) out.push_back(p);
  }
  return out;
}

}  // namespace tilelab
