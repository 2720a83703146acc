#include "tilelab/setmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tilelab/fft.hpp"

namespace tilelab {

DyadicSet::DyadicSet(int level, std::vector<std::int64_t> cells) : level_(level), cells_(std::move(cells)) {
  if (level_ < 0 || level_ > 40) throw std::invalid_argument("DyadicSet level out of range");
  std::sort(cells_.begin(), cells_.end());
  cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
  if (!cells_.empty() && (cells_.front() < 0 || cells_.back() >= (std::int64_t{1} << level_))) {
    throw std::invalid_argument("DyadicSet cell outside [0, 2^L)");
  }
}

DyadicSet DyadicSet::full(int level) { return interval_set(level, 0, std::int64_t{1} << level); }

DyadicSet DyadicSet::from_intervals(int level, std::span<const DyadicInterval> parts) {
  std::vector<std::int64_t> cells;
  for (const auto& iv : parts) {
    if (iv.level > level) throw std::invalid_argument("from_intervals: interval finer than the set level");
    const int sh = level - iv.level;
    for (std::int64_t c = iv.index << sh; c < (iv.index + 1) << sh; ++c) cells.push_back(c);
  }
  return {level, std::move(cells)};
}

DyadicRational DyadicSet::measure() const { return {static_cast<std::int64_t>(cells_.size()), level_}; }

std::int64_t DyadicSet::count_in(const DyadicInterval& iv) const {
  if (iv.level >= level_) return contains_cell(iv.index >> (iv.level - level_)) ? 1 : 0;
  const int sh = level_ - iv.level;
  const auto lo = std::lower_bound(cells_.begin(), cells_.end(), iv.index << sh);
  const auto hi = std::lower_bound(lo, cells_.end(), (iv.index + 1) << sh);
  return hi - lo;
}

DyadicRational DyadicSet::measure_in(const DyadicInterval& iv) const {
  if (iv.level >= level_) return count_in(iv) ? iv.length() : DyadicRational{0};
  return {count_in(iv), level_};
}

bool DyadicSet::contains_cell(std::int64_t cell) const { return std::binary_search(cells_.begin(), cells_.end(), cell); }

DyadicRational DyadicSet::measure_in(const RealInterval& iv) const {
  DyadicRational total{0};
  for (const auto& piece : torus_pieces(iv)) {
    const int e = std::max({level_, piece.lo.exp(), piece.hi.exp()});
    const int sh = e - level_;
    const std::int64_t lo = piece.lo.scaled_to(e);
    const std::int64_t hi = piece.hi.scaled_to(e);
    const std::int64_t c0 = lo >> sh;
    const std::int64_t c1 = (hi - 1) >> sh;
    std::int64_t units = 0;
    auto partial = [&](std::int64_t c) {
      if (!contains_cell(c)) return;
      units += std::min((c + 1) << sh, hi) - std::max(c << sh, lo);
    };
    partial(c0);
    if (c1 != c0) {
      partial(c1);
      const auto a = std::upper_bound(cells_.begin(), cells_.end(), c0);
      const auto b = std::lower_bound(a, cells_.end(), c1);
      units += static_cast<std::int64_t>(b - a) << sh;
    }
    total = total + DyadicRational{units, e};
  }
  return total;
}

DyadicSet DyadicSet::refined(int level) const {
  if (level < level_) throw std::invalid_argument("refined: target level coarser than the set");
  const int sh = level - level_;
  std::vector<std::int64_t> out;
  out.reserve(cells_.size() << sh);
  for (auto c : cells_) {
    for (std::int64_t d = 0; d < (std::int64_t{1} << sh); ++d) out.push_back((c << sh) + d);
  }
  return {level, std::move(out)};
}

std::vector<std::pair<std::int64_t, std::int64_t>> DyadicSet::runs() const {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (auto c : cells_) {
    if (!out.empty() && out.back().second == c) {
      out.back().second = c + 1;
    } else {
      out.emplace_back(c, c + 1);
    }
  }
  return out;
}

std::uint64_t DyadicSet::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(level_));
  for (auto c : cells_) mix(static_cast<std::uint64_t>(c));
  return h;
}

GridFunction GridFunction::zero(int level) {
  const std::size_t n = std::size_t{1} << level;
  GridFunction g;
  g.level_ = level;
  g.values_.assign(n, cd{});
  g.coeffs_.assign(n, cd{});
  return g;
}

GridFunction GridFunction::from_samples(int level, std::vector<cd> values) {
  if (values.size() != (std::size_t{1} << level)) throw std::invalid_argument("from_samples: size must be 2^L");
  GridFunction g;
  g.level_ = level;
  g.coeffs_ = fft::forward(values);
  const double inv = 1.0 / static_cast<double>(values.size());
  for (auto& c : g.coeffs_) c *= inv;
  g.values_ = std::move(values);
  return g;
}

GridFunction GridFunction::from_coefficients(int level, std::vector<cd> coeffs) {
  if (coeffs.size() != (std::size_t{1} << level)) throw std::invalid_argument("from_coefficients: size must be 2^L");
  GridFunction g;
  g.level_ = level;
  g.values_ = fft::backward(coeffs);
  g.coeffs_ = std::move(coeffs);
  return g;
}

cd GridFunction::coeff(std::int64_t m) const { return coeffs_[slot_of_frequency(m, level_)]; }

std::int64_t GridFunction::frequency_of_slot(std::size_t slot, int level) {
  const auto half = std::size_t{1} << (level - 1);
  return slot < half ? static_cast<std::int64_t>(slot) : static_cast<std::int64_t>(slot) - (std::int64_t{1} << level);
}

std::size_t GridFunction::slot_of_frequency(std::int64_t m, int level) {
  if (m < band_lo(level) || m >= band_hi(level)) throw std::out_of_range("frequency outside the band");
  return static_cast<std::size_t>(m < 0 ? m + (std::int64_t{1} << level) : m);
}

double GridFunction::consistency_error() const {
  const auto synth = fft::backward(coeffs_);
  double err = 0.0;
  double scale = 1.0;
  for (std::size_t t = 0; t < values_.size(); ++t) {
    err = std::max(err, std::abs(synth[t] - values_[t]));
    scale = std::max(scale, std::abs(values_[t]));
  }
  return err / scale;
}

double GridFunction::lp_norm(double p) const {
  double s = 0.0;
  for (const auto& v : values_) s += std::pow(std::abs(v), p);
  return std::pow(s / static_cast<double>(values_.size()), 1.0 / p);
}

int k_F(const DyadicSet& f) {
  if (f.empty()) throw std::invalid_argument("k_F: zero-measure set");
  const auto c = static_cast<std::int64_t>(f.cells().size());
  // Largest j with c 2^j <= 2^L.
  int j = 0;
  while ((c << (j + 1)) <= (std::int64_t{1} << f.level())) ++j;
  return j + 1;
}

LevelSetFamily level_sets(const DyadicSet& f, int k) {
  if (f.empty()) throw std::invalid_argument("level_sets: zero-measure set");
  if (k < 1 || k > k_F(f)) throw std::invalid_argument("level_sets: k outside [1, k_F]");
  LevelSetFamily fam;
  fam.k = k;
  fam.union_measure = DyadicRational{0};
  const int big_l = f.level();
  std::vector<DyadicInterval> stack{DyadicInterval{0, 0}};
  while (!stack.empty()) {
    const auto iv = stack.back();
    stack.pop_back();
    const std::int64_t cnt = f.count_in(iv);
    if (cnt == 0) continue;
    // cnt 2^-L / 2^-l > 2^-k  <=>  cnt 2^(l+k) > 2^L
    const bool dense = (static_cast<__int128>(cnt) << (iv.level + k)) > (static_cast<__int128>(1) << big_l);
    if (dense) {
      fam.intervals.push_back(iv);
      fam.union_measure = fam.union_measure + iv.length();
    } else {
      stack.push_back(iv.child(1));
      stack.push_back(iv.child(0));
    }
  }
  std::sort(fam.intervals.begin(), fam.intervals.end(), position_less);
  return fam;
}

DyadicSet cantor_set(int big_n, int s) {
  if (big_n < 1 || s < 1) throw std::invalid_argument("cantor_set: N and s must be positive");
  if (static_cast<long>(big_n) * (s + 1) > 30) throw std::invalid_argument("cantor_set: level overflow");
  // Stage intervals at level stage*(s+1)+s are implicit; we track right children.
  std::vector<std::int64_t> current{0};
  int level = 0;
  for (int stage = 0; stage < big_n; ++stage) {
    std::vector<std::int64_t> next;
    next.reserve(current.size() << s);
    for (auto c : current) {
      for (std::int64_t d = 0; d < (std::int64_t{1} << s); ++d) next.push_back((((c << s) + d) << 1) + 1);
    }
    current = std::move(next);
    level += s + 1;
  }
  return {level, std::move(current)};
}

DyadicSet interval_set(int level, std::int64_t lo_cell, std::int64_t hi_cell) {
  std::vector<std::int64_t> cells;
  for (std::int64_t c = lo_cell; c < hi_cell; ++c) cells.push_back(c);
  return {level, std::move(cells)};
}

GridFunction indicator(const DyadicSet& f, int grid_level) {
  const std::size_t n = std::size_t{1} << grid_level;
  std::vector<cd> coeffs(n);
  if (f.empty()) return GridFunction::from_coefficients(grid_level, std::move(coeffs));
  // Step function with cell width h = 2^-Ls: c_m = D(m mod 2^Ls) (1 - e^{-2 pi i m h}) / (2 pi i m).
  const int ls = f.level();
  std::vector<cd> samples(std::size_t{1} << ls);
  for (auto c : f.cells()) samples[static_cast<std::size_t>(c)] = 1.0;
  const auto d = fft::forward(samples);
  const std::int64_t period = std::int64_t{1} << ls;
  const double h = std::ldexp(1.0, -ls);
  for (std::size_t slot = 0; slot < n; ++slot) {
    const std::int64_t m = GridFunction::frequency_of_slot(slot, grid_level);
    if (m == 0) {
      coeffs[slot] = f.measure().to_double();
      continue;
    }
    const auto idx = static_cast<std::size_t>(((m % period) + period) % period);
    const double w = 2.0 * std::numbers::pi * static_cast<double>(m);
    const cd factor = (1.0 - std::polar(1.0, -w * h)) / cd(0.0, w);
    coeffs[slot] = d[idx] * factor;
  }
  return GridFunction::from_coefficients(grid_level, std::move(coeffs));
}

std::vector<double> indicator_samples(const DyadicSet& f, int grid_level) {
  if (grid_level < f.level()) throw std::invalid_argument("indicator_samples: grid coarser than the set");
  const int sh = grid_level - f.level();
  std::vector<double> out(std::size_t{1} << grid_level, 0.0);
  for (auto c : f.cells()) {
    for (std::int64_t d = 0; d < (std::int64_t{1} << sh); ++d) out[static_cast<std::size_t>((c << sh) + d)] = 1.0;
  }
  return out;
}

DyadicSet random_set(Rng& rng, int level, int measure_exp) {
  if (measure_exp < 0 || measure_exp >= level) throw std::invalid_argument("random_set: measure exponent out of range");
  const std::int64_t target = std::int64_t{1} << (level - measure_exp);
  std::vector<char> in(std::size_t{1} << level, 0);
  std::int64_t count = 0;
  while (count < target) {
    const int l = measure_exp + 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(level - measure_exp)));
    const auto idx = static_cast<std::int64_t>(uniform_index(rng, std::uint64_t{1} << l));
    const int sh = level - l;
    for (std::int64_t c = idx << sh; c < (idx + 1) << sh && count < target; ++c) {
      if (!in[static_cast<std::size_t>(c)]) {
        in[static_cast<std::size_t>(c)] = 1;
        ++count;
      }
    }
  }
  std::vector<std::int64_t> cells;
  cells.reserve(static_cast<std::size_t>(count));
  for (std::size_t c = 0; c < in.size(); ++c) {
    if (in[c]) cells.push_back(static_cast<std::int64_t>(c));
  }
  return {level, std::move(cells)};
}

}  // namespace tilelab
