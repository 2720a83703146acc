#include "tilelab/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tilelab/fft.hpp"
#include "tilelab/random.hpp"

namespace tilelab::kernels {
namespace {

using u128 = unsigned __int128;

constexpr std::uint64_t kZygmundBlock = 4096;

std::int64_t slot_frequency(std::size_t slot, int level) {
  const auto half = std::size_t{1} << (level - 1);
  return slot < half ? static_cast<std::int64_t>(slot) : static_cast<std::int64_t>(slot) - (std::int64_t{1} << level);
}

// Fold one candidate row into the running sup; rows must arrive in increasing j.
// The sup is exact; the choice moves only on a gain beyond the tie tolerance.
void fold(SupChoice& acc, const std::vector<double>& row, int j, std::size_t begin, std::size_t end) {
  for (std::size_t t = begin; t < end; ++t) {
    const double v = row[t];
    if (j == 0 || v > acc.sup[t] * (1.0 + kTieTolerance)) {
      acc.sup[t] = v;
      acc.choice[t] = j;
    } else if (v > acc.sup[t]) {
      acc.sup[t] = v;
    }
  }
}

std::vector<double> modulus_row(const std::vector<cd>& coeffs, int level, std::int64_t n) {
  const auto vals = fft::backward(apply_hilbert_multiplier(coeffs, level, n));
  std::vector<double> row(vals.size());
  for (std::size_t t = 0; t < vals.size(); ++t) row[t] = std::abs(vals[t]);
  return row;
}

std::vector<double> walsh_row(const std::vector<double>& coeffs, int level, std::int64_t n) {
  auto vals = walsh_truncated_synthesis(coeffs, level, n);
  for (auto& v : vals) v = std::abs(v);
  return vals;
}

// Sum over samples [first, last) of one block, in index order.
double zygmund_block(std::span<const std::int64_t> cells, int set_level, int m_terms, std::uint64_t first,
                     std::uint64_t last, std::uint64_t seed) {
  double acc = 0.0;
  for (std::uint64_t i = first; i < last; ++i) {
    const std::uint64_t r0 = splitmix64(seed ^ (2 * i));
    const std::uint64_t r1 = splitmix64(seed ^ (2 * i + 1));
    const std::uint64_t cell = static_cast<std::uint64_t>(cells[r0 % cells.size()]);
    // x = (cell + u) 2^-set_level with u given by 64 + (64 - set_level) random bits.
    const u128 noise = (static_cast<u128>(r1) << 64) | splitmix64(r0 + 0xA5A5A5A5ULL);
    const u128 x = set_level == 0 ? noise : (static_cast<u128>(cell) << (128 - set_level)) | (noise >> set_level);
    double re = 0.0, im = 0.0;
    for (int j = 1; j <= m_terms; ++j) {
      const auto frac = static_cast<std::uint64_t>((x << j) >> 64);
      const double phase = 2.0 * std::numbers::pi * std::ldexp(static_cast<double>(frac >> 11), -53);
      re += std::cos(phase);
      im += std::sin(phase);
    }
    acc += std::hypot(re, im);
  }
  return acc;
}

}  // namespace

std::uint64_t bit_reverse(std::uint64_t x, int bits) {
  std::uint64_t r = 0;
  for (int b = 0; b < bits; ++b) {
    r = (r << 1) | (x & 1);
    x >>= 1;
  }
  return r;
}

std::vector<cd> apply_hilbert_multiplier(const std::vector<cd>& coeffs, int level, std::int64_t n) {
  std::vector<cd> out(coeffs.size());
  for (std::size_t s = 0; s < coeffs.size(); ++s) {
    const std::int64_t m = slot_frequency(s, level);
    if (m > n) {
      out[s] = cd(coeffs[s].imag(), -coeffs[s].real());  // -i c
    } else if (m < n) {
      out[s] = cd(-coeffs[s].imag(), coeffs[s].real());  // +i c
    }
  }
  return out;
}

std::vector<double> walsh_coefficients(const std::vector<double>& f, int level) {
  const std::size_t n = std::size_t{1} << level;
  if (f.size() != n) throw std::invalid_argument("walsh_coefficients: size must be 2^L");
  std::vector<double> g(n);
  for (std::size_t t = 0; t < n; ++t) g[bit_reverse(t, level)] = f[t];
  serial::fwht(g);
  const double inv = std::ldexp(1.0, -level);
  for (auto& v : g) v *= inv;
  return g;
}

std::vector<double> walsh_truncated_synthesis(const std::vector<double>& coeffs, int level, std::int64_t n) {
  const std::size_t size = std::size_t{1} << level;
  std::vector<double> a(size, 0.0);
  const auto keep = static_cast<std::size_t>(std::clamp<std::int64_t>(n + 1, 0, static_cast<std::int64_t>(size)));
  std::copy(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(keep), a.begin());
  serial::fwht(a);
  std::vector<double> out(size);
  for (std::size_t t = 0; t < size; ++t) out[t] = a[bit_reverse(t, level)];
  return out;
}

namespace serial {

SupChoice hilbert_sup(const std::vector<cd>& coeffs, int level, std::span<const std::int64_t> freqs) {
  if (freqs.empty()) throw std::invalid_argument("hilbert_sup: empty frequency list");
  SupChoice acc{std::vector<double>(coeffs.size(), 0.0), std::vector<int>(coeffs.size(), 0)};
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    fold(acc, modulus_row(coeffs, level, freqs[j]), static_cast<int>(j), 0, coeffs.size());
  }
  return acc;
}

void fwht(std::vector<double>& a) {
  const std::size_t n = a.size();
  if (!std::has_single_bit(n)) throw std::invalid_argument("fwht: size must be a power of two");
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t k = i; k < i + h; ++k) {
        const double x = a[k];
        const double y = a[k + h];
        a[k] = x + y;
        a[k + h] = x - y;
      }
    }
  }
}

SupChoice walsh_sup(const std::vector<double>& f, int level, std::span<const std::int64_t> ns) {
  if (ns.empty()) throw std::invalid_argument("walsh_sup: empty frequency list");
  const auto coeffs = walsh_coefficients(f, level);
  SupChoice acc{std::vector<double>(f.size(), 0.0), std::vector<int>(f.size(), 0)};
  for (std::size_t j = 0; j < ns.size(); ++j) fold(acc, walsh_row(coeffs, level, ns[j]), static_cast<int>(j), 0, f.size());
  return acc;
}

ZygmundSample zygmund_sum(std::span<const std::int64_t> cells, int set_level, int m_terms, std::uint64_t samples,
                          std::uint64_t seed) {
  if (cells.empty()) return {};
  double total = 0.0;
  for (std::uint64_t b = 0; b * kZygmundBlock < samples; ++b) {
    total += zygmund_block(cells, set_level, m_terms, b * kZygmundBlock, std::min(samples, (b + 1) * kZygmundBlock), seed);
  }
  return {total, samples};
}

}  // namespace serial

namespace parallel {

// Rows for a batch of j in parallel, folded in j order; memory stays at one row per thread.
template <class RowFn>
SupChoice batched_sup(std::size_t size, std::size_t count, RowFn row_of) {
  SupChoice acc{std::vector<double>(size, 0.0), std::vector<int>(size, 0)};
  const auto batch = static_cast<std::size_t>(std::max(1, omp_get_max_threads()));
  std::vector<std::vector<double>> rows(batch);
  for (std::size_t first = 0; first < count; first += batch) {
    const auto width = static_cast<std::ptrdiff_t>(std::min(batch, count - first));
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t r = 0; r < width; ++r) rows[static_cast<std::size_t>(r)] = row_of(first + static_cast<std::size_t>(r));
    const auto n = static_cast<std::ptrdiff_t>(size);
    const std::ptrdiff_t chunk = 4096;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < (n + chunk - 1) / chunk; ++c) {
      const auto begin = static_cast<std::size_t>(c * chunk);
      const auto end = static_cast<std::size_t>(std::min(n, (c + 1) * chunk));
      for (std::ptrdiff_t r = 0; r < width; ++r) {
        fold(acc, rows[static_cast<std::size_t>(r)], static_cast<int>(first) + static_cast<int>(r), begin, end);
      }
    }
  }
  return acc;
}

SupChoice hilbert_sup(const std::vector<cd>& coeffs, int level, std::span<const std::int64_t> freqs) {
  if (freqs.empty()) throw std::invalid_argument("hilbert_sup: empty frequency list");
  return batched_sup(coeffs.size(), freqs.size(), [&](std::size_t j) { return modulus_row(coeffs, level, freqs[j]); });
}

void fwht(std::vector<double>& a) {
  const std::size_t n = a.size();
  if (!std::has_single_bit(n)) throw std::invalid_argument("fwht: size must be a power of two");
  for (std::size_t h = 1; h < n; h <<= 1) {
    const auto blocks = static_cast<std::ptrdiff_t>(n / (2 * h));
#pragma omp parallel for schedule(static) if (n >= 8192)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
      const std::size_t i = static_cast<std::size_t>(b) * 2 * h;
      for (std::size_t k = i; k < i + h; ++k) {
        const double x = a[k];
        const double y = a[k + h];
        a[k] = x + y;
        a[k + h] = x - y;
      }
    }
  }
}

SupChoice walsh_sup(const std::vector<double>& f, int level, std::span<const std::int64_t> ns) {
  if (ns.empty()) throw std::invalid_argument("walsh_sup: empty frequency list");
  const auto coeffs = walsh_coefficients(f, level);
  return batched_sup(f.size(), ns.size(), [&](std::size_t j) { return walsh_row(coeffs, level, ns[j]); });
}

ZygmundSample zygmund_sum(std::span<const std::int64_t> cells, int set_level, int m_terms, std::uint64_t samples,
                          std::uint64_t seed) {
  if (cells.empty()) return {};
  const auto blocks = static_cast<std::ptrdiff_t>((samples + kZygmundBlock - 1) / kZygmundBlock);
  std::vector<double> partial(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const auto ub = static_cast<std::uint64_t>(b);
    partial[static_cast<std::size_t>(b)] =
        zygmund_block(cells, set_level, m_terms, ub * kZygmundBlock, std::min(samples, (ub + 1) * kZygmundBlock), seed);
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return {total, samples};
}

}  // namespace parallel
}  // namespace tilelab::kernels
