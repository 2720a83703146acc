#pragma once

// Hot loops shared by the operator experiments. Each kernel has a serial
// reference and an OpenMP version; both produce bit-identical results for any
// thread count (reductions run in a fixed order).

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace tilelab::kernels {

using cd = std::complex<double>;

struct SupChoice {
  std::vector<double> sup;
  /// Index into the frequency list of the smallest j attaining the sup.
  std::vector<int> choice;
};

/// Relative slack under which two candidate moduli count as tied.
inline constexpr double kTieTolerance = 1e-12;

struct ZygmundSample {
  double sum_abs = 0.0;
  std::uint64_t count = 0;
};

namespace serial {

/// sup_j |H_{n_j} f| with H_n the multiplier -i sgn(m - n); `coeffs` in FFT slot order.
SupChoice hilbert_sup(const std::vector<cd>& coeffs, int level, std::span<const std::int64_t> freqs);

/// In-place unnormalized Walsh-Hadamard transform (natural order); size a power of two.
void fwht(std::vector<double>& a);

/// sup_j |W_{n_j} f| for a real grid function in Paley order.
SupChoice walsh_sup(const std::vector<double>& f, int level, std::span<const std::int64_t> ns);

/// Monte Carlo mean of |sum_{j=1}^M e^{2 pi i 2^j x}| over x uniform in F, F a union
/// of level-`set_level` cells. Phases are exact: x is a 128-bit binary fraction.
ZygmundSample zygmund_sum(std::span<const std::int64_t> cells, int set_level, int m_terms,
                          std::uint64_t samples, std::uint64_t seed);

}  // namespace serial

namespace parallel {

SupChoice hilbert_sup(const std::vector<cd>& coeffs, int level, std::span<const std::int64_t> freqs);
void fwht(std::vector<double>& a);
SupChoice walsh_sup(const std::vector<double>& f, int level, std::span<const std::int64_t> ns);
ZygmundSample zygmund_sum(std::span<const std::int64_t> cells, int set_level, int m_terms,
                          std::uint64_t samples, std::uint64_t seed);

}  // namespace parallel

/// Bit reversal of the low `bits` bits.
std::uint64_t bit_reverse(std::uint64_t x, int bits);

/// -i sgn(m - n) applied to coefficients in FFT slot order.
std::vector<cd> apply_hilbert_multiplier(const std::vector<cd>& coeffs, int level, std::int64_t n);

/// Paley-order Walsh coefficients: a_k = 2^-L sum_t f(t) w_k(t).
std::vector<double> walsh_coefficients(const std::vector<double>& f, int level);

/// Synthesis of the first n+1 Paley coefficients back on the grid.
std::vector<double> walsh_truncated_synthesis(const std::vector<double>& coeffs, int level, std::int64_t n);

}  // namespace tilelab::kernels
