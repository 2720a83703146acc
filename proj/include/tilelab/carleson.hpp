#pragma once

// Discretized lacunary Carleson operator: kernel decomposition, modulated
// conjugate-function multipliers, the linearizer N(x), tile operators and the
// Walsh analogue.

#include <cstdint>
#include <span>
#include <vector>

#include "tilelab/dyadic.hpp"
#include "tilelab/setmodel.hpp"

namespace tilelab {

/// Increasing positive integers n_1 < n_2 < ... with sum_{j<=k} n_j < cBar n_{k+1}.
class LacunarySequence {
 public:
  /// Throws std::invalid_argument when the terms are not increasing and
  /// positive or the cBar condition fails.
  LacunarySequence(std::vector<std::int64_t> terms, Rational alpha, Rational cbar);

  /// n_j = 2^j for j = 1..count.
  static LacunarySequence powers_of_two(int count);
  /// n_j = 2^j - 1 for j = 1..count.
  static LacunarySequence walsh_dyadic(int count);
  /// n_j = ceil(alpha^j) for j = 1..count (deduplicated); cBar is the smallest
  /// admissible value rounded up to a multiple of 1/1000.
  static LacunarySequence geometric(Rational alpha, int count);

  const std::vector<std::int64_t>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  std::int64_t operator[](std::size_t j) const { return terms_[j]; }
  const Rational& alpha() const { return alpha_; }
  const Rational& cbar() const { return cbar_; }

  /// Terms strictly below `limit`.
  LacunarySequence truncated(std::int64_t limit) const;

 private:
  std::vector<std::int64_t> terms_;
  Rational alpha_;
  Rational cbar_;
};

/// theta(y) = h((8 - |y|) / w) with the smooth step h; psi(y) = (theta(y) - theta(2y)) / y.
class KernelFamily {
 public:
  explicit KernelFamily(double taper_width);
  double taper_width() const { return taper_; }
  double theta(double y) const;
  double psi(double y) const;
  /// psi_k(y) = 2^k psi(2^k y)
  double psi_k(int k, double y) const;
  /// sum_{k=0}^{K} psi_k(y)
  double partial_reconstruction(int big_k, double y) const;

 private:
  double taper_;
};

/// Validates the taper (0 < w <= 4) and the reconstruction identity; throws
/// std::invalid_argument otherwise.
KernelFamily build_kernel(Rational taper_width = Rational{4});

/// Max over 2^-10 <= |y| < 1 (on a fixed sample grid) of |sum_{k<=K} psi_k(y) - 1/y| |y|.
double kernel_reconstruction_error(const KernelFamily& kern, int big_k, int samples);

/// Multiplier m -> -i sgn(m - n) with sgn(0) = 0; n must lie in the band.
GridFunction modulated_hilbert(const GridFunction& f, std::int64_t n);

/// N(x) as an index into a frequency list, per grid point.
struct Linearizer {
  int grid_level = 0;
  std::vector<int> choice;
  std::vector<std::int64_t> frequencies;

  std::int64_t value(std::size_t t) const { return frequencies[static_cast<std::size_t>(choice[t])]; }
};

struct CarlesonResult {
  std::vector<double> sup;
  Linearizer linearizer;
};

/// sup_j |H_{n_j} f| with the sequence truncated to the band of f.
CarlesonResult carleson_evaluate(const GridFunction& f, const LacunarySequence& seq);
GridFunction carleson_sup(const GridFunction& f, const LacunarySequence& seq);
/// Smallest j attaining the sup (ties within a relative 1e-12).
Linearizer linearize(const GridFunction& f, const LacunarySequence& seq);

/// T f(x) = H_{N(x)} f(x) for a fixed linearizer on the grid of f.
GridFunction linearized_operator(const GridFunction& f, const Linearizer& nfun);
/// Adjoint of linearized_operator for <u, v> = sum u conj(v):
/// sum_j H_{n_j}^*(χ_{N = n_j} g), where H_n^* has the multiplier +i sgn(m - n).
GridFunction linearized_adjoint(const GridFunction& g, const Linearizer& nfun);

/// E(P) = {x in I_P : N(x) in omega_P} as a set at the linearizer's grid level.
DyadicSet e_of(const Tile& p, const Linearizer& nfun);
/// |E(P)| in grid cells.
std::int64_t e_count(const Tile& p, const Linearizer& nfun);

/// T_P f on the grid by the rectangle rule, masked by E(P).
GridFunction tile_operator(const Tile& p, const GridFunction& f, const Linearizer& nfun, const KernelFamily& kern);
/// The grid adjoint of tile_operator.
GridFunction tile_adjoint(const Tile& p, const GridFunction& g, const Linearizer& nfun, const KernelFamily& kern);
/// sum_{P in tree} T_P f and sum T_P^* g.
GridFunction tree_operator(std::span<const Tile> tree, const GridFunction& f, const Linearizer& nfun,
                           const KernelFamily& kern);
GridFunction tree_adjoint(std::span<const Tile> tree, const GridFunction& g, const Linearizer& nfun,
                          const KernelFamily& kern);

/// W_n f = sum_{k<=n} <f, w_k> w_k in Paley order.
std::vector<double> walsh_partial_sum(const std::vector<double>& f, int level, std::int64_t n);
/// sup_j |W_{n_j} f| (terms beyond 2^L - 1 are dropped).
std::vector<double> walsh_carleson(const std::vector<double>& f, int level, const LacunarySequence& seq);

}  // namespace tilelab
