#include "tilelab/carleson.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tilelab/kernels.hpp"

namespace tilelab {
namespace {

using i128 = __int128;

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

bool cbar_holds(const std::vector<std::int64_t>& terms, const Rational& cbar) {
  i128 partial = 0;
  for (std::size_t k = 0; k + 1 < terms.size(); ++k) {
    partial += terms[k];
    if (!(partial * cbar.den < static_cast<i128>(cbar.num) * terms[k + 1])) return false;
  }
  return true;
}

struct TileGeometry {
  int level;
  std::int64_t cells;  // grid cells per I_P
  std::int64_t first;  // first grid cell of I_P
  std::vector<double> weights;  // 2^-L psi_k(d 2^-L) for d = -8h..8h, index d + 8h
};

TileGeometry geometry(const Tile& p, int grid_level, const KernelFamily& kern) {
  const int k = p.scale();
  if (k < kMinOperatorLevel) throw std::invalid_argument("tile operator needs |I_P| <= 2^-5");
  if (k > grid_level) throw std::invalid_argument("tile finer than the grid");
  TileGeometry g{grid_level, std::int64_t{1} << (grid_level - k), p.interval().index << (grid_level - k), {}};
  const std::int64_t h = g.cells;
  g.weights.assign(static_cast<std::size_t>(16 * h + 1), 0.0);
  const double scale = std::ldexp(1.0, k - grid_level);
  for (std::int64_t d = -8 * h; d <= 8 * h; ++d) {
    const double u = static_cast<double>(d) / static_cast<double>(h);
    g.weights[static_cast<std::size_t>(d + 8 * h)] = scale * kern.psi(u);
  }
  return g;
}

cd phase(std::int64_t n, std::int64_t s, int level, double sign) {
  const std::int64_t mask = (std::int64_t{1} << level) - 1;
  const auto r = static_cast<std::int64_t>((static_cast<i128>(n) * s) & mask);
  return std::polar(1.0, sign * 2.0 * std::numbers::pi * std::ldexp(static_cast<double>(r), -level));
}

std::vector<char> e_mask(const Tile& p, const Linearizer& nfun, const TileGeometry& g) {
  std::vector<char> mask(static_cast<std::size_t>(g.cells), 0);
  for (std::int64_t i = 0; i < g.cells; ++i) {
    mask[static_cast<std::size_t>(i)] = p.omega().contains(nfun.value(static_cast<std::size_t>(g.first + i))) ? 1 : 0;
  }
  return mask;
}

// e^{2 pi i n d 2^-L} for d = -8h..8h, one table per distinct frequency met on E(P).
struct Twiddles {
  std::vector<std::int64_t> freqs;
  std::vector<std::vector<cd>> tables;
  std::vector<int> slot;  // per cell of I_P, index into tables (-1 off E(P))
};

Twiddles twiddles(const std::vector<char>& mask, const Linearizer& nfun, const TileGeometry& g) {
  Twiddles tw;
  tw.slot.assign(mask.size(), -1);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) tw.freqs.push_back(nfun.value(static_cast<std::size_t>(g.first) + i));
  }
  std::sort(tw.freqs.begin(), tw.freqs.end());
  tw.freqs.erase(std::unique(tw.freqs.begin(), tw.freqs.end()), tw.freqs.end());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const auto n = nfun.value(static_cast<std::size_t>(g.first) + i);
    tw.slot[i] = static_cast<int>(std::lower_bound(tw.freqs.begin(), tw.freqs.end(), n) - tw.freqs.begin());
  }
  const std::int64_t h = g.cells;
  tw.tables.resize(tw.freqs.size());
  for (std::size_t j = 0; j < tw.freqs.size(); ++j) {
    auto& table = tw.tables[j];
    table.resize(static_cast<std::size_t>(16 * h + 1));
    for (std::int64_t d = -8 * h; d <= 8 * h; ++d) table[static_cast<std::size_t>(d + 8 * h)] = phase(tw.freqs[j], d, g.level, 1.0);
  }
  return tw;
}

}  // namespace

LacunarySequence::LacunarySequence(std::vector<std::int64_t> terms, Rational alpha, Rational cbar)
    : terms_(std::move(terms)), alpha_(alpha), cbar_(cbar) {
  if (terms_.empty()) throw std::invalid_argument("lacunary sequence must be nonempty");
  if (terms_.front() <= 0) throw std::invalid_argument("lacunary terms must be positive");
  for (std::size_t j = 1; j < terms_.size(); ++j) {
    if (terms_[j] <= terms_[j - 1]) throw std::invalid_argument("lacunary terms must increase");
  }
  if (!(alpha_ > Rational{1})) throw std::invalid_argument("lacunary ratio must exceed 1");
  if (!cbar_holds(terms_, cbar_)) throw std::invalid_argument("lacunary sequence violates the cBar condition");
}

LacunarySequence LacunarySequence::powers_of_two(int count) {
  std::vector<std::int64_t> t;
  for (int j = 1; j <= count; ++j) t.push_back(std::int64_t{1} << j);
  return {std::move(t), Rational{2}, Rational{1}};
}

LacunarySequence LacunarySequence::walsh_dyadic(int count) {
  std::vector<std::int64_t> t;
  for (int j = 1; j <= count; ++j) t.push_back((std::int64_t{1} << j) - 1);
  return {std::move(t), Rational{2}, Rational{1}};
}

LacunarySequence LacunarySequence::geometric(Rational alpha, int count) {
  if (!(alpha > Rational{1})) throw std::invalid_argument("lacunary ratio must exceed 1");
  std::vector<std::int64_t> t;
  i128 num = 1, den = 1;
  const i128 cap = static_cast<i128>(1) << 100;
  for (int j = 1; j <= count; ++j) {
    num *= alpha.num;
    den *= alpha.den;
    while (den > 1 && num % 2 == 0 && den % 2 == 0) {
      num /= 2;
      den /= 2;
    }
    if (num > cap || den > cap) throw std::overflow_error("geometric sequence exceeds range");
    const i128 v = (num + den - 1) / den;
    if (v > static_cast<i128>(std::int64_t{1} << 62)) throw std::overflow_error("geometric sequence exceeds range");
    if (t.empty() || t.back() < v) t.push_back(static_cast<std::int64_t>(v));
  }
  double worst = 0.0;
  double partial = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    partial += static_cast<double>(t[k]);
    worst = std::max(worst, partial / static_cast<double>(t[k + 1]));
  }
  auto milli = static_cast<std::int64_t>(std::floor(worst * 1000.0)) + 1;
  while (!cbar_holds(t, Rational{milli, 1000})) ++milli;
  return {std::move(t), alpha, Rational{milli, 1000}};
}

LacunarySequence LacunarySequence::truncated(std::int64_t limit) const {
  std::vector<std::int64_t> t;
  for (auto n : terms_) {
    if (n < limit) t.push_back(n);
  }
  if (t.empty()) throw std::invalid_argument("no lacunary term below the band limit");
  return {std::move(t), alpha_, cbar_};
}

KernelFamily::KernelFamily(double taper_width) : taper_(taper_width) {}

double KernelFamily::theta(double y) const { return smooth_step((8.0 - std::abs(y)) / taper_); }

double KernelFamily::psi(double y) const {
  const double a = std::abs(y);
  if (a <= 2.0 || a >= 8.0) return 0.0;
  return (theta(y) - theta(2.0 * y)) / y;
}

double KernelFamily::psi_k(int k, double y) const { return std::ldexp(psi(std::ldexp(y, k)), k); }

double KernelFamily::partial_reconstruction(int big_k, double y) const {
  double s = 0.0;
  for (int k = 0; k <= big_k; ++k) s += psi_k(k, y);
  return s;
}

double kernel_reconstruction_error(const KernelFamily& kern, int big_k, int samples) {
  double worst = 0.0;
  const double lo = std::log2(std::ldexp(1.0, -10));
  for (int i = 0; i < samples; ++i) {
    const double y = std::exp2(lo + (0.0 - lo) * static_cast<double>(i) / static_cast<double>(samples));
    for (double v : {y, -y}) {
      const double err = std::abs(kern.partial_reconstruction(big_k, v) - 1.0 / v) * std::abs(v);
      worst = std::max(worst, err);
    }
  }
  return worst;
}

KernelFamily build_kernel(Rational taper_width) {
  const double w = taper_width.to_double();
  if (!(w > 0.0 && w <= 4.0)) throw std::invalid_argument("taper width must lie in (0, 4]");
  KernelFamily kern(w);
  if (kern.theta(4.0) != 1.0 || kern.theta(8.0) != 0.0) throw std::invalid_argument("taper breaks the cutoff profile");
  if (kernel_reconstruction_error(kern, 13, 4096) > 1e-8) throw std::invalid_argument("kernel reconstruction fails");
  for (int i = 1; i <= 100; ++i) {
    const double y = 0.08 * i;
    if (std::abs(kern.psi(y) + kern.psi(-y)) > 1e-14) throw std::invalid_argument("psi is not odd");
  }
  return kern;
}

GridFunction modulated_hilbert(const GridFunction& f, std::int64_t n) {
  const int level = f.level();
  if (n < GridFunction::band_lo(level) || n >= GridFunction::band_hi(level)) {
    throw std::invalid_argument("modulation frequency outside the band");
  }
  return GridFunction::from_coefficients(level, kernels::apply_hilbert_multiplier(f.coeffs(), level, n));
}

CarlesonResult carleson_evaluate(const GridFunction& f, const LacunarySequence& seq) {
  const auto band = seq.truncated(GridFunction::band_hi(f.level()));
  auto sc = kernels::parallel::hilbert_sup(f.coeffs(), f.level(), band.terms());
  return {std::move(sc.sup), Linearizer{f.level(), std::move(sc.choice), band.terms()}};
}

GridFunction carleson_sup(const GridFunction& f, const LacunarySequence& seq) {
  const auto r = carleson_evaluate(f, seq);
  return GridFunction::from_samples(f.level(), std::vector<cd>(r.sup.begin(), r.sup.end()));
}

Linearizer linearize(const GridFunction& f, const LacunarySequence& seq) { return carleson_evaluate(f, seq).linearizer; }

GridFunction linearized_operator(const GridFunction& f, const Linearizer& nfun) {
  const int level = f.level();
  if (nfun.grid_level != level) throw std::invalid_argument("grid mismatch");
  const std::size_t size = f.size();
  const auto count = static_cast<std::ptrdiff_t>(nfun.frequencies.size());
  std::vector<std::vector<cd>> rows(nfun.frequencies.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t j = 0; j < count; ++j) {
    rows[static_cast<std::size_t>(j)] =
        modulated_hilbert(f, nfun.frequencies[static_cast<std::size_t>(j)]).values();
  }
  std::vector<cd> out(size);
  for (std::size_t t = 0; t < size; ++t) out[t] = rows[static_cast<std::size_t>(nfun.choice[t])][t];
  return GridFunction::from_samples(level, std::move(out));
}

GridFunction linearized_adjoint(const GridFunction& g, const Linearizer& nfun) {
  const int level = g.level();
  if (nfun.grid_level != level) throw std::invalid_argument("grid mismatch");
  const std::size_t size = g.size();
  const auto count = static_cast<std::ptrdiff_t>(nfun.frequencies.size());
  std::vector<std::vector<cd>> rows(nfun.frequencies.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t j = 0; j < count; ++j) {
    std::vector<cd> piece(size);
    bool any = false;
    for (std::size_t t = 0; t < size; ++t) {
      if (nfun.choice[t] == j) {
        piece[t] = g.values()[t];
        any = true;
      }
    }
    if (!any) continue;
    // +i sgn(m - n) is minus the forward multiplier.
    const auto part = modulated_hilbert(GridFunction::from_samples(level, std::move(piece)),
                                        nfun.frequencies[static_cast<std::size_t>(j)]);
    auto& row = rows[static_cast<std::size_t>(j)];
    row.resize(size);
    for (std::size_t t = 0; t < size; ++t) row[t] = -part.values()[t];
  }
  std::vector<cd> out(size);
  for (const auto& row : rows) {
    if (row.empty()) continue;
    for (std::size_t t = 0; t < size; ++t) out[t] += row[t];
  }
  return GridFunction::from_samples(level, std::move(out));
}

DyadicSet e_of(const Tile& p, const Linearizer& nfun) {
  const int k = p.scale();
  if (k > nfun.grid_level) throw std::invalid_argument("tile finer than the linearizer grid");
  const std::int64_t h = std::int64_t{1} << (nfun.grid_level - k);
  std::vector<std::int64_t> cells;
  for (std::int64_t t = p.interval().index * h; t < (p.interval().index + 1) * h; ++t) {
    if (p.omega().contains(nfun.value(static_cast<std::size_t>(t)))) cells.push_back(t);
  }
  return {nfun.grid_level, std::move(cells)};
}

std::int64_t e_count(const Tile& p, const Linearizer& nfun) {
  const int k = p.scale();
  if (k > nfun.grid_level) throw std::invalid_argument("tile finer than the linearizer grid");
  const std::int64_t h = std::int64_t{1} << (nfun.grid_level - k);
  std::int64_t n = 0;
  for (std::int64_t t = p.interval().index * h; t < (p.interval().index + 1) * h; ++t) {
    n += p.omega().contains(nfun.value(static_cast<std::size_t>(t))) ? 1 : 0;
  }
  return n;
}

GridFunction tile_operator(const Tile& p, const GridFunction& f, const Linearizer& nfun, const KernelFamily& kern) {
  const int level = f.level();
  if (nfun.grid_level != level) throw std::invalid_argument("grid mismatch");
  const auto g = geometry(p, level, kern);
  const auto mask = e_mask(p, nfun, g);
  const auto tw = twiddles(mask, nfun, g);
  const std::int64_t size = std::int64_t{1} << level;
  const std::int64_t h = g.cells;
  std::vector<cd> out(static_cast<std::size_t>(size));
  const auto& fv = f.values();
  // e^{-2 pi i n s} = e^{-2 pi i n t} e^{2 pi i n d} with s = t - d.
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < h; ++i) {
    const int slot = tw.slot[static_cast<std::size_t>(i)];
    if (slot < 0) continue;
    const auto& table = tw.tables[static_cast<std::size_t>(slot)];
    const std::int64_t t = g.first + i;
    cd acc{};
    for (std::int64_t d = -8 * h + 1; d < 8 * h; ++d) {
      const double w = g.weights[static_cast<std::size_t>(d + 8 * h)];
      if (w == 0.0) continue;
      const std::int64_t s = ((t - d) % size + size) % size;
      acc += w * table[static_cast<std::size_t>(d + 8 * h)] * fv[static_cast<std::size_t>(s)];
    }
    out[static_cast<std::size_t>(t)] = phase(tw.freqs[static_cast<std::size_t>(slot)], t, level, -1.0) * acc;
  }
  return GridFunction::from_samples(level, std::move(out));
}

GridFunction tile_adjoint(const Tile& p, const GridFunction& gfun, const Linearizer& nfun, const KernelFamily& kern) {
  const int level = gfun.level();
  if (nfun.grid_level != level) throw std::invalid_argument("grid mismatch");
  const auto g = geometry(p, level, kern);
  const auto mask = e_mask(p, nfun, g);
  const auto tw = twiddles(mask, nfun, g);
  const std::int64_t size = std::int64_t{1} << level;
  const std::int64_t h = g.cells;
  const auto& gv = gfun.values();
  // e^{2 pi i n s} g(t) = [e^{2 pi i n t} g(t)] conj(e^{2 pi i n d}) with d = t - s.
  std::vector<cd> lifted(static_cast<std::size_t>(h));
  for (std::int64_t i = 0; i < h; ++i) {
    const int slot = tw.slot[static_cast<std::size_t>(i)];
    if (slot < 0) continue;
    const std::int64_t t = g.first + i;
    lifted[static_cast<std::size_t>(i)] =
        phase(tw.freqs[static_cast<std::size_t>(slot)], t, level, 1.0) * gv[static_cast<std::size_t>(t % size)];
  }
  std::vector<cd> out(static_cast<std::size_t>(size));
  // Gather over s in the adjoint support: s = t - d with t in I_P.
#pragma omp parallel for schedule(static)
  for (std::int64_t off = -8 * h; off < 9 * h; ++off) {
    const std::int64_t s = ((g.first + off) % size + size) % size;
    cd acc{};
    const std::int64_t i_lo = std::max<std::int64_t>(0, off - 8 * h + 1);
    const std::int64_t i_hi = std::min<std::int64_t>(h, off + 8 * h);
    for (std::int64_t i = i_lo; i < i_hi; ++i) {
      const int slot = tw.slot[static_cast<std::size_t>(i)];
      if (slot < 0) continue;
      const std::int64_t d = i - off;  // t - s
      const double w = g.weights[static_cast<std::size_t>(d + 8 * h)];
      if (w == 0.0) continue;
      acc += w * std::conj(tw.tables[static_cast<std::size_t>(slot)][static_cast<std::size_t>(d + 8 * h)]) *
             lifted[static_cast<std::size_t>(i)];
    }
    out[static_cast<std::size_t>(s)] = acc;
  }
  return GridFunction::from_samples(level, std::move(out));
}

GridFunction tree_operator(std::span<const Tile> tree, const GridFunction& f, const Linearizer& nfun,
                           const KernelFamily& kern) {
  std::vector<cd> acc(f.size());
  for (const auto& p : tree) {
    const auto part = tile_operator(p, f, nfun, kern);
    for (std::size_t t = 0; t < acc.size(); ++t) acc[t] += part.values()[t];
  }
  return GridFunction::from_samples(f.level(), std::move(acc));
}

GridFunction tree_adjoint(std::span<const Tile> tree, const GridFunction& g, const Linearizer& nfun,
                          const KernelFamily& kern) {
  std::vector<cd> acc(g.size());
  for (const auto& p : tree) {
    const auto part = tile_adjoint(p, g, nfun, kern);
    for (std::size_t t = 0; t < acc.size(); ++t) acc[t] += part.values()[t];
  }
  return GridFunction::from_samples(g.level(), std::move(acc));
}

std::vector<double> walsh_partial_sum(const std::vector<double>& f, int level, std::int64_t n) {
  if (n < 0 || n >= (std::int64_t{1} << level)) throw std::invalid_argument("walsh index outside [0, 2^L)");
  return kernels::walsh_truncated_synthesis(kernels::walsh_coefficients(f, level), level, n);
}

std::vector<double> walsh_carleson(const std::vector<double>& f, int level, const LacunarySequence& seq) {
  return kernels::parallel::walsh_sup(f, level, seq.truncated(std::int64_t{1} << level).terms()).sup;
}

}  // namespace tilelab
