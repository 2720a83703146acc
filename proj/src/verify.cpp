#include "tilelab/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "tilelab/kernels.hpp"
#include "tilelab/tfr.hpp"

#ifndef TILELAB_DEFAULT_GOLDEN
#define TILELAB_DEFAULT_GOLDEN "data/golden_bands.json"
#endif

namespace tilelab {
namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ms(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, long long a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int uniform_int(Rng& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

double mean_abs(const std::vector<cd>& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::abs(x);
  return s / static_cast<double>(v.size());
}

// F = [1/2 - 2^-N, 1/2) written at level N.
DyadicSet left_of_half(int big_n) {
  const std::int64_t half = std::int64_t{1} << (big_n - 1);
  return interval_set(big_n, half - 1, half);
}

GridFunction unimodular(Rng& rng, int level, int block_level, int kind) {
  std::vector<cd> v(std::size_t{1} << level);
  const std::size_t w = std::size_t{1} << (level - block_level);
  for (std::size_t start = 0; start < v.size(); start += w) {
    cd value{1.0, 0.0};
    if (kind == 1) value = coin(rng) ? 1.0 : -1.0;
    if (kind == 2) value = std::polar(1.0, 2.0 * 3.14159265358979323846 * uniform01(rng));
    std::fill(v.begin() + static_cast<std::ptrdiff_t>(start), v.begin() + static_cast<std::ptrdiff_t>(start + w), value);
  }
  return GridFunction::from_samples(level, std::move(v));
}

// Ancestor-closed random subtree of intervals below `top` down to `finest`.
std::vector<DyadicInterval> random_subtree(Rng& rng, const DyadicInterval& top, int finest, double keep) {
  std::vector<DyadicInterval> out{top};
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].level >= finest) continue;
    for (int c = 0; c < 2; ++c) {
      if (uniform01(rng) < keep) out.push_back(out[i].child(c));
    }
  }
  return out;
}

// A frequency in the band outside omega.
std::int64_t frequency_outside(const FrequencyInterval& omega, int level) {
  if (omega.lo() - 1 >= GridFunction::band_lo(level)) return omega.lo() - 1;
  if (omega.hi() < GridFunction::band_hi(level)) return omega.hi();
  throw std::invalid_argument("frequency interval covers the band");
}

// Linearizer equal to xi on a run of `count(cell)` grid points inside each
// `cell_level` cell of `top`, and to a frequency off the tree elsewhere.
template <class Count>
Linearizer two_valued_linearizer(Rng& rng, int level, const DyadicInterval& top, int cell_level, std::int64_t xi,
                                 std::int64_t far, Count count) {
  Linearizer nfun{level, std::vector<int>(std::size_t{1} << level, 1), {xi, far}};
  const std::int64_t h = std::int64_t{1} << (level - cell_level);
  const std::int64_t first = top.index << (cell_level - top.level);
  for (std::int64_t c = first; c < first + (std::int64_t{1} << (cell_level - top.level)); ++c) {
    const std::int64_t run = count(h);
    const std::int64_t start = static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(h - run + 1)));
    for (std::int64_t t = c * h + start; t < c * h + start + run; ++t) nfun.choice[static_cast<std::size_t>(t)] = 0;
  }
  return nfun;
}

// Closed Ĩ as an integer arc [lo, lo + 17 2^(units-k)] modulo 2^units.
struct ClosedArc {
  std::int64_t lo;
  std::int64_t len;
};

ClosedArc closed_arc(const DyadicInterval& iv, int units) {
  const std::int64_t scale = std::int64_t{1} << (units - iv.level);
  const std::int64_t mod = std::int64_t{1} << units;
  return {(((iv.index - 8) * scale) % mod + mod) % mod, 17 * scale};
}

bool in_arc(std::int64_t p, const ClosedArc& a, std::int64_t mod) { return ((p - a.lo) % mod + mod) % mod <= a.len; }

}  // namespace

// ---------------------------------------------------------------- report/golden

void ExperimentReport::finalize() {
  pass = std::all_of(ratios.begin(), ratios.end(), [](const RatioPoint& r) { return r.pass(); });
}

std::pair<double, double> ExperimentReport::range(const std::string& prefix) const {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& r : ratios) {
    if (r.point.rfind(prefix, 0) != 0) continue;
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  return {lo, hi};
}

GoldenBands GoldenBands::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open golden band file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed golden band file " + path + ": " + e.what());
  }
  if (!j.contains("bands") || !j["bands"].is_object()) throw std::runtime_error("golden band file lacks \"bands\"");
  std::map<std::string, Band> bands;
  for (const auto& [key, value] : j["bands"].items()) {
    if (!value.contains("lo") || !value.contains("hi")) throw std::runtime_error("band " + key + " lacks lo/hi");
    Band b{value["lo"].get<double>(), value["hi"].get<double>()};
    if (!(b.lo <= b.hi)) throw std::runtime_error("band " + key + " has lo > hi");
    bands[key] = b;
  }
  return GoldenBands(std::move(bands));
}

std::string GoldenBands::default_path() {
  if (const char* env = std::getenv("TILELAB_GOLDEN"); env != nullptr && *env != '\0') return env;
  return TILELAB_DEFAULT_GOLDEN;
}

Band GoldenBands::at(const std::string& key) const {
  const auto it = bands_.find(key);
  if (it == bands_.end()) throw std::out_of_range("no golden band named " + key);
  return it->second;
}

// ---------------------------------------------------------------------- helpers

double llog_denominator(double measure) { return measure * std::log2(4.0 / measure); }

double llogl_norm(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  std::map<int, std::int64_t> layers;
  for (double v : values) {
    const double a = std::abs(v);
    if (a == 0.0) continue;
    ++layers[std::ilogb(a)];
  }
  const double cell = 1.0 / static_cast<double>(values.size());
  double total = 0.0;
  for (const auto& [l, count] : layers) {
    const double m = static_cast<double>(count) * cell;
    total += std::ldexp(m, l) * std::log2(4.0 / m);
  }
  return total;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ------------------------------------------------------------------ lower bound

ExperimentReport lower_bound_experiment(const LowerBoundParams& params, const LacunarySequence& seq,
                                        const Band& band) {
  const auto start = Clock::now();
  if (params.n_min < 1 || params.n_min > params.n_max) throw std::invalid_argument("empty N range");
  if (params.n_max > params.grid_level - 4) throw std::invalid_argument("grid too small: need N <= L - 4");
  ExperimentReport rep;
  rep.name = "lower_bound";
  rep.band = band;
  rep.param("grid_level", std::to_string(params.grid_level));
  rep.param("N", std::to_string(params.n_min) + ".." + std::to_string(params.n_max));
  rep.param("sequence_terms", std::to_string(seq.size()));
  double lo = INFINITY, hi = 0.0;
  for (int n = params.n_min; n <= params.n_max; ++n) {
    const auto f = left_of_half(n);
    const auto sup = carleson_evaluate(indicator(f, params.grid_level), seq).sup;
    const double l1 = std::accumulate(sup.begin(), sup.end(), 0.0) / static_cast<double>(sup.size());
    const double r = l1 / llog_denominator(std::ldexp(1.0, -n));
    rep.add(fmt("N=%lld", n), r);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  rep.add("spread", lo > 0 ? hi / lo : INFINITY, Band{1.0, kSpreadLimit});
  rep.finalize();
  rep.runtime_ms = elapsed_ms(start);
  return rep;
}

double hilbert_lower_ratio(int grid_level, int big_n) {
  if (big_n > grid_level - 4) throw std::invalid_argument("grid too small: need N <= L - 4");
  const auto h = modulated_hilbert(indicator(left_of_half(big_n), grid_level), 0);
  return mean_abs(h.values()) / llog_denominator(std::ldexp(1.0, -big_n));
}

// ------------------------------------------------------------------ upper bound

double adjoint_ratio(const DyadicSet& f, const GridFunction& g, const Linearizer& nfun) {
  const auto c = linearized_adjoint(g, nfun);
  const auto chi = indicator_samples(f, g.level());
  double s = 0.0;
  for (std::size_t t = 0; t < chi.size(); ++t) {
    if (chi[t] != 0.0) s += std::abs(c.values()[t]);
  }
  return s / static_cast<double>(chi.size()) / llog_denominator(f.measure().to_double());
}

UpperTrial upper_bound_trial(const UpperBoundParams& params, const LacunarySequence& seq, int trial) {
  const int level = params.grid_level;
  Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(trial)));
  const int e = uniform_int(rng, params.measure_exp_min, params.measure_exp_max);
  const auto f = random_set(rng, level, e);
  const auto freqs = seq.truncated(GridFunction::band_hi(level)).terms();
  UpperTrial out;
  out.measure = f.measure().to_double();
  if (trial % 2 == 0) {
    out.mode = UpperMode::random;
    const auto nfun = random_linearizer(rng, level, freqs, uniform_int(rng, 2, level - 2));
    const auto g = unimodular(rng, level, uniform_int(rng, 2, level), uniform_int(rng, 1, 2));
    out.ratio = adjoint_ratio(f, g, nfun);
  } else {
    out.mode = UpperMode::adversarial;
    const auto chi = indicator_samples(f, level);
    const auto u = GridFunction::from_samples(level, std::vector<cd>(chi.begin(), chi.end()));
    const auto nfun = carleson_evaluate(u, seq).linearizer;
    const auto tu = linearized_operator(u, nfun);
    std::vector<cd> phase(tu.size());
    for (std::size_t t = 0; t < phase.size(); ++t) {
      const double a = std::abs(tu.values()[t]);
      phase[t] = a > 0 ? tu.values()[t] / a : cd{1.0, 0.0};
    }
    out.ratio = adjoint_ratio(f, GridFunction::from_samples(level, std::move(phase)), nfun);
  }
  return out;
}

ExperimentReport upper_bound_experiment(const UpperBoundParams& params, const LacunarySequence& seq,
                                        const Band& band) {
  const auto start = Clock::now();
  ExperimentReport rep;
  rep.name = "upper_bound";
  rep.band = band;
  rep.param("trials", std::to_string(params.trials));
  rep.param("grid_level", std::to_string(params.grid_level));
  rep.param("seed", std::to_string(params.seed));
  rep.param("measure_exp", std::to_string(params.measure_exp_min) + ".." + std::to_string(params.measure_exp_max));
  double smallest = 1.0, largest = 0.0;
  for (int t = 0; t < params.trials; ++t) {
    const auto r = upper_bound_trial(params, seq, t);
    const char* mode = r.mode == UpperMode::random ? "random" : "adversarial";
    rep.add(fmt("trial=%lld", t) + " mode=" + mode + " |F|=" + num(r.measure), r.ratio);
    smallest = std::min(smallest, r.measure);
    largest = std::max(largest, r.measure);
  }
  rep.stat("measure_min", smallest);
  rep.stat("measure_max", largest);
  rep.finalize();
  rep.runtime_ms = elapsed_ms(start);
  return rep;
}

// ---------------------------------------------------------------------- Zygmund

double zygmund_ratio(const DyadicSet& f, int big_n, int m_terms, std::uint64_t samples, std::uint64_t seed) {
  if (m_terms < 1 || m_terms > kZygmundMaxTerms) throw std::invalid_argument("band overflow: M outside [1, 64]");
  const auto s = kernels::parallel::zygmund_sum(f.cells(), f.level(), m_terms, samples, seed);
  const double mean = s.sum_abs / static_cast<double>(s.count);
  const double nn = big_n, mm = m_terms;
  return mean / (std::sqrt(std::min(nn, mm)) * std::sqrt(mm));
}

ExperimentReport zygmund_experiment(const ZygmundParams& params, const Band& upper, const Band& cantor) {
  const auto start = Clock::now();
  ExperimentReport rep;
  rep.name = "zygmund";
  rep.band = upper;
  rep.param("N", std::to_string(params.n_min) + ".." + std::to_string(params.n_max));
  rep.param("s", std::to_string(params.s_min) + ".." + std::to_string(params.s_max));
  rep.param("samples", std::to_string(params.samples));
  rep.param("seed", std::to_string(params.seed));
  std::uint64_t row = 0;
  for (const SetKind kind : params.kinds) {
    const bool is_cantor = kind == SetKind::cantor;
    for (int n = params.n_min; n <= params.n_max; ++n) {
      if (!is_cantor) {
        const double r = zygmund_ratio(interval_set(n, 0, 1), n, n, params.samples, derive_seed(params.seed, row++));
        rep.add(fmt("interval N=%lld", n) + " s=0 M=" + std::to_string(n), r, Band{0.0, 1.0});
      }
      for (int s = params.s_min; s <= params.s_max; ++s) {
        const int m = n << s;
        const auto f = is_cantor ? cantor_set(n, s) : interval_set(n, 0, 1);
        const double r = zygmund_ratio(f, n, m, params.samples, derive_seed(params.seed, row++));
        const std::string point = std::string(is_cantor ? "cantor" : "interval") + fmt(" N=%lld", n) +
                                  fmt(" s=%lld", s) + fmt(" M=%lld", m);
        if (is_cantor) {
          rep.add(point, r, Band{cantor.lo, upper.hi});
        } else {
          rep.add(point, r);
        }
      }
    }
  }
  rep.finalize();
  rep.runtime_ms = elapsed_ms(start);
  return rep;
}

// ------------------------------------------------------------------- Main Lemma

double weighted_energy(const GridFunction& u, std::span<const DyadicInterval> family, std::span<const int> weights) {
  const int level = u.level();
  double total = 0.0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& iv = family[i];
    if (iv.level > level) throw std::invalid_argument("interval finer than the grid");
    const std::int64_t h = std::int64_t{1} << (level - iv.level);
    double e = 0.0;
    for (std::int64_t t = iv.index * h; t < (iv.index + 1) * h; ++t) e += std::norm(u.values()[static_cast<std::size_t>(t)]);
    total += std::ldexp(e, -level - weights[i]);
  }
  return total;
}

MainLemmaInstance main_lemma_instance(const MainLemmaParams& params, int trial) {
  const int level = params.grid_level;
  if (level < kMinOperatorLevel + 3) throw std::invalid_argument("main lemma needs a grid level of at least 8");
  Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(trial)));
  const auto kern = build_kernel();
  MainLemmaInstance inst;
  for (;;) {
    const int k0 = uniform_int(rng, kMinOperatorLevel, std::min(kMinOperatorLevel + 2, level - 2));
    inst.n = uniform_int(rng, 0, std::min(params.n_max, level - 1 - k0));
    inst.k = uniform_int(rng, 1, params.k_max);
    const int finest = k0 + uniform_int(rng, 0, std::min(4, level - 1 - inst.n - k0));
    // Keep Ĩ_top = [(i - 8) 2^-k0, (i + 9) 2^-k0] inside [0, 1).
    const auto index = static_cast<std::int64_t>(8 + uniform_index(rng, (std::uint64_t{1} << k0) - 16));
    const DyadicInterval itop{k0, index};
    const auto xi = static_cast<std::int64_t>(uniform_index(rng, std::uint64_t{1} << (level - 2)));
    inst.top = Tile(FrequencyInterval::containing(xi, k0), itop);
    inst.tree.clear();
    for (const auto& iv : random_subtree(rng, itop, finest, 0.75)) {
      inst.tree.emplace_back(FrequencyInterval::containing(xi, iv.level), iv);
    }
    const std::int64_t far = frequency_outside(FrequencyInterval::containing(xi, finest), level);
    const int n = inst.n;
    const bool saturated = coin(rng);  // every cell at the full density 2^-n
    inst.nfun = two_valued_linearizer(rng, level, itop, finest, xi, far, [&](std::int64_t h) {
      if (saturated) return h >> n;
      return static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>((h >> n) + 1)));
    });
    inst.g = unimodular(rng, level, level, uniform_int(rng, 0, 2));

    std::set<DyadicInterval> cells;
    for (const auto& p : inst.tree) {
      for (const auto& c : adjoint_support(p).istar) cells.insert(c);
    }
    inst.min_cells.clear();
    for (const auto& c : cells) {
      const bool minimal = std::none_of(cells.begin(), cells.end(), [&](const DyadicInterval& d) {
        return d != c && c.contains(d);
      });
      if (minimal) inst.min_cells.push_back(c);
    }
    const auto base = itilde(itop);
    try {
      inst.cz = cz_decompose(inst.min_cells, base);
    } catch (const std::domain_error&) {
      ++inst.retries;
      continue;
    }
    break;
  }

  // 𝓘: dyadic pieces of CZ cells with weights obeying Σ_{I ⊆ J} 2^-k(I) |I| <= 2^-k |J|.
  inst.family.clear();
  inst.weights.clear();
  for (const auto& j : inst.cz) {
    if (coin(rng)) continue;
    const int depth = uniform_int(rng, 0, std::min(3, level - j.level));
    std::vector<DyadicInterval> pieces;
    const std::int64_t first = j.index << depth;
    for (std::int64_t c = first; c < first + (std::int64_t{1} << depth); ++c) {
      if (depth == 0 || coin(rng)) pieces.emplace_back(j.level + depth, c);
    }
    if (pieces.empty()) continue;
    bool placed = false;
    for (int attempt = 0; attempt < 16 && !placed; ++attempt) {
      std::vector<int> w(pieces.size());
      // Σ 2^-k(I) |I| / |J| <= 2^-k in units of 2^-(k_max + depth).
      std::int64_t load = 0;
      for (auto& x : w) {
        x = uniform_int(rng, 1, params.k_max);
        load += std::int64_t{1} << (params.k_max - x);
      }
      if (load <= (std::int64_t{1} << (params.k_max + depth - inst.k))) {
        inst.family.insert(inst.family.end(), pieces.begin(), pieces.end());
        inst.weights.insert(inst.weights.end(), w.begin(), w.end());
        placed = true;
      }
    }
    if (!placed) ++inst.retries;
  }

  const auto u = tree_adjoint(inst.tree, inst.g, inst.nfun, kern);
  inst.lhs = weighted_energy(u, inst.family, inst.weights);
  inst.rhs = std::ldexp(17.0, -inst.k - 2 * inst.n - inst.top.scale());
  return inst;
}

ExperimentReport main_lemma_check(const MainLemmaParams& params, const Band& band) {
  const auto start = Clock::now();
  ExperimentReport rep;
  rep.name = "main_lemma";
  rep.band = band;
  rep.param("trials", std::to_string(params.trials));
  rep.param("grid_level", std::to_string(params.grid_level));
  rep.param("seed", std::to_string(params.seed));
  rep.param("n_max", std::to_string(params.n_max));
  rep.param("k_max", std::to_string(params.k_max));
  std::int64_t retries = 0, tiles = 0;
  for (int t = 0; t < params.trials; ++t) {
    const auto inst = main_lemma_instance(params, t);
    retries += inst.retries;
    tiles += static_cast<std::int64_t>(inst.tree.size());
    rep.add(fmt("trial=%lld", t) + fmt(" n=%lld", inst.n) + fmt(" k=%lld", inst.k) +
                fmt(" tiles=%lld", static_cast<long long>(inst.tree.size())),
            inst.lhs / inst.rhs);
  }
  rep.stat("retries", static_cast<double>(retries));
  rep.stat("tiles", static_cast<double>(tiles));
  rep.finalize();
  rep.runtime_ms = elapsed_ms(start);
  return rep;
}

// ---------------------------------------------------------------- L^2 mass

MassTree uniform_mass_tree(int grid_level, int n, std::uint64_t seed) {
  if (n < 0 || grid_level - n < kMinOperatorLevel) throw std::invalid_argument("mass 2^-n not realizable on this grid");
  Rng rng(seed);
  const int level = grid_level;
  const int k0 = uniform_int(rng, kMinOperatorLevel, std::min(kMinOperatorLevel + 1, level - n));
  const int finest = k0 + uniform_int(rng, 0, std::min(3, level - n - k0));
  const DyadicInterval itop{k0, static_cast<std::int64_t>(uniform_index(rng, std::uint64_t{1} << k0))};
  const auto xi = static_cast<std::int64_t>(uniform_index(rng, std::uint64_t{1} << (level - 2)));
  MassTree out;
  out.n = n;
  for (const auto& iv : random_subtree(rng, itop, finest, 0.6)) {
    out.tree.emplace_back(FrequencyInterval::containing(xi, iv.level), iv);
  }
  const std::int64_t far = frequency_outside(FrequencyInterval::containing(xi, finest), level);
  out.nfun = two_valued_linearizer(rng, level, itop, finest, xi, far, [&](std::int64_t h) { return h >> n; });
  return out;
}

double tree_operator_norm(const MassTree& t, const KernelFamily& kern, int iterations, std::uint64_t seed) {
  const int level = t.nfun.grid_level;
  Rng rng(seed);
  std::vector<cd> v(std::size_t{1} << level);
  for (auto& x : v) x = {uniform01(rng) - 0.5, uniform01(rng) - 0.5};
  auto norm2 = [](const std::vector<cd>& a) {
    double s = 0.0;
    for (const auto& x : a) s += std::norm(x);
    return std::sqrt(s);
  };
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const double nv = norm2(v);
    if (nv == 0.0) return 0.0;
    for (auto& x : v) x /= nv;
    const auto tv = tree_operator(t.tree, GridFunction::from_samples(level, v), t.nfun, kern);
    estimate = norm2(tv.values());
    v = tree_adjoint(t.tree, tv, t.nfun, kern).values();
  }
  return estimate;
}

ExperimentReport l2_mass_check(const MassTreeParams& params, const Band& band) {
  const auto start = Clock::now();
  const auto kern = build_kernel();
  ExperimentReport rep;
  rep.name = "l2_mass";
  rep.band = band;
  rep.param("grid_level", std::to_string(params.grid_level));
  rep.param("n", std::to_string(params.n_min) + ".." + std::to_string(params.n_max));
  rep.param("trials", std::to_string(params.trials));
  rep.param("iterations", std::to_string(params.iterations));
  rep.param("seed", std::to_string(params.seed));
  std::uint64_t index = 0;
  for (int n = params.n_min; n <= params.n_max; ++n) {
    for (int t = 0; t < params.trials; ++t, ++index) {
      const auto tree = uniform_mass_tree(params.grid_level, n, derive_seed(params.seed, 2 * index));
      const double norm = tree_operator_norm(tree, kern, params.iterations, derive_seed(params.seed, 2 * index + 1));
      rep.add(fmt("n=%lld", n) + fmt(" trial=%lld", t) + fmt(" tiles=%lld", static_cast<long long>(tree.tree.size())),
              norm * std::sqrt(std::ldexp(1.0, n)));
    }
  }
  rep.finalize();
  rep.runtime_ms = elapsed_ms(start);
  return rep;
}

// ---------------------------------------------------------------------- packing

std::vector<Tile> random_antichain(Rng& rng, const DyadicInterval& top, int grid_level, std::int64_t band, int count) {
  std::vector<Tile> out;
  for (int attempt = 0; attempt < 4 * count && static_cast<int>(out.size()) < count; ++attempt) {
    const int k = uniform_int(rng, top.level, grid_level);
    const std::int64_t span = std::int64_t{1} << (k - top.level);
    const DyadicInterval iv{k, (top.index << (k - top.level)) + static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(span)))};
    const std::int64_t slots = std::max<std::int64_t>(1, band >> k);
    const FrequencyInterval omega{k, static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(slots)))};
    const Tile p{omega, iv};
    const bool comparable = std::any_of(out.begin(), out.end(), [&](const Tile& q) { return tile_leq(p, q) || tile_leq(q, p); });
    if (!comparable) out.push_back(p);
  }
  return out;
}

PackingTrial packing_trial(const PackingParams& params, int trial) {
  const int level = params.grid_level;
  Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(trial)));
  PackingTrial out;
  const int top_level = uniform_int(rng, 0, std::min(6, level));
  out.top = DyadicInterval{top_level, static_cast<std::int64_t>(uniform_index(rng, std::uint64_t{1} << top_level))};
  const std::int64_t band = GridFunction::band_hi(level);
  // Frequencies concentrated in a random window so that tiles actually meet N.
  const int window = uniform_int(rng, 1, level - 1);
  const auto base = static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(band >> window))) << window;
  std::vector<std::int64_t> pool(static_cast<std::size_t>(uniform_int(rng, 1, 32)));
  for (auto& x : pool) x = base + static_cast<std::int64_t>(uniform_index(rng, std::uint64_t{1} << window));
  out.nfun = random_linearizer(rng, level, pool, uniform_int(rng, 0, level));
  out.antichain = random_antichain(rng, out.top, level, band, uniform_int(rng, 1, params.max_tiles));
  // Half of the tiles are steered onto N so that the E(P) are not mostly empty.
  for (auto& p : out.antichain) {
    if (!coin(rng)) continue;
    const std::int64_t h = std::int64_t{1} << (level - p.scale());
    const auto t = p.interval().index * h + static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(h)));
    const Tile q{FrequencyInterval::containing(out.nfun.value(static_cast<std::size_t>(t)), p.scale()), p.interval()};
    const bool comparable = std::any_of(out.antichain.begin(), out.antichain.end(), [&](const Tile& r) {
      return r != p && (tile_leq(q, r) || tile_leq(r, q));
    });
    if (!comparable) p = q;
  }
  const std::int64_t cells = std::int64_t{1} << (level - top_level);
  const std::int64_t first = out.top.index * cells;
  std::vector<std::int64_t> hits(static_cast<std::size_t>(cells), 0);
  for (const auto& p : out.antichain) {
    out.e_total += e_count(p, out.nfun);
    const std::int64_t h = std::int64_t{1} << (level - p.scale());
    for (std::int64_t t = p.interval().index * h; t < (p.interval().index + 1) * h; ++t) {
      if (p.omega().contains(out.nfun.value(static_cast<std::size_t>(t)))) ++hits[static_cast<std::size_t>(t - first)];
    }
  }
  out.top_cells = cells;
  out.multiplicity = hits.empty() ? 0 : *std::max_element(hits.begin(), hits.end());
  return out;
}

ExperimentReport packing_check(const PackingParams& params) {
  const auto start = Clock::now();
  ExperimentReport rep;
  rep.name = "packing";
  rep.band = Band{0.0, 1.0};
  rep.param("trials", std::to_string(params.trials));
  rep.param("grid_level", std::to_string(params.grid_level));
  rep.param("seed", std::to_string(params.seed));
  rep.param("block", std::to_string(params.block));
  const int block = std::max(1, params.block);
  std::vector<PackingTrial> results(static_cast<std::size_t>(params.trials));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < params.trials; ++t) results[static_cast<std::size_t>(t)] = packing_trial(params, t);
  std::int64_t tiles = 0, nonempty = 0;
  for (int b = 0; b * block < params.trials; ++b) {
    double sum = 0.0, mult = 0.0;
    const int end = std::min(params.trials, (b + 1) * block);
    for (int t = b * block; t < end; ++t) {
      const auto& r = results[static_cast<std::size_t>(t)];
      sum = std::max(sum, static_cast<double>(r.e_total) / static_cast<double>(r.top_cells));
      mult = std::max(mult, static_cast<double>(r.multiplicity));
      tiles += static_cast<std::int64_t>(r.antichain.size());
      nonempty += r.e_total > 0 ? 1 : 0;
    }
    const std::string range = fmt("trials=%lld", b * block) + fmt("..%lld", end - 1);
    rep.add(range + " sum", sum);
    rep.add(range + " multiplicity", mult);
  }
  rep.stat("tiles", static_cast<double>(tiles));
  rep.stat("trials_with_nonempty_E", static_cast<double>(nonempty));
  rep.finalize();
  rep.runtime_ms = elapsed_ms(start);
  return rep;
}

// ------------------------------------------------------------------- foliation

FoliationTrial foliation_trial(const FoliationParams& params, int trial) {
  const int level = params.grid_level;
  Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(trial)));
  const auto f = random_set(rng, level, uniform_int(rng, 1, level - 3));
  const auto seq = LacunarySequence::powers_of_two(level - 2 + params.extra_band);
  auto nfun = random_linearizer(rng, level, seq.terms(), uniform_int(rng, 3, level - 1));
  UniverseBounds bounds;
  bounds.band_max = std::int64_t{1} << (level - 1 + params.extra_band);
  const TileUniverse u(f, seq, std::move(nfun), bounds);
  const auto tc = classify_tiles(u);
  const auto fm = f_mass_partition(u, tc.sep);
  const auto mt = mass_partition(u, fm);
  const auto trees = decompose_all(u, tc, fm, mt);
  std::map<std::pair<int, int>, std::vector<TreeFamily>> groups;
  for (const auto& t : trees) {
    if (t.n) groups[{t.l, *t.n}].push_back(t);
  }
  FoliationTrial out;
  out.k_f = fm.k_f;
  out.trees = trees.size();
  for (const auto& [key, group] : groups) {
    const auto r = star_foliation(group);
    std::vector<DyadicInterval> tops;
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (r.layer[i] == 1 && r.selected[i]) tops.push_back(group[i].top.interval());
    }
    out.max_overlap = std::max(out.max_overlap, max_overlap(tops));
    out.max_layers = std::max(out.max_layers, r.layer_count);
  }
  return out;
}

int count_common_point_triples(std::span<const DyadicInterval> tops) {
  int units = 0;
  for (const auto& iv : tops) units = std::max(units, iv.level);
  const std::int64_t mod = std::int64_t{1} << units;
  std::vector<ClosedArc> arcs;
  for (const auto& iv : tops) arcs.push_back(closed_arc(iv, units));
  int count = 0;
  for (std::size_t a = 0; a < tops.size(); ++a) {
    for (std::size_t b = 0; b < tops.size(); ++b) {
      if (tops[b].level <= tops[a].level) continue;
      for (std::size_t c = 0; c < tops.size(); ++c) {
        if (tops[c].level <= tops[b].level) continue;
        const std::array<ClosedArc, 3> three{arcs[a], arcs[b], arcs[c]};
        const bool common = std::any_of(three.begin(), three.end(), [&](const ClosedArc& cand) {
          return std::all_of(three.begin(), three.end(), [&](const ClosedArc& x) { return in_arc(cand.lo, x, mod); });
        });
        count += common ? 1 : 0;
      }
    }
  }
  return count;
}

TripleTrial nested_triple_trial(std::uint64_t seed, int trial) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
  const int k1 = uniform_int(rng, kMinOperatorLevel, kMinOperatorLevel + 2);
  const std::array<int, 3> scales{k1, k1 + 10, k1 + 20};
  const bool aligned = coin(rng);
  // Common point x0 = p 2^-units, on the coarse grid when endpoints are aligned.
  const int units = scales[2];
  const int grain = aligned ? k1 : units;
  const std::int64_t p = static_cast<std::int64_t>(uniform_index(rng, std::uint64_t{1} << grain)) << (units - grain);
  auto interval_through = [&](int k) {
    const std::int64_t x = p >> (units - k);  // x0 lies in cell x (or on its left edge)
    std::int64_t idx;
    if (aligned && coin(rng)) {
      idx = coin(rng) ? x - 9 : x + 8;  // x0 is the right or left end of Ĩ
    } else {
      idx = x - 8 + static_cast<std::int64_t>(uniform_index(rng, 17));
    }
    const std::int64_t m = std::int64_t{1} << k;
    return DyadicInterval{k, ((idx % m) + m) % m};
  };
  TripleTrial out;
  auto add = [&](const DyadicInterval& iv) {
    TreeFamily t;
    t.top = Tile(FrequencyInterval{iv.level, 0}, iv);
    t.members = {t.top};
    t.l = 0;
    t.n = 0;
    t.m = uniform_int(rng, 1, 2);
    out.trees.push_back(std::move(t));
  };
  for (int k : scales) add(interval_through(k));
  const int decoys = uniform_int(rng, 0, 6);
  for (int d = 0; d < decoys; ++d) add(interval_through(scales[uniform_index(rng, 3)]));

  const auto r = star_foliation(out.trees);
  std::vector<DyadicInterval> all, layer1;
  for (std::size_t i = 0; i < out.trees.size(); ++i) {
    all.push_back(out.trees[i].top.interval());
    if (r.layer[i] == 1 && r.selected[i]) layer1.push_back(out.trees[i].top.interval());
  }
  out.nested_present = count_common_point_triples(all);
  out.admitted = count_common_point_triples(layer1);
  return out;
}

ExperimentReport foliation_overlap_check(const FoliationParams& params) {
  const auto start = Clock::now();
  ExperimentReport rep;
  rep.name = "foliation_overlap";
  rep.band = Band{0.0, kOverlapLimit};
  rep.param("trials", std::to_string(params.trials));
  rep.param("grid_level", std::to_string(params.grid_level));
  rep.param("extra_band", std::to_string(params.extra_band));
  rep.param("seed", std::to_string(params.seed));
  rep.param("block", std::to_string(params.block));
  rep.param("adversarial_trials", std::to_string(params.adversarial_trials));
  std::vector<FoliationTrial> results(static_cast<std::size_t>(params.trials));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < params.trials; ++t) results[static_cast<std::size_t>(t)] = foliation_trial(params, t);
  const int block = std::max(1, params.block);
  int worst = 0, layers = 0;
  double trees = 0;
  for (int b = 0; b * block < params.trials; ++b) {
    int m = 0;
    const int end = std::min(params.trials, (b + 1) * block);
    for (int t = b * block; t < end; ++t) {
      m = std::max(m, results[static_cast<std::size_t>(t)].max_overlap);
      layers = std::max(layers, results[static_cast<std::size_t>(t)].max_layers);
      trees += static_cast<double>(results[static_cast<std::size_t>(t)].trees);
    }
    worst = std::max(worst, m);
    rep.add(fmt("universes=%lld", b * block) + fmt("..%lld", end - 1), m);
  }
  std::vector<TripleTrial> triples(static_cast<std::size_t>(params.adversarial_trials));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < params.adversarial_trials; ++t) {
    triples[static_cast<std::size_t>(t)] = nested_triple_trial(derive_seed(params.seed, 0xF01), t);
  }
  int admitted = 0, present = 0;
  for (const auto& t : triples) {
    admitted += t.admitted;
    present += t.nested_present;
  }
  rep.add("nested_triples_admitted", admitted, Band{0.0, 0.0});
  rep.stat("max_overlap", worst);
  rep.stat("max_layers", layers);
  rep.stat("trees", trees);
  rep.stat("nested_triples_generated", present);
  rep.finalize();
  rep.runtime_ms = elapsed_ms(start);
  return rep;
}

// ------------------------------------------------------------------------ Walsh

std::vector<double> walsh_test_function(int grid_level, int n) {
  const std::size_t size = std::size_t{1} << grid_level;
  std::vector<double> f(size);
  const double cap = std::ldexp(1.0, n);
  for (std::size_t t = 0; t < size; ++t) {
    f[t] = t == 0 ? cap : std::min(cap, std::ldexp(1.0, grid_level) / static_cast<double>(t));
  }
  return f;
}

WalshPoint walsh_point(int grid_level, int n) {
  const auto f = walsh_test_function(grid_level, n);
  const auto sup = walsh_carleson(f, grid_level, LacunarySequence::walsh_dyadic(grid_level));
  WalshPoint p;
  p.n = n;
  p.carleson_l1 = std::accumulate(sup.begin(), sup.end(), 0.0) / static_cast<double>(sup.size());
  p.llogl = llogl_norm(f);
  return p;
}

ExperimentReport walsh_sharpness_experiment(const WalshParams& params, const Band& band) {
  const auto start = Clock::now();
  if (params.n_min < 1 || params.n_min >= params.n_max) throw std::invalid_argument("walsh: need n_min < n_max");
  if (params.n_max > params.grid_level) throw std::invalid_argument("walsh: n exceeds the grid level");
  ExperimentReport rep;
  rep.name = "walsh";
  rep.band = band;
  rep.param("grid_level", std::to_string(params.grid_level));
  rep.param("n", std::to_string(params.n_min) + ".." + std::to_string(params.n_max));
  std::vector<double> ns, cw, ll;
  for (int n = params.n_min; n <= params.n_max; ++n) {
    const auto p = walsh_point(params.grid_level, n);
    rep.add(fmt("n=%lld", n), p.carleson_l1 / p.llogl);
    ns.push_back(n);
    cw.push_back(p.carleson_l1);
    ll.push_back(p.llogl);
    rep.stat(fmt("carleson_l1 n=%lld", n), p.carleson_l1);
    rep.stat(fmt("llogl n=%lld", n), p.llogl);
  }
  rep.add("exponent", loglog_slope(ns, cw), Band{kExponentTarget - kExponentSlack, kExponentTarget + kExponentSlack});
  rep.stat("llogl_exponent", loglog_slope(ns, ll));
  rep.finalize();
  rep.runtime_ms = elapsed_ms(start);
  return rep;
}

// -------------------------------------------------------------- TFR invariants

DyadicSet tfr_suite_set(const TfrSuiteParams& params, int trial) {
  Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(trial)));
  return random_set(rng, params.grid_level, uniform_int(rng, 1, std::min(8, params.grid_level - 1)));
}

ExperimentReport tfr_invariant_suite(const TfrSuiteParams& params) {
  const auto start = Clock::now();
  ExperimentReport rep;
  rep.name = "tfr_invariants";
  rep.band = Band{0.0, 0.0};
  rep.param("sets", std::to_string(params.sets));
  rep.param("grid_level", std::to_string(params.grid_level));
  rep.param("seed", std::to_string(params.seed));
  const auto freqs = LacunarySequence::powers_of_two(params.grid_level + 4).terms();
  std::vector<TfrInvariantReport> per(static_cast<std::size_t>(params.sets));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < params.sets; ++t) {
    for (const auto& forest : tfr_global(tfr_suite_set(params, t))) {
      per[static_cast<std::size_t>(t)] += check_tfr_invariants(forest, freqs);
    }
  }
  TfrInvariantReport total;
  for (const auto& r : per) total += r;
  const std::array<std::pair<const char*, const InvariantTally*>, 7> rows{{
      {"geometric_decay", &total.geometric_decay},
      {"uniform_lengths", &total.uniform_lengths},
      {"freq_containment", &total.freq_containment},
      {"saturation_split", &total.saturation_split},
      {"inside_level_sets", &total.inside_level_sets},
      {"generalized_tree", &total.generalized_tree},
      {"representative_independence", &total.representative_independence},
  }};
  for (const auto& [name, tally] : rows) {
    rep.add(std::string(name) + " violations", static_cast<double>(tally->violations));
    rep.stat(std::string(name) + " checked", static_cast<double>(tally->checked));
  }
  rep.finalize();
  rep.runtime_ms = elapsed_ms(start);
  return rep;
}

}  // namespace tilelab
