// Serial reference against the OpenMP kernels on the same inputs.

#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "tilelab/kernels.hpp"
#include "tilelab/random.hpp"

using namespace tilelab;
using kernels::cd;

namespace {

std::vector<cd> random_coeffs(int level) {
  Rng rng(7);
  std::vector<cd> c(std::size_t{1} << level);
  for (auto& v : c) v = {uniform01(rng) - 0.5, uniform01(rng) - 0.5};
  return c;
}

std::vector<std::int64_t> powers(int level) {
  std::vector<std::int64_t> f;
  for (int j = 1; j < level; ++j) f.push_back(std::int64_t{1} << j);
  return f;
}

std::vector<double> random_real(int level) {
  Rng rng(11);
  std::vector<double> f(std::size_t{1} << level);
  for (auto& v : f) v = uniform01(rng);
  return f;
}

template <auto Fn>
void hilbert_sup(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  const auto c = random_coeffs(level);
  const auto f = powers(level);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(c, level, f));
}

template <auto Fn>
void walsh_sup(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  const auto f = random_real(level);
  std::vector<std::int64_t> ns;
  for (int j = 1; j <= level; ++j) ns.push_back((std::int64_t{1} << j) - 1);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(f, level, ns));
}

template <auto Fn>
void fwht(benchmark::State& state) {
  const auto f = random_real(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto a = f;
    Fn(a);
    benchmark::DoNotOptimize(a.data());
  }
}

template <auto Fn>
void zygmund(benchmark::State& state) {
  const std::vector<std::int64_t> cells{1, 5, 9, 13};
  for (auto _ : state) benchmark::DoNotOptimize(Fn(cells, 4, 32, static_cast<std::uint64_t>(state.range(0)), 3));
}

}  // namespace

BENCHMARK(hilbert_sup<kernels::serial::hilbert_sup>)->Name("hilbert_sup/serial")->Arg(14)->Arg(16);
BENCHMARK(hilbert_sup<kernels::parallel::hilbert_sup>)->Name("hilbert_sup/parallel")->Arg(14)->Arg(16);
BENCHMARK(walsh_sup<kernels::serial::walsh_sup>)->Name("walsh_sup/serial")->Arg(14)->Arg(16);
BENCHMARK(walsh_sup<kernels::parallel::walsh_sup>)->Name("walsh_sup/parallel")->Arg(14)->Arg(16);
BENCHMARK(fwht<kernels::serial::fwht>)->Name("fwht/serial")->Arg(16)->Arg(20);
BENCHMARK(fwht<kernels::parallel::fwht>)->Name("fwht/parallel")->Arg(16)->Arg(20);
BENCHMARK(zygmund<kernels::serial::zygmund_sum>)->Name("zygmund_sum/serial")->Arg(1 << 16);
BENCHMARK(zygmund<kernels::parallel::zygmund_sum>)->Name("zygmund_sum/parallel")->Arg(1 << 16);

BENCHMARK_MAIN();
