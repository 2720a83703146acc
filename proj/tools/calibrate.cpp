// Regenerates the golden band file from seeded calibration runs.
//
//   tilelab_calibrate [--out data/golden_bands.json] [--seed 1001]
//
// Each band is widened from the observed extremes by a fixed factor and
// rounded outward to three significant digits.

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tilelab/json_io.hpp"
#include "tilelab/verify.hpp"

namespace {

using tilelab::Band;
using tilelab::Json;

double round_down(double x) {
  if (x <= 0) return 0.0;
  const double scale = std::pow(10.0, std::floor(std::log10(x)) - 2);
  return std::floor(x / scale) * scale;
}

double round_up(double x) {
  if (x <= 0) return 0.0;
  const double scale = std::pow(10.0, std::floor(std::log10(x)) - 2);
  return std::ceil(x / scale) * scale;
}

Json entry(const Band& b, double observed_min, double observed_max, const std::string& rule,
           const std::string& source) {
  Json j;
  j["lo"] = b.lo;
  j["hi"] = b.hi;
  j["observed_min"] = observed_min;
  j["observed_max"] = observed_max;
  j["rule"] = rule;
  j["source"] = source;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regenerate the golden band file", "tilelab_calibrate"};
  std::string out_path = "data/golden_bands.json";
  std::uint64_t seed = 1001;
  app.add_option("--out", out_path)->capture_default_str();
  app.add_option("--seed", seed, "Seed of the stochastic calibration runs")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const Band wide{0.0, 1e9};
  const auto seq = tilelab::LacunarySequence::powers_of_two(40);
  Json bands = Json::object();

  {
    const auto rep = tilelab::lower_bound_experiment({}, seq, wide);
    auto [lo, hi] = rep.range("N=");
    double h0 = INFINITY;
    for (int n = 4; n <= 10; ++n) h0 = std::min(h0, tilelab::hilbert_lower_ratio(16, n));
    const double floor_ratio = std::min(lo, h0);
    bands["lower_bound"] = entry({round_down(0.75 * floor_ratio), round_up(2.0 * hi)}, lo, hi,
                                 "lo = 0.75 min(r(N), Hilbert ratio with N = 0), hi = 2 max r(N)",
                                 "lower_bound_experiment L=16 N=4..10 n_j=2^j");
    std::cerr << "lower_bound " << lo << " .. " << hi << " (N=0 reduction " << h0 << ")\n";
  }
  {
    tilelab::UpperBoundParams p;
    p.seed = seed;
    const auto rep = tilelab::upper_bound_experiment(p, seq, wide);
    auto [lo, hi] = rep.range();
    bands["upper_bound"] = entry({0.0, round_up(1.5 * hi)}, lo, hi, "hi = 1.5 max",
                                 "upper_bound_experiment 200 trials L=14 seed " + std::to_string(seed));
    std::cerr << "upper_bound " << lo << " .. " << hi << "\n";
  }
  {
    tilelab::ZygmundParams p;
    p.seed = seed;
    const auto rep = tilelab::zygmund_experiment(p, wide, wide);
    auto [lo, hi] = rep.range();
    auto [clo, chi] = rep.range("cantor");
    const double upper_hi = round_up(1.25 * hi);
    bands["zygmund_upper"] = entry({0.0, upper_hi}, lo, hi, "hi = 1.25 max over both set kinds",
                                   "zygmund_experiment N=3..6 s=1..3 seed " + std::to_string(seed));
    bands["zygmund_cantor"] = entry({round_down(0.8 * clo), upper_hi}, clo, chi,
                                    "lo = 0.8 min over Cantor rows, hi = zygmund_upper hi",
                                    "zygmund_experiment N=3..6 s=1..3 seed " + std::to_string(seed));
    std::cerr << "zygmund " << lo << " .. " << hi << ", cantor " << clo << " .. " << chi << "\n";
  }
  {
    tilelab::MainLemmaParams p;
    p.seed = seed;
    const auto rep = tilelab::main_lemma_check(p, wide);
    auto [lo, hi] = rep.range();
    bands["main_lemma"] = entry({0.0, round_up(2.0 * hi)}, lo, hi, "hi = 2 max",
                                "main_lemma_check 200 instances L=12 seed " + std::to_string(seed));
    std::cerr << "main_lemma " << lo << " .. " << hi << "\n";
  }
  {
    tilelab::MassTreeParams p;
    p.seed = seed;
    const auto rep = tilelab::l2_mass_check(p, wide);
    auto [lo, hi] = rep.range();
    bands["l2_mass"] = entry({0.0, round_up(1.5 * hi)}, lo, hi, "hi = 1.5 max",
                             "l2_mass_check n=0..6, 50 trials each, L=12 seed " + std::to_string(seed));
    std::cerr << "l2_mass " << lo << " .. " << hi << "\n";
  }
  {
    const auto rep = tilelab::walsh_sharpness_experiment({}, wide);
    auto [lo, hi] = rep.range("n=");
    bands["walsh_ratio"] = entry({round_down(0.8 * lo), round_up(1.25 * hi)}, lo, hi,
                                 "lo = 0.8 min, hi = 1.25 max", "walsh_sharpness_experiment L=16 n=4..10");
    std::cerr << "walsh_ratio " << lo << " .. " << hi << "\n";
  }

  Json doc;
  doc["description"] =
      "Calibrated ratio bands. They are properties of this discretization (grid, kernel taper, generators), "
      "not constants of the underlying inequalities. Regenerate with tilelab_calibrate.";
  doc["command"] = "tilelab_calibrate --seed " + std::to_string(seed);
  doc["bands"] = std::move(bands);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write " << out_path << "\n";
    return 2;
  }
  out << doc.dump(2) << "\n";
  return 0;
}
