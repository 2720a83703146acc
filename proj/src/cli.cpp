#include "tilelab/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "tilelab/json_io.hpp"
#include "tilelab/random.hpp"
#include "tilelab/tfr.hpp"
#include "tilelab/tilealg.hpp"
#include "tilelab/verify.hpp"

namespace tilelab::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::optional<int> grid;
  std::string alpha;
  int seq_length = 40;
  std::uint64_t seed = 1;
  std::string format = "json";
  std::string out;
  int threads = 0;
  std::string golden;

  int grid_or(int fallback) const {
    const int g = grid.value_or(fallback);
    if (g < 8 || g > 22) throw UsageError("--grid must lie in [8, 22]");
    return g;
  }
};

long long parse_int(const std::string& s, const char* what) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw UsageError(std::string("bad ") + what + ": " + s);
  return v;
}

/// "a..b" or a single integer.
std::pair<int, int> parse_range(const std::string& s, const char* what) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const int v = static_cast<int>(parse_int(s, what));
    return {v, v};
  }
  const int a = static_cast<int>(parse_int(s.substr(0, dots), what));
  const int b = static_cast<int>(parse_int(s.substr(dots + 2), what));
  if (a > b) throw UsageError(std::string("empty range for ") + what + ": " + s);
  return {a, b};
}

Rational parse_rational(const std::string& s) {
  const auto slash = s.find('/');
  const long long num = parse_int(s.substr(0, slash), "--alpha");
  const long long den = slash == std::string::npos ? 1 : parse_int(s.substr(slash + 1), "--alpha");
  if (den <= 0) throw UsageError("--alpha needs a positive denominator");
  return Rational(num, den);
}

LacunarySequence sequence(const Config& cfg) {
  if (cfg.seq_length < 1) throw UsageError("--seq-length must be positive");
  if (cfg.alpha.empty()) return LacunarySequence::powers_of_two(cfg.seq_length);
  const Rational a = parse_rational(cfg.alpha);
  if (!(a > Rational(1))) throw UsageError("--alpha must exceed 1");
  return LacunarySequence::geometric(a, cfg.seq_length);
}

GoldenBands golden(const Config& cfg) {
  return cfg.golden.empty() ? GoldenBands::load_default() : GoldenBands::load(cfg.golden);
}

void emit(const Config& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(cfg.out, std::ios::binary);
  if (!file) throw UsageError("cannot write " + cfg.out);
  file << text;
}

int emit_report(const Config& cfg, const ExperimentReport& rep, std::ostream& out, std::ostream& err) {
  if (cfg.format == "csv") {
    emit(cfg, report_csv(std::span(&rep, 1)), out);
  } else {
    emit(cfg, to_json(rep).dump(2) + "\n", out);
  }
  err << rep.name << ": " << (rep.pass ? "PASS" : "FAIL") << " (" << rep.ratios.size() << " rows)\n";
  return rep.pass ? kExitPass : kExitFail;
}

struct TileInput {
  std::string set_path;
  int measure_exp = 5;
  int block_level = -1;
  int extra_band = 3;
  bool list = false;
};

struct Prepared {
  TileUniverse universe;
  TileClass classes;
  FMassPartition fmass;
  MassTable mass;
};

Prepared prepare_tiles(const Config& cfg, const TileInput& in) {
  const int level = cfg.grid_or(10);
  if (level > 12) throw UsageError("tiles commands need --grid <= 12");
  Rng rng(derive_seed(cfg.seed, 0));
  DyadicSet f;
  if (!in.set_path.empty()) {
    f = read_dyadic_set(in.set_path);
    if (f.level() > level) throw UsageError("set is finer than --grid");
  } else {
    if (in.measure_exp < 1 || in.measure_exp >= level) throw UsageError("--measure-exp must lie in [1, grid)");
    f = random_set(rng, level, in.measure_exp);
  }
  if (f.empty()) throw UsageError("the set is empty");
  if (in.extra_band < 0 || in.extra_band > 4) throw UsageError("--extra-band must lie in [0, 4]");
  const auto seq = LacunarySequence::powers_of_two(level - 2 + in.extra_band);
  const int block = in.block_level < 0 ? level - 3 : in.block_level;
  if (block < 0 || block > level) throw UsageError("--block-level must lie in [0, grid]");
  auto nfun = random_linearizer(rng, level, seq.terms(), block);
  UniverseBounds bounds;
  bounds.band_max = std::int64_t{1} << (level - 1 + in.extra_band);
  TileUniverse u(f, seq, std::move(nfun), bounds);
  auto tc = classify_tiles(u);
  auto fm = f_mass_partition(u, tc.sep);
  auto mt = mass_partition(u, fm);
  return {std::move(u), std::move(tc), std::move(fm), std::move(mt)};
}

Json opt_json(const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); }

int cmd_classify(const Config& cfg, const TileInput& in, std::ostream& out) {
  const auto p = prepare_tiles(cfg, in);
  const auto& u = p.universe;
  auto class_name = [&](std::size_t i) -> std::string {
    if (std::binary_search(p.classes.cluster.begin(), p.classes.cluster.end(), i)) return "cluster";
    if (std::binary_search(p.classes.zero.begin(), p.classes.zero.end(), i)) return "zero";
    return "sep";
  };
  if (cfg.format == "csv") {
    std::ostringstream s;
    s << "k,omega_index,i_index,class,m,n,e_count\n";
    for (std::size_t i = 0; i < u.size(); ++i) {
      const auto& t = u.tile(i);
      const int m = p.fmass.class_of[i];
      const auto n = p.mass.n_class[i];
      s << t.interval().level << ',' << t.omega().index << ',' << t.interval().index << ',' << class_name(i) << ','
        << (m > 0 ? std::to_string(m) : std::string()) << ',' << (n ? std::to_string(*n) : std::string()) << ','
        << u[i].e_count << '\n';
    }
    emit(cfg, s.str(), out);
    return kExitPass;
  }
  Json j;
  j["grid_level"] = u.grid_level();
  j["set"] = to_json(u.f());
  j["band_max"] = u.band_max();
  j["scales"] = u.scales();
  j["tiles"] = u.size();
  j["cluster"] = p.classes.cluster.size();
  j["sep"] = p.classes.sep.size();
  j["zero"] = p.classes.zero.size();
  j["k_f"] = p.fmass.k_f;
  Json fclasses = Json::array();
  for (int k = 1; k <= p.fmass.k_f; ++k) fclasses.push_back(p.fmass.classes[static_cast<std::size_t>(k)].size());
  j["f_mass_class_sizes"] = std::move(fclasses);
  std::map<int, std::size_t> by_n;
  for (const auto& n : p.mass.n_class) {
    if (n) ++by_n[*n];
  }
  Json mclasses = Json::object();
  for (const auto& [n, c] : by_n) mclasses[std::to_string(n)] = c;
  j["mass_class_sizes"] = std::move(mclasses);
  j["zero_mass"] = p.mass.zero_mass.size();
  if (in.list) {
    Json tiles = Json::array();
    for (std::size_t i = 0; i < u.size(); ++i) {
      Json t = to_json(u.tile(i));
      t["class"] = class_name(i);
      const int m = p.fmass.class_of[i];
      t["m"] = m > 0 ? Json(m) : Json(nullptr);
      t["n"] = opt_json(p.mass.n_class[i]);
      t["e_count"] = u[i].e_count;
      tiles.push_back(std::move(t));
    }
    j["tile_list"] = std::move(tiles);
  }
  emit(cfg, j.dump(2) + "\n", out);
  return kExitPass;
}

int cmd_foliate(const Config& cfg, const TileInput& in, std::ostream& out) {
  const auto p = prepare_tiles(cfg, in);
  auto trees = decompose_all(p.universe, p.classes, p.fmass, p.mass);
  std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    if (trees[i].n) groups[{trees[i].l, *trees[i].n}].push_back(i);
  }
  int worst_overlap = 0;
  for (const auto& [key, idx] : groups) {
    std::vector<TreeFamily> group;
    for (const auto i : idx) group.push_back(trees[i]);
    const auto r = star_foliation(group);
    std::vector<DyadicInterval> tops;
    for (std::size_t g = 0; g < idx.size(); ++g) {
      trees[idx[g]].p = r.layer[g];
      if (r.layer[g] == 1 && r.selected[g]) tops.push_back(group[g].top.interval());
    }
    worst_overlap = std::max(worst_overlap, max_overlap(tops));
  }
  const bool pass = worst_overlap <= static_cast<int>(kOverlapLimit);
  if (cfg.format == "csv") {
    std::ostringstream s;
    s << "tree,l,n,m,p,a,b,k,omega_index,i_index\n";
    for (std::size_t i = 0; i < trees.size(); ++i) {
      const auto& t = trees[i];
      auto o = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
      for (const auto& member : t.members) {
        s << i << ',' << t.l << ',' << o(t.n) << ',' << o(t.m) << ',' << o(t.p) << ',' << t.a << ',' << t.b << ','
          << member.interval().level << ',' << member.omega().index << ',' << member.interval().index << '\n';
      }
    }
    emit(cfg, s.str(), out);
    return pass ? kExitPass : kExitFail;
  }
  Json j;
  j["grid_level"] = p.universe.grid_level();
  j["k_f"] = p.fmass.k_f;
  j["max_layer1_overlap"] = worst_overlap;
  j["overlap_limit"] = kOverlapLimit;
  j["pass"] = pass;
  Json list = Json::array();
  for (const auto& t : trees) {
    Json e;
    e["top"] = to_json(t.top);
    e["l"] = t.l;
    e["n"] = opt_json(t.n);
    e["m"] = opt_json(t.m);
    e["p"] = opt_json(t.p);
    e["a"] = t.a;
    e["b"] = t.b;
    Json members = Json::array();
    for (const auto& member : t.members) members.push_back(to_json(member));
    e["members"] = std::move(members);
    list.push_back(std::move(e));
  }
  j["trees"] = std::move(list);
  emit(cfg, j.dump(2) + "\n", out);
  return pass ? kExitPass : kExitFail;
}

int cmd_tfr(const Config& cfg, const std::string& set_path, std::optional<int> k, std::ostream& out) {
  const auto f = read_dyadic_set(set_path);
  if (f.empty()) throw UsageError("the set is empty");
  std::vector<TfrForest> forests;
  if (k) {
    if (*k < 1) throw UsageError("--k must be positive");
    forests.push_back(tfr_forest(f, *k));
  } else {
    forests = tfr_global(f);
  }
  if (cfg.format == "csv") {
    emit(cfg, forest_csv(forests), out);
    return kExitPass;
  }
  Json j;
  j["set"] = to_json(f);
  j["k_f"] = k_F(f);
  Json list = Json::array();
  for (const auto& forest : forests) list.push_back(to_json(forest));
  j["forests"] = std::move(list);
  emit(cfg, j.dump(2) + "\n", out);
  return kExitPass;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tile machinery and inequality checks for lacunary Carleson operators", "tilelab"};
  app.require_subcommand(1);
  app.fallthrough();
  Config cfg;
  app.add_option("--grid", cfg.grid, "Grid level L, 8..22 (default depends on the command)");
  app.add_option("--alpha", cfg.alpha, "Lacunary ratio a/b; default n_j = 2^j");
  app.add_option("--seq-length", cfg.seq_length, "Number of sequence terms")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Base seed")->capture_default_str();
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app.add_option("--out", cfg.out, "Output file (default stdout)");
  app.add_option("--threads", cfg.threads, "Thread cap (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_option("--golden", cfg.golden, "Golden band file (default $TILELAB_GOLDEN or the shipped file)");

  std::string set_path;
  std::optional<int> tfr_k;
  auto* tfr = app.add_subcommand("tfr", "Time-frequency regularization forests of a set");
  tfr->add_option("--set", set_path, "Set file {\"level\": L, \"cells\": [...]}")->required();
  tfr->add_option("--k", tfr_k, "Level-set index (default: every k < k_F)");

  auto* carleson = app.add_subcommand("carleson", "Lacunary Carleson operator bounds");
  carleson->require_subcommand(1);
  std::string lower_range = "4..10";
  auto* lower = carleson->add_subcommand("lower", "Weak lower bound on F = [1/2 - 2^-N, 1/2)");
  lower->add_option("--N", lower_range, "Range a..b")->capture_default_str();
  UpperBoundParams up;
  std::string up_measure = "2..10";
  auto* upper = carleson->add_subcommand("upper", "Restricted weak-type bound for the adjoint");
  upper->add_option("--trials", up.trials)->capture_default_str()->check(CLI::PositiveNumber);
  upper->add_option("--measure-exp", up_measure, "Range of -log2 |F|")->capture_default_str();

  ZygmundParams zp;
  std::string z_n = "3..6", z_s = "1..3", z_kind = "both";
  auto* zygmund = app.add_subcommand("zygmund", "Lacunary exponential sums on intervals and Cantor sets");
  zygmund->add_option("--N", z_n)->capture_default_str();
  zygmund->add_option("--s", z_s)->capture_default_str();
  zygmund->add_option("--kind", z_kind)->check(CLI::IsMember({"interval", "cantor", "both"}))->capture_default_str();
  zygmund->add_option("--samples", zp.samples)->capture_default_str()->check(CLI::PositiveNumber);

  std::string walsh_range = "4..10";
  auto* walsh = app.add_subcommand("walsh", "Walsh Carleson growth on min(2^n, 1/x)");
  walsh->add_option("--n", walsh_range)->capture_default_str();

  auto* check = app.add_subcommand("check", "Structural checks");
  check->require_subcommand(1);
  PackingParams pk;
  auto* packing = check->add_subcommand("packing", "Carleson packing on random antichains");
  packing->add_option("--trials", pk.trials)->capture_default_str()->check(CLI::PositiveNumber);
  FoliationParams fo;
  auto* foliation = check->add_subcommand("foliation", "Layer-1 overlap of the tree foliation");
  foliation->add_option("--trials", fo.trials)->capture_default_str()->check(CLI::PositiveNumber);
  foliation->add_option("--adversarial", fo.adversarial_trials)->capture_default_str()->check(CLI::NonNegativeNumber);
  MainLemmaParams ml;
  auto* main_lemma = check->add_subcommand("main-lemma", "Weighted tree estimate on generated instances");
  main_lemma->add_option("--trials", ml.trials)->capture_default_str()->check(CLI::PositiveNumber);
  TfrSuiteParams ts;
  auto* tfr_inv = check->add_subcommand("tfr-invariants", "Structural properties of the TFR forests");
  tfr_inv->add_option("--sets", ts.sets)->capture_default_str()->check(CLI::PositiveNumber);
  MassTreeParams mp;
  std::string mass_range = "0..6";
  auto* l2 = check->add_subcommand("l2-mass", "Tree operator norm against the mass");
  l2->add_option("--trials", mp.trials)->capture_default_str()->check(CLI::PositiveNumber);
  l2->add_option("--n", mass_range)->capture_default_str();

  TileInput ti;
  auto* tiles = app.add_subcommand("tiles", "Tile classification and foliation on a universe");
  tiles->require_subcommand(1);
  auto* classify = tiles->add_subcommand("classify", "Cluster/separated/zero classes, F-mass and mass classes");
  auto* foliate = tiles->add_subcommand("foliate", "Trees with their (l, n, m, p) labels");
  for (auto* sub : {classify, foliate}) {
    sub->add_option("--set", ti.set_path, "Set file; default a random set");
    sub->add_option("--measure-exp", ti.measure_exp, "Random set measure 2^-e")->capture_default_str();
    sub->add_option("--block-level", ti.block_level, "Linearizer block level (default grid - 3)");
    sub->add_option("--extra-band", ti.extra_band, "Frequency band beyond the grid, in octaves")->capture_default_str();
  }
  classify->add_flag("--list", ti.list, "Include every tile");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  const int saved_threads = omp_get_max_threads();
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
  struct Restore {
    int n;
    ~Restore() { omp_set_num_threads(n); }
  } restore{saved_threads};

  try {
    if (*tfr) return cmd_tfr(cfg, set_path, tfr_k, out);
    if (*lower) {
      LowerBoundParams p;
      p.grid_level = cfg.grid_or(16);
      std::tie(p.n_min, p.n_max) = parse_range(lower_range, "--N");
      if (p.n_min < 1 || p.n_max > p.grid_level - 4) throw UsageError("--N must lie in [1, grid - 4]");
      return emit_report(cfg, lower_bound_experiment(p, sequence(cfg), golden(cfg).at("lower_bound")), out, err);
    }
    if (*upper) {
      up.grid_level = cfg.grid_or(14);
      up.seed = cfg.seed;
      std::tie(up.measure_exp_min, up.measure_exp_max) = parse_range(up_measure, "--measure-exp");
      if (up.measure_exp_min < 1 || up.measure_exp_max >= up.grid_level - 1) {
        throw UsageError("--measure-exp must lie in [1, grid - 2]");
      }
      return emit_report(cfg, upper_bound_experiment(up, sequence(cfg), golden(cfg).at("upper_bound")), out, err);
    }
    if (*zygmund) {
      std::tie(zp.n_min, zp.n_max) = parse_range(z_n, "--N");
      std::tie(zp.s_min, zp.s_max) = parse_range(z_s, "--s");
      if (zp.n_min < 1 || zp.s_min < 0) throw UsageError("--N and --s must be positive");
      if (zp.n_max * (zp.s_max + 1) > 60) throw UsageError("Cantor level N (s + 1) must stay <= 60");
      if (z_kind == "interval") zp.kinds = {SetKind::interval};
      if (z_kind == "cantor") zp.kinds = {SetKind::cantor};
      zp.seed = cfg.seed;
      const auto g = golden(cfg);
      return emit_report(cfg, zygmund_experiment(zp, g.at("zygmund_upper"), g.at("zygmund_cantor")), out, err);
    }
    if (*walsh) {
      WalshParams p;
      p.grid_level = cfg.grid_or(16);
      std::tie(p.n_min, p.n_max) = parse_range(walsh_range, "--n");
      if (p.n_min < 1 || p.n_max > p.grid_level) throw UsageError("--n must lie in [1, grid]");
      if (p.n_max - p.n_min < 1) throw UsageError("--n needs at least two points for the exponent fit");
      return emit_report(cfg, walsh_sharpness_experiment(p, golden(cfg).at("walsh_ratio")), out, err);
    }
    if (*packing) {
      pk.grid_level = cfg.grid_or(12);
      pk.seed = cfg.seed;
      return emit_report(cfg, packing_check(pk), out, err);
    }
    if (*foliation) {
      fo.grid_level = cfg.grid_or(9);
      if (fo.grid_level > 12) throw UsageError("check foliation needs --grid <= 12");
      fo.seed = cfg.seed;
      return emit_report(cfg, foliation_overlap_check(fo), out, err);
    }
    if (*main_lemma) {
      ml.grid_level = cfg.grid_or(12);
      ml.seed = cfg.seed;
      return emit_report(cfg, main_lemma_check(ml, golden(cfg).at("main_lemma")), out, err);
    }
    if (*tfr_inv) {
      ts.grid_level = cfg.grid_or(12);
      if (ts.grid_level > 16) throw UsageError("check tfr-invariants needs --grid <= 16");
      ts.seed = cfg.seed;
      return emit_report(cfg, tfr_invariant_suite(ts), out, err);
    }
    if (*l2) {
      mp.grid_level = cfg.grid_or(12);
      mp.seed = cfg.seed;
      std::tie(mp.n_min, mp.n_max) = parse_range(mass_range, "--n");
      if (mp.n_min < 0 || mp.n_max > mp.grid_level - kMinOperatorLevel) {
        throw UsageError("--n must lie in [0, grid - " + std::to_string(kMinOperatorLevel) + "]");
      }
      return emit_report(cfg, l2_mass_check(mp, golden(cfg).at("l2_mass")), out, err);
    }
    if (*classify) return cmd_classify(cfg, ti, out);
    if (*foliate) return cmd_foliate(cfg, ti, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  err << "error: no command\n";
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace tilelab::cli
