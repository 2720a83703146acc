#include "tilelab/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tilelab {
namespace {

Json band_json(const Band& b) { return Json::array({b.lo, b.hi}); }

}  // namespace

std::string exact_decimal(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

DyadicSet dyadic_set_from_json(const Json& j) {
  try {
    if (!j.is_object() || !j.contains("level")) throw std::invalid_argument("set needs a \"level\"");
    const int level = j.at("level").get<int>();
    if (level < 0 || level > 40) throw std::invalid_argument("set level outside [0, 40]");
    if (j.contains("cells")) return DyadicSet(level, j.at("cells").get<std::vector<std::int64_t>>());
    if (j.contains("intervals")) {
      std::vector<DyadicInterval> parts;
      for (const auto& e : j.at("intervals")) {
        if (!e.is_array() || e.size() != 2) throw std::invalid_argument("interval must be [level, index]");
        const DyadicInterval iv{e[0].get<int>(), e[1].get<std::int64_t>()};
        if (iv.level > level) throw std::invalid_argument("interval finer than the set level");
        parts.push_back(iv);
      }
      return DyadicSet::from_intervals(level, parts);
    }
    throw std::invalid_argument("set needs \"cells\" or \"intervals\"");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed set: ") + e.what());
  }
}

Json to_json(const DyadicSet& f) {
  Json j;
  j["level"] = f.level();
  j["cells"] = f.cells();
  return j;
}

DyadicSet read_dyadic_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
  }
  return dyadic_set_from_json(j);
}

Json to_json(const DyadicInterval& iv) { return Json::array({iv.level, iv.index}); }

Json to_json(const Tile& p) {
  Json j;
  j["k"] = p.interval().level;
  j["omega_index"] = p.omega().index;
  j["i_index"] = p.interval().index;
  return j;
}

Json to_json(const TfrForest& forest) {
  auto intervals = [](const std::vector<DyadicInterval>& v) {
    Json a = Json::array();
    for (const auto& iv : v) a.push_back(to_json(iv));
    return a;
  };
  Json j;
  j["k"] = forest.k;
  char fp[32];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(forest.set_fingerprint));
  j["set_fingerprint"] = fp;
  j["roots"] = Json::array();
  for (const auto& root : forest.roots) {
    Json r;
    r["interval"] = to_json(root.interval);
    r["nodes"] = Json::array();
    for (const auto& node : root.tree.nodes) {
      Json n;
      n["word"] = node.word;
      n["alpha"] = node.alpha ? Json(*node.alpha) : Json(nullptr);
      n["input"] = intervals(node.input);
      n["c_set"] = intervals(node.c_set);
      Json tiles = Json::array();
      for (const auto& t : node.tiles) tiles.push_back(to_json(t.interval));
      n["tiles"] = std::move(tiles);
      n["upper"] = node.upper ? Json(*node.upper) : Json(nullptr);
      n["lower"] = node.lower ? Json(*node.lower) : Json(nullptr);
      r["nodes"].push_back(std::move(n));
    }
    j["roots"].push_back(std::move(r));
  }
  return j;
}

std::string forest_csv(std::span<const TfrForest> forests) {
  std::ostringstream out;
  out << "k,root_level,root_index,word,alpha,tile_level,tile_index\n";
  for (const auto& forest : forests) {
    for (const auto& root : forest.roots) {
      for (const auto& node : root.tree.nodes) {
        for (const auto& t : node.tiles) {
          out << forest.k << ',' << root.interval.level << ',' << root.interval.index << ',' << node.word << ','
              << (node.alpha ? std::to_string(*node.alpha) : std::string()) << ',' << t.interval.level << ','
              << t.interval.index << '\n';
        }
      }
    }
  }
  return out.str();
}

Json to_json(const ExperimentReport& r) {
  Json j;
  j["name"] = r.name;
  Json params = Json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  j["params"] = std::move(params);
  j["band"] = band_json(r.band);
  j["pass"] = r.pass;
  Json rows = Json::array();
  for (const auto& p : r.ratios) {
    Json row;
    row["point"] = p.point;
    row["ratio"] = std::isfinite(p.ratio) ? Json(p.ratio) : Json(exact_decimal(p.ratio));
    row["band"] = band_json(p.band);
    row["pass"] = p.pass();
    rows.push_back(std::move(row));
  }
  j["ratios"] = std::move(rows);
  Json stats = Json::object();
  for (const auto& [k, v] : r.stats) stats[k] = v;
  j["stats"] = std::move(stats);
  return j;
}

std::string report_csv(std::span<const ExperimentReport> reports) {
  std::ostringstream out;
  out << "name,param_point,ratio,band_lo,band_hi,pass\n";
  for (const auto& r : reports) {
    for (const auto& p : r.ratios) {
      out << csv_field(r.name) << ',' << csv_field(p.point) << ',' << exact_decimal(p.ratio) << ','
          << exact_decimal(p.band.lo) << ',' << exact_decimal(p.band.hi) << ',' << (p.pass() ? "true" : "false")
          << '\n';
    }
  }
  return out.str();
}

}  // namespace tilelab
