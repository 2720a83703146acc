#pragma once

// JSON and CSV encodings of sets, forests, tile summaries and experiment
// reports. Output is deterministic: no timestamps, no timings, fixed key order.

#include <span>
#include <string>

#include "json.hpp"
#include "tilelab/setmodel.hpp"
#include "tilelab/tfr.hpp"
#include "tilelab/tilealg.hpp"
#include "tilelab/verify.hpp"

namespace tilelab {

using Json = nlohmann::ordered_json;

/// {"level": L, "cells": [...]} or {"level": L, "intervals": [[level, index], ...]}
/// (intervals no finer than L). Throws std::invalid_argument on malformed input.
DyadicSet dyadic_set_from_json(const Json& j);
Json to_json(const DyadicSet& f);

/// Reads a set from a file; throws std::runtime_error when unreadable.
DyadicSet read_dyadic_set(const std::string& path);

Json to_json(const DyadicInterval& iv);
/// {"k": level of I, "omega_index": ..., "i_index": ...}; |ω| = 2^k.
Json to_json(const Tile& p);
Json to_json(const TfrForest& forest);

/// One row per tile: k, root, word, alpha, tile interval.
std::string forest_csv(std::span<const TfrForest> forests);

Json to_json(const ExperimentReport& r);
/// Header `name,param_point,ratio,band_lo,band_hi,pass`, LF line endings.
std::string report_csv(std::span<const ExperimentReport> reports);

/// Decimal text that reads back to the same double.
std::string exact_decimal(double x);

/// Field quoted when it holds a comma, quote or newline.
std::string csv_field(const std::string& s);

}  // namespace tilelab
