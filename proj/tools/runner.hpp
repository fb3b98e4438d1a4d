#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "conelab/cone.hpp"
#include "conelab/weight.hpp"

namespace conelab::cli {

using nlohmann::json;

struct RunOptions {
  /// Overrides the config seed when set.
  std::optional<std::uint64_t> seed;
  /// Reports and CSV series are written here when non-empty.
  std::filesystem::path out_dir;
};

struct RunResult {
  json report;
  /// File name -> CSV text for the dense series of the run.
  std::map<std::string, std::string> csv;
  bool pass = false;
};

/// Reads and parses a JSON config (ConfigInvalid on I/O or syntax errors).
/// A missing "name" is filled from the file stem.
json load_config(const std::filesystem::path& path);

/// Runs one experiment. ConfigInvalid names the offending key; other
/// library errors propagate with their own kind.
RunResult run_experiment(const json& config, const RunOptions& opts = {});

/// Writes <out>/<name>.json and the CSV series.
void write_outputs(const RunResult& r, const std::filesystem::path& out_dir);

struct SuiteRow {
  std::string name;
  std::string experiment;
  std::string metric;
  double value = 0.0;
  /// PASS, FAIL or ERROR.
  std::string status;
  std::string message;
};

struct SuiteResult {
  std::vector<SuiteRow> rows;
  /// 0 all pass, 2 some check failed, 1 a config or runtime error (or no
  /// configs at all).
  int exit_code = 0;
  std::string message;
};

/// Runs every *.json in the directory in name order.
SuiteResult run_suite(const std::filesystem::path& dir, const RunOptions& opts = {});

std::string format_summary(const SuiteResult& s);

Cone parse_cone(const json& config);
Weight parse_weight(const json& config);

/// Version string baked in at configure time.
std::string version();

}  // namespace conelab::cli
