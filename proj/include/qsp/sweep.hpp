#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qsp/config.hpp"
#include "qsp/output.hpp"
#include "qsp/solver.hpp"

namespace qsp {

/// One swept config key and its values, from "key=v1,v2,...".
struct SweepParam {
  std::string key;
  std::vector<std::string> values;
};

SweepParam parse_sweep_param(const std::string& text);

struct SweepChild {
  std::size_t index = 0;
  std::vector<std::pair<std::string, std::string>> assignment;
  std::string dir;  ///< relative to the sweep output directory
  std::optional<Verdict> verdict;
  std::optional<double> blowup_time;
  double final_time = 0.0;
  bool checks_passed = false;
  int status = 0;     ///< exit status the child would have had alone
  std::string error;  ///< config or I/O failure
};

struct SweepReport {
  std::string base;
  std::vector<SweepParam> params;
  std::vector<SweepChild> children;  ///< cartesian order, last key fastest

  int status() const;
};

/// Every tuple of the cartesian product, in order.
std::vector<std::vector<std::pair<std::string, std::string>>> sweep_tuples(
    const std::vector<SweepParam>& params);

/// Runs each tuple in its own subdirectory on `jobs` workers and writes
/// manifest.json listing every child.
SweepReport run_sweep(const RunConfig& base, const std::vector<SweepParam>& params,
                      const std::filesystem::path& out_dir, unsigned jobs);

Json to_json(const SweepReport& report);

}  // namespace qsp
