#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "saddle_cli/problem.hpp"

namespace saddle::cli {

struct RunOutcome {
  SearchEngine engine = SearchEngine::sd;
  SaddleRunResult run;
  std::vector<SubproblemRecord> subproblems;  // GPSD only
  int region_updates = 0;
  bool shrink_streak_abort = false;
  std::optional<std::string> aborted;  // GPSD abort reason
  std::uint64_t n_f = 0;
  std::optional<std::uint64_t> n_s;  // simulation count (codesign)
  SaddleRecord verified;             // Hessian check at x_final on a separate oracle
};

/// Runs SD or GPSD from the problem's x0 and verifies the end point.
RunOutcome execute(const RunConfig& cfg, const Problem& problem, SearchEngine engine);

/// Result document; identical inputs give identical bytes.
nlohmann::json result_to_json(const RunConfig& cfg, const RunOutcome& outcome);

nlohmann::json vector_json(const Vector& v);

}  // namespace saddle::cli
