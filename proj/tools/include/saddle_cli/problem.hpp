#pragma once

#include <memory>
#include <optional>
#include <string>

#include "saddle/landscape.hpp"
#include "saddle_cli/config.hpp"

namespace saddle::cli {

/// Everything a run needs, resolved from a RunConfig.
struct Problem {
  std::string name;  // benchmark name used in output file names
  LandscapeProblem landscape;
  Vector x0;
  int k = 1;
  DirectionFrame frame;         // initial directions at x0
  bool degenerate_gap = false;  // top-k eigenspace at x0 not well separated
  RegionSampler sampler;        // empty: plain LHS
};

/// Throws ConfigError when the benchmark settings are inconsistent.
Problem make_problem(const RunConfig& cfg);

/// Fully resolved SD parameters (k and trajectory flag applied).
SdParams sd_params(const RunConfig& cfg, const Problem& problem);

/// Fully resolved GPSD parameters (seed, region and sampler applied).
GpsdParams gpsd_params(const RunConfig& cfg, const Problem& problem);

/// Fully resolved landscape parameters.
LandscapeParams landscape_params(const RunConfig& cfg, const Problem& problem);

}  // namespace saddle::cli
