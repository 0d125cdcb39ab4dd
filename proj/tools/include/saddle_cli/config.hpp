#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "saddle/landscape.hpp"
#include "saddle/systems/phasefield.hpp"
#include "saddle/systems/rosenbrock.hpp"

namespace saddle::cli {

/// Invalid configuration; the message names the offending key path.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BenchmarkKind { rosenbrock, codesign, phasefield, custom_file };

std::string_view to_string(BenchmarkKind kind);
BenchmarkKind parse_benchmark(std::string_view name);

struct BenchmarkConfig {
  BenchmarkKind kind = BenchmarkKind::rosenbrock;
  /// rosenbrock: i-iv (coefficients); codesign: i-iii (x0); phasefield: i-iii (1/eta^2 and index).
  std::string case_name;
  systems::RosenbrockParams rosenbrock;
  systems::PhaseFieldConfig phasefield;
  std::string file;                // custom-file model
  std::vector<double> x0;          // empty: benchmark default
  std::optional<int> k;            // empty: benchmark default
  double fd_step = 1e-5;
};

struct RunConfig {
  std::string command;
  BenchmarkConfig benchmark;
  SdParams sd;
  GpsdParams gpsd;
  LandscapeParams landscape;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  bool emit_trajectory = false;
};

/// Built-in parameter set for a benchmark, case and subcommand.
RunConfig default_config(BenchmarkKind kind, const std::string& case_name, const std::string& command);

/**
 * @brief Overlays a config document with sections benchmark, sd, gpsd,
 * landscape and run. Unknown keys and ill-typed values raise ConfigError.
 */
void apply_config(RunConfig& cfg, const nlohmann::json& doc);

/// Reads benchmark.name / benchmark.case from a config document, if present.
std::optional<std::string> config_benchmark_name(const nlohmann::json& doc);
std::optional<std::string> config_case_name(const nlohmann::json& doc);

/// Parses an unsigned seed (SADDLE_SEED and --seed).
std::uint64_t parse_seed(const std::string& text, const std::string& origin);

/// Parses "1,2,3" into numbers.
std::vector<double> parse_vector(const std::string& text, const std::string& origin);

}  // namespace saddle::cli
