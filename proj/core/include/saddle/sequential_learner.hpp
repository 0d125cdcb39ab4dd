#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "saddle/errors.hpp"
#include "saddle/gp_surrogate.hpp"
#include "saddle/saddle_dynamics.hpp"

namespace saddle {

/// Produces `m` sample locations inside a trust region.
using RegionSampler = std::function<std::vector<Vector>(const TrustRegion&, int m, std::mt19937_64&)>;

/// Latin hypercube design: per coordinate, one point in each of m equal strata
/// of [c - delta, c + delta], uniformly jittered, strata permuted independently.
std::vector<Vector> lhs_sample(const TrustRegion& region, int m, std::mt19937_64& rng);

struct GpsdParams {
  SdParams sd;
  double tol_l = 0.05;
  double tol_u = 0.15;
  int n_sample = 100;
  int n_new = 100;
  /// Center defaults to the initial state when empty.
  TrustRegion initial_region;
  std::uint64_t seed = 0;
  double delta_min = 1e-4;
  /// Defaults to 10 x initial half-width when <= 0.
  double delta_max = 0.0;
  int shrink_streak_cap = 8;
  FitConfig fit;
  /// Defaults to lhs_sample.
  RegionSampler sampler;

  void validate(Index dim) const;
};

enum class RegionAction { enlarge, shrink, keep };

std::string_view to_string(RegionAction action);

struct RegionUpdate {
  TrustRegion region;
  RegionAction action = RegionAction::keep;
};

/// r < tol_l: recenter and double; r > tol_u: halve in place; else recenter.
/// Half-width clamped to [delta_min, delta_max] (delta_max <= 0 means unbounded).
RegionUpdate trust_region_update(double r, const GpsdParams& params, const TrustRegion& region,
                                 const Vector& exit_point);

/// One entry of the run log (one per subproblem).
struct SubproblemRecord {
  int subproblem_index = 0;
  Vector region_center;
  double delta = 0.0;
  std::optional<RegionAction> action;  // empty for the terminating subproblem
  std::optional<double> r;
  std::int64_t n_steps = 0;
  std::uint64_t n_f_cumulative = 0;
  std::size_t training_points = 0;
};

struct GpsdResult {
  SaddleRunResult run;  // force_queries = true-force queries (N_f)
  std::vector<SubproblemRecord> subproblems;
  std::shared_ptr<const GpSurrogate> surrogate;
  int region_updates = 0;
  bool shrink_streak_abort = false;
};

/// Thrown when the surrogate cannot be fitted mid-run; carries the partial result.
struct GpsdAborted : Error {
  GpsdAborted(const std::string& what, GpsdResult partial_result)
      : Error(what), partial(std::make_shared<GpsdResult>(std::move(partial_result))) {}
  std::shared_ptr<GpsdResult> partial;
};

/// Sequential-learning saddle dynamics: shrinking-dimer dynamics on a GP
/// surrogate trained inside a moving hypercube trust region.
GpsdResult run_gpsd(ForceOracle& true_force, const SdState& init, const GpsdParams& params);

/// JSON-lines run log, one record per subproblem.
void write_subproblem_log(std::ostream& out, const std::vector<SubproblemRecord>& records);

}  // namespace saddle
