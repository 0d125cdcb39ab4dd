#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "saddle/force_model.hpp"
#include "saddle/linalg.hpp"
#include "saddle/types.hpp"

namespace saddle {

enum class DimerDecay { exponential, polynomial };

/// Closed-form dimer length l_n as a function of the step index.
struct DimerSchedule {
  DimerDecay kind = DimerDecay::polynomial;
  double l0 = 0.01;
  /// Floor on l_n. Below it the central difference loses all significant
  /// digits to cancellation and the direction update turns into noise.
  double l_min = 1e-8;
};

/// exponential: l0 e^{-n tau};  polynomial: l0 / (1 + (n tau)^2); both floored at l_min
double dimer_schedule(const DimerSchedule& schedule, double tau, std::int64_t n);

struct SdParams {
  double beta = 1.0;
  double gamma = 1.0;
  double tau = 0.01;
  int k = 1;
  DimerSchedule schedule;
  double tol_x = 1e-6;
  std::int64_t max_steps = 20000;
  /// Diverged is raised once |x|_inf exceeds this.
  double divergence_bound = 1e6;
  bool record_trajectory = false;

  void validate(Index dim) const;
};

struct SdState {
  Vector x;
  DirectionFrame frame;
  std::int64_t step = 0;
  double length = 0.0;
};

/// State at step `step` with the dimer length taken from the schedule.
SdState make_state(Vector x, DirectionFrame frame, const SdParams& params, std::int64_t step = 0);

enum class RunStatus { converged, max_steps, region_exit, diverged };

std::string_view to_string(RunStatus status);

/// Hypercube {x : |x - center|_inf <= half_width}.
struct TrustRegion {
  Vector center;
  double half_width = 1.0;

  [[nodiscard]] bool contains(const Vector& x) const { return inf_norm(x - center) <= half_width; }
};

struct TrajectoryRow {
  std::int64_t step = 0;
  Vector x;
  double length = 0.0;
  double residual_infnorm = 0.0;  // |F(x_step)|_inf
};

struct SaddleRunResult {
  SdState final;
  RunStatus status = RunStatus::max_steps;
  /// First iterate outside the region (case a), together with its full state.
  std::optional<Vector> exit_point;
  std::optional<SdState> exit_state;
  std::int64_t n_steps = 0;
  std::uint64_t force_queries = 0;
  /// |x_n - x_{n-1}|_inf of the last step taken.
  double last_step_infnorm = 0.0;
  std::vector<TrajectoryRow> trajectory;
};

/// One explicit step of the shrinking-dimer scheme; 1 + 2k queries of `force`.
SdState sd_step(ForceOracle& force, const SdState& state, const SdParams& params);

using StepObserver = std::function<void(const SdState&)>;

/**
 * @brief Iterates sd_step until the iterate leaves `region` (if given), the step
 * budget `params.max_steps` is exhausted, or the step falls below tol_x.
 *
 * On region exit, `final` is the last state inside the region and
 * `exit_state` the state that left it. Divergence is reported as a status,
 * with `final` holding the last finite state. `observer` sees every accepted
 * in-region state, including the initial one.
 */
SaddleRunResult run_sd(ForceOracle& force, const SdState& init, const SdParams& params,
                       const TrustRegion* region = nullptr, const StepObserver& observer = {});

/// CSV with header: step,x_0..x_{N-1},l,residual_infnorm
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows);

}  // namespace saddle
