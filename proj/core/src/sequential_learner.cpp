#include "saddle/sequential_learner.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "saddle/errors.hpp"

namespace saddle {

std::vector<Vector> lhs_sample(const TrustRegion& region, int m, std::mt19937_64& rng) {
  if (m < 1) throw std::invalid_argument("lhs_sample: m must be positive");
  const Index n = region.center.size();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> points(static_cast<std::size_t>(m), Vector(n));
  std::vector<int> strata(static_cast<std::size_t>(m));
  const double width = 2.0 * region.half_width / m;
  for (Index d = 0; d < n; ++d) {
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    const double lo = region.center(d) - region.half_width;
    for (int j = 0; j < m; ++j) {
      const double u = unit(rng);
      const double value = lo + (strata[static_cast<std::size_t>(j)] + u) * width;
      // Round-off must not push a sample past the region boundary.
      points[static_cast<std::size_t>(j)](d) =
          std::clamp(value, region.center(d) - region.half_width, region.center(d) + region.half_width);
    }
  }
  return points;
}

void GpsdParams::validate(Index dim) const {
  sd.validate(dim);
  if (!(tol_l > 0.0) || !(tol_l < tol_u)) throw std::invalid_argument("GpsdParams: need 0 < tol_l < tol_u");
  if (n_sample < 2 || n_new < 2) throw std::invalid_argument("GpsdParams: n_sample and n_new must be >= 2");
  if (!(initial_region.half_width > 0.0)) throw std::invalid_argument("GpsdParams: trust region half-width must be positive");
  if (!(delta_min > 0.0)) throw std::invalid_argument("GpsdParams: delta_min must be positive");
}

std::string_view to_string(RegionAction action) {
  switch (action) {
    case RegionAction::enlarge:
      return "enlarge";
    case RegionAction::shrink:
      return "shrink";
    case RegionAction::keep:
      return "keep";
  }
  return "unknown";
}

namespace {

double clamp_delta(double delta, const GpsdParams& params) {
  delta = std::max(delta, params.delta_min);
  if (params.delta_max > 0.0) delta = std::min(delta, params.delta_max);
  return delta;
}

}  // namespace

RegionUpdate trust_region_update(double r, const GpsdParams& params, const TrustRegion& region,
                                 const Vector& exit_point) {
  if (r < params.tol_l) {
    return {{exit_point, clamp_delta(2.0 * region.half_width, params)}, RegionAction::enlarge};
  }
  if (r > params.tol_u) {
    return {{region.center, clamp_delta(0.5 * region.half_width, params)}, RegionAction::shrink};
  }
  return {{exit_point, clamp_delta(region.half_width, params)}, RegionAction::keep};
}

namespace {

TrainingSet query(ForceOracle& force, const std::vector<Vector>& locations, const TrainingSet& existing) {
  TrainingSet out(force.dim(), force.dim());
  for (const auto& x : locations) {
    Vector y = force.evaluate(x);
    // Queried points always count toward N_f; duplicates are only dropped from the fit.
    if (!existing.contains(x)) out.try_add(x, y);
  }
  return out;
}

FitConfig fit_config_for(const GpsdParams& params, const TrustRegion& region) {
  FitConfig cfg = params.fit;
  cfg.input_scaling = InputScaling{region.center, region.half_width};
  return cfg;
}

}  // namespace

GpsdResult run_gpsd(ForceOracle& true_force, const SdState& init, const GpsdParams& input_params) {
  GpsdParams params = input_params;
  if (params.initial_region.center.size() == 0) params.initial_region.center = init.x;
  if (params.delta_max <= 0.0) params.delta_max = 10.0 * params.initial_region.half_width;
  params.validate(init.x.size());
  if (!params.initial_region.contains(init.x)) {
    throw std::invalid_argument("run_gpsd: initial state lies outside the initial trust region");
  }
  const RegionSampler sampler = params.sampler ? params.sampler : RegionSampler(lhs_sample);

  const std::uint64_t queries_before = true_force.query_count();
  auto n_f = [&] { return true_force.query_count() - queries_before; };

  GpsdResult result;
  std::mt19937_64 rng(params.seed);
  TrustRegion region = params.initial_region;

  // Step 1: initial design.
  TrainingSet data = query(true_force, sampler(region, params.n_sample, rng), TrainingSet(init.x.size(), init.x.size()));
  auto surrogate = std::make_shared<const GpSurrogate>(fit(data, fit_config_for(params, region)));

  SdState state = init;
  std::int64_t total_steps = 0;
  int shrink_streak = 0;
  std::vector<TrajectoryRow> trajectory;

  for (int subproblem = 0;; ++subproblem) {
    // Step 2: dynamics on the surrogate inside the region.
    SdParams sd = params.sd;
    sd.max_steps = std::max<std::int64_t>(0, params.sd.max_steps - total_steps);
    SurrogateOracle model_force(surrogate);

    // Track the last iterate that would survive a shrink, for the restart.
    const TrustRegion shrunk{region.center, clamp_delta(0.5 * region.half_width, params)};
    std::optional<SdState> last_in_shrunk;
    auto observer = [&](const SdState& s) {
      if (shrunk.contains(s.x)) last_in_shrunk = s;
    };

    SaddleRunResult run = run_sd(model_force, state, sd, &region, observer);
    total_steps += run.n_steps;
    trajectory.insert(trajectory.end(), std::make_move_iterator(run.trajectory.begin()),
                      std::make_move_iterator(run.trajectory.end()));

    SubproblemRecord record;
    record.subproblem_index = subproblem;
    record.region_center = region.center;
    record.delta = region.half_width;
    record.n_steps = run.n_steps;
    record.training_points = surrogate->data().size();

    if (run.status != RunStatus::region_exit) {
      record.n_f_cumulative = n_f();
      result.subproblems.push_back(std::move(record));
      result.run = std::move(run);
      break;
    }

    // Step 3: reliability at the exit point, region update, resampling.
    const double r = surrogate->uncertainty_radius(*run.exit_point);
    const RegionUpdate update = trust_region_update(r, params, region, *run.exit_point);
    record.r = r;
    record.action = update.action;
    ++result.region_updates;

    if (update.action == RegionAction::shrink) {
      ++shrink_streak;
      if (last_in_shrunk) {
        state = *last_in_shrunk;
      } else {
        // Start state was outside the shrunk cube: project it back in.
        state = run.final;
        state.x = state.x.array()
                      .max(update.region.center.array() - update.region.half_width)
                      .min(update.region.center.array() + update.region.half_width)
                      .matrix();
      }
    } else {
      shrink_streak = 0;
      state = *run.exit_state;
    }
    region = update.region;

    const TrainingSet fresh = query(true_force, sampler(region, params.n_new, rng), TrainingSet(init.x.size(), init.x.size()));
    record.n_f_cumulative = n_f();
    result.subproblems.push_back(std::move(record));

    if (shrink_streak > params.shrink_streak_cap) {
      result.run = std::move(run);
      result.run.final = state;
      result.run.status = RunStatus::max_steps;
      result.shrink_streak_abort = true;
      break;
    }

    const auto inside = [&region](const Vector& x) { return region.contains(x); };
    TrainingSet additions(init.x.size(), init.x.size());
    for (std::size_t j = 0; j < fresh.size(); ++j) {
      if (!surrogate->data().contains(fresh.locations()[j])) {
        additions.try_add(fresh.locations()[j], fresh.observations()[j]);
      }
    }
    try {
      surrogate = std::make_shared<const GpSurrogate>(
          update_data(*surrogate, additions, inside, fit_config_for(params, region)));
    } catch (const Error& e) {
      result.run = std::move(run);
      result.run.final = state;
      result.run.n_steps = total_steps;
      result.run.force_queries = n_f();
      result.run.trajectory = std::move(trajectory);
      result.surrogate = surrogate;
      throw GpsdAborted(std::string("run_gpsd: ") + e.what(), std::move(result));
    }
  }

  result.run.n_steps = total_steps;
  result.run.force_queries = n_f();
  result.run.trajectory = std::move(trajectory);
  result.run.exit_point.reset();
  result.run.exit_state.reset();
  result.surrogate = surrogate;
  return result;
}

void write_subproblem_log(std::ostream& out, const std::vector<SubproblemRecord>& records) {
  for (const auto& rec : records) {
    nlohmann::json line{
        {"subproblem_index", rec.subproblem_index},
        {"region_center", std::vector<double>(rec.region_center.data(), rec.region_center.data() + rec.region_center.size())},
        {"delta", rec.delta},
        {"action", rec.action ? nlohmann::json(std::string(to_string(*rec.action))) : nlohmann::json(nullptr)},
        {"r", rec.r ? nlohmann::json(*rec.r) : nlohmann::json(nullptr)},
        {"n_steps", rec.n_steps},
        {"N_f_cumulative", rec.n_f_cumulative},
    };
    out << line.dump() << '\n';
  }
}

}  // namespace saddle
