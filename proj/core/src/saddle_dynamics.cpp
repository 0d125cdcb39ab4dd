#include "saddle/saddle_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

#include "saddle/errors.hpp"

namespace saddle {

double dimer_schedule(const DimerSchedule& schedule, double tau, std::int64_t n) {
  const double t = static_cast<double>(n) * tau;
  switch (schedule.kind) {
    case DimerDecay::exponential:
      return std::max(schedule.l_min, schedule.l0 * std::exp(-t));
    case DimerDecay::polynomial:
      return std::max(schedule.l_min, schedule.l0 / (1.0 + t * t));
  }
  return schedule.l0;
}

void SdParams::validate(Index dim) const {
  if (!(beta > 0.0) || !(gamma > 0.0) || !(tau > 0.0) || !(tol_x > 0.0) || !(schedule.l0 > 0.0) ||
      !(schedule.l_min > 0.0)) {
    throw std::invalid_argument("SdParams: beta, gamma, tau, tol_x and l0 must be positive");
  }
  if (k < 0 || k > dim) {
    throw std::invalid_argument("SdParams: index k=" + std::to_string(k) + " out of range for N=" + std::to_string(dim));
  }
  if (max_steps < 0) throw std::invalid_argument("SdParams: max_steps must be non-negative");
}

SdState make_state(Vector x, DirectionFrame frame, const SdParams& params, std::int64_t step) {
  if (frame.dim() != x.size() && frame.count() > 0) throw std::invalid_argument("make_state: frame dimension mismatch");
  if (frame.count() == 0) frame = DirectionFrame(x.size());
  return SdState{std::move(x), std::move(frame), step, dimer_schedule(params.schedule, params.tau, step)};
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::converged:
      return "converged";
    case RunStatus::max_steps:
      return "max_steps";
    case RunStatus::region_exit:
      return "region_exit";
    case RunStatus::diverged:
      return "diverged";
  }
  return "unknown";
}

namespace {

struct StepOutput {
  SdState next;
  double residual_infnorm = 0.0;
};

StepOutput step_impl(ForceOracle& force, const SdState& s, const SdParams& params) {
  const Matrix& v = s.frame.vectors();
  const Index k = v.cols();
  if (k != params.k) throw std::invalid_argument("sd_step: frame has " + std::to_string(k) + " vectors, k=" +
                                                 std::to_string(params.k));

  const Vector f = force.evaluate(s.x);
  // x_{n+1} = x_n + tau beta (I - 2 V V^T) F(x_n)
  Vector x_next = s.x + params.tau * params.beta * (f - 2.0 * v * (v.transpose() * f));

  Matrix v_tilde(v.rows(), k);
  for (Index i = 0; i < k; ++i) {
    const Vector hv = dimer_hv(force, s.x, v.col(i), s.length).hv;
    // (I - v_i v_i^T - 2 sum_{j<i} v_j v_j^T) applied to the dimer product.
    Vector d = hv - v.col(i) * v.col(i).dot(hv);
    for (Index j = 0; j < i; ++j) d -= 2.0 * v.col(j) * v.col(j).dot(hv);
    v_tilde.col(i) = v.col(i) + params.tau * params.gamma * d;
  }

  if (!x_next.allFinite() || inf_norm(x_next) > params.divergence_bound) {
    throw Diverged("sd_step: |x|_inf exceeded " + std::to_string(params.divergence_bound) + " at step " +
                   std::to_string(s.step + 1));
  }

  StepOutput out;
  out.residual_infnorm = inf_norm(f);
  out.next.x = std::move(x_next);
  out.next.frame = k > 0 ? gram_schmidt(v_tilde) : DirectionFrame(s.x.size());
  out.next.step = s.step + 1;
  out.next.length = dimer_schedule(params.schedule, params.tau, out.next.step);
  return out;
}

}  // namespace

SdState sd_step(ForceOracle& force, const SdState& state, const SdParams& params) {
  return step_impl(force, state, params).next;
}

SaddleRunResult run_sd(ForceOracle& force, const SdState& init, const SdParams& params, const TrustRegion* region,
                       const StepObserver& observer) {
  params.validate(init.x.size());
  const std::uint64_t queries_before = force.query_count();

  SaddleRunResult result;
  result.final = init;
  result.status = RunStatus::max_steps;
  if (observer) observer(init);

  SdState current = init;
  while (result.n_steps < params.max_steps) {
    StepOutput out;
    try {
      out = step_impl(force, current, params);
    } catch (const Diverged&) {
      result.status = RunStatus::diverged;
      break;
    }
    ++result.n_steps;
    if (params.record_trajectory) {
      result.trajectory.push_back({current.step, current.x, current.length, out.residual_infnorm});
    }
    result.last_step_infnorm = inf_norm(out.next.x - current.x);

    if (region != nullptr && !region->contains(out.next.x)) {
      result.status = RunStatus::region_exit;
      result.exit_point = out.next.x;
      result.exit_state = std::move(out.next);
      break;
    }
    current = std::move(out.next);
    if (observer) observer(current);
    if (result.last_step_infnorm <= params.tol_x) {
      result.status = RunStatus::converged;
      break;
    }
  }

  result.final = std::move(current);
  result.force_queries = force.query_count() - queries_before;
  return result;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
  const Index n = rows.empty() ? 0 : rows.front().x.size();
  out << "step";
  for (Index i = 0; i < n; ++i) out << ",x_" << i;
  out << ",l,residual_infnorm\n";
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (const auto& row : rows) {
    out << row.step;
    for (Index i = 0; i < row.x.size(); ++i) out << ',' << row.x(i);
    out << ',' << row.length << ',' << row.residual_infnorm << '\n';
  }
  out.precision(precision);
}

}  // namespace saddle
