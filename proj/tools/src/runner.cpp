#include "saddle_cli/runner.hpp"

#include "saddle/systems/codesign.hpp"

namespace saddle::cli {

nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

RunOutcome execute(const RunConfig& cfg, const Problem& problem, SearchEngine engine) {
  RunOutcome out;
  out.engine = engine;
  std::unique_ptr<ForceOracle> force = problem.landscape.make_force();

  if (engine == SearchEngine::sd) {
    const SdParams sd = sd_params(cfg, problem);
    out.run = run_sd(*force, make_state(problem.x0, problem.frame, sd), sd);
  } else {
    const GpsdParams gp = gpsd_params(cfg, problem);
    GpsdResult res;
    try {
      res = run_gpsd(*force, make_state(problem.x0, problem.frame, gp.sd), gp);
    } catch (const GpsdAborted& e) {
      res = *e.partial;
      out.aborted = e.what();
    }
    out.run = std::move(res.run);
    out.subproblems = std::move(res.subproblems);
    out.region_updates = res.region_updates;
    out.shrink_streak_abort = res.shrink_streak_abort;
  }
  out.n_f = force->query_count();
  if (const auto* plant = dynamic_cast<const systems::CodesignOracle*>(force.get())) out.n_s = plant->simulation_count();

  std::unique_ptr<ForceOracle> checker = problem.landscape.make_force();
  out.verified = verify_point(*checker, problem.landscape.jacobian, out.run.final.x);
  out.verified.n_f = out.n_f;
  out.verified.n_steps = out.run.n_steps;
  out.verified.engine = std::string(to_string(engine));
  return out;
}

nlohmann::json result_to_json(const RunConfig& cfg, const RunOutcome& o) {
  nlohmann::json j;
  j["command"] = std::string(to_string(o.engine));
  j["benchmark"] = std::string(to_string(cfg.benchmark.kind));
  j["case"] = cfg.benchmark.case_name;
  j["seed"] = cfg.seed;
  j["k"] = o.run.final.frame.count();
  j["status"] = o.aborted ? std::string("aborted") : std::string(to_string(o.run.status));
  if (o.aborted) j["abort_reason"] = *o.aborted;
  j["x_final"] = vector_json(o.run.final.x);
  j["index"] = o.verified.index;
  j["degenerate_count"] = o.verified.degenerate;
  j["eigenvalues"] = vector_json(o.verified.eigenvalues);
  j["N_f"] = o.n_f;
  if (o.n_s) j["N_s"] = *o.n_s;
  j["n_steps"] = o.run.n_steps;
  j["residual_infnorm"] = o.verified.residual_infnorm;
  j["last_step_infnorm"] = o.run.last_step_infnorm;
  if (o.engine == SearchEngine::gpsd) {
    j["subproblems"] = o.subproblems.size();
    j["region_updates"] = o.region_updates;
    j["shrink_streak_abort"] = o.shrink_streak_abort;
  }
  return j;
}

}  // namespace saddle::cli
