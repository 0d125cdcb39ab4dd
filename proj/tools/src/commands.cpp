#include "saddle_cli/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "saddle_cli/bench.hpp"
#include "saddle_cli/runner.hpp"

namespace saddle::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonFlags {
  std::string config;
  std::string benchmark;
  std::string case_name;
  std::string file;
  std::string output_dir;
  std::string x0;
  std::optional<std::string> seed;
  std::optional<int> k;
  bool trajectory = false;
};

void add_common(CLI::App& cmd, CommonFlags& f) {
  cmd.add_option("--config", f.config, "JSON config file (sections benchmark, sd, gpsd, landscape, run)");
  cmd.add_option("--benchmark", f.benchmark, "rosenbrock | codesign | phasefield | custom-file");
  cmd.add_option("--case", f.case_name, "Benchmark case (i, ii, ...)");
  cmd.add_option("--file", f.file, "Model file for custom-file");
  cmd.add_option("--output-dir", f.output_dir, "Directory for output files");
  cmd.add_option("--x0", f.x0, "Initial point, comma separated");
  cmd.add_option("--seed", f.seed, "Seed (overrides SADDLE_SEED and the config)");
  cmd.add_option("--k", f.k, "Target index");
  cmd.add_flag("--trajectory", f.trajectory, "Write the trajectory CSV");
}

json read_json_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(what + ": cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

RunConfig resolve(const CommonFlags& f, const std::string& command) {
  json doc = json::object();
  if (!f.config.empty()) doc = read_json_file(f.config, "--config");
  if (!doc.is_object()) throw ConfigError("<root>: expected an object");

  const std::string bench = !f.benchmark.empty() ? f.benchmark : config_benchmark_name(doc).value_or("rosenbrock");
  const std::string case_name = !f.case_name.empty() ? f.case_name : config_case_name(doc).value_or("");
  RunConfig cfg = default_config(parse_benchmark(bench), case_name, command);
  if (doc.contains("benchmark") && doc["benchmark"].is_object()) {
    doc["benchmark"].erase("name");
    doc["benchmark"].erase("case");
  }
  apply_config(cfg, doc);

  if (const char* env = std::getenv("SADDLE_SEED"); env != nullptr && *env != '\0') {
    cfg.seed = parse_seed(env, "SADDLE_SEED");
  }
  if (f.seed) cfg.seed = parse_seed(*f.seed, "--seed");
  if (!f.output_dir.empty()) cfg.output_dir = f.output_dir;
  if (f.trajectory) cfg.emit_trajectory = true;
  if (!f.x0.empty()) cfg.benchmark.x0 = parse_vector(f.x0, "--x0");
  if (f.k) {
    if (*f.k < 0) throw ConfigError("--k: must be non-negative");
    cfg.benchmark.k = *f.k;
  }
  if (!f.file.empty()) cfg.benchmark.file = f.file;
  return cfg;
}

Problem checked_problem(const RunConfig& cfg) {
  Problem p = make_problem(cfg);
  try {
    sd_params(cfg, p).validate(p.x0.size());
    if (cfg.command == "gpsd" || cfg.landscape.engine == SearchEngine::gpsd) gpsd_params(cfg, p).validate(p.x0.size());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

std::string stem(const RunConfig& cfg, const std::string& engine) {
  std::string s = engine + "_" + std::string(to_string(cfg.benchmark.kind));
  if (!cfg.benchmark.case_name.empty()) s += "_" + cfg.benchmark.case_name;
  return s + "_" + std::to_string(cfg.seed);
}

fs::path output_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  return fs::path(cfg.output_dir) / name;
}

void write_text(const fs::path& path, const std::string& text, std::ostream& err) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  err << "wrote " << path.string() << "\n";
}

int run_search(const CommonFlags& f, SearchEngine engine, std::ostream& out, std::ostream& err) {
  const std::string name(to_string(engine));
  const RunConfig cfg = resolve(f, name);
  const Problem p = checked_problem(cfg);
  if (p.degenerate_gap) err << "warning: initial unstable eigenspace is not separated from the rest of the spectrum\n";

  const RunOutcome o = execute(cfg, p, engine);
  const std::string s = stem(cfg, name);
  if (cfg.emit_trajectory) {
    std::ostringstream csv;
    write_trajectory_csv(csv, o.run.trajectory);
    write_text(output_path(cfg, s + "_trajectory.csv"), csv.str(), err);
  }
  if (engine == SearchEngine::gpsd) {
    std::ostringstream log;
    write_subproblem_log(log, o.subproblems);
    write_text(output_path(cfg, s + "_subproblems.jsonl"), log.str(), err);
  }
  const std::string doc = result_to_json(cfg, o).dump(2) + "\n";
  write_text(output_path(cfg, s + ".json"), doc, err);
  out << doc;
  if (o.aborted) err << "error: " << *o.aborted << "\n";
  return !o.aborted && o.run.status == RunStatus::converged ? kSuccess : kNotConverged;
}

Vector load_point(const std::string& path, const std::string& inline_x) {
  if (!inline_x.empty()) {
    const auto v = parse_vector(inline_x, "--x");
    return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
  }
  if (path.empty()) throw ConfigError("verify-index: give --point or --x");
  json doc = read_json_file(path, "--point");
  if (doc.is_object()) {
    if (doc.contains("x_final")) {
      doc = doc["x_final"];
    } else if (doc.contains("x")) {
      doc = doc["x"];
    } else {
      throw ConfigError("--point: expected an array or an object with x_final");
    }
  }
  std::vector<double> v;
  try {
    v = doc.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw ConfigError("--point: expected an array of numbers");
  }
  if (v.empty()) throw ConfigError("--point: empty point");
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

int run_verify(const CommonFlags& f, const std::string& point, const std::string& inline_x, double zero_tol,
               std::ostream& out) {
  RunConfig cfg = resolve(f, "verify-index");
  const Vector x = load_point(point, inline_x);
  cfg.benchmark.x0.assign(x.data(), x.data() + x.size());
  cfg.benchmark.k = 0;  // no initial directions needed
  const Problem p = make_problem(cfg);
  auto oracle = p.landscape.make_force();
  const SaddleRecord rec = verify_point(*oracle, p.landscape.jacobian, x, zero_tol);
  json j;
  j["benchmark"] = std::string(to_string(cfg.benchmark.kind));
  j["case"] = cfg.benchmark.case_name;
  j["x"] = vector_json(x);
  j["index"] = rec.index;
  j["degenerate_count"] = rec.degenerate;
  j["eigenvalues"] = vector_json(rec.eigenvalues);
  j["residual_infnorm"] = rec.residual_infnorm;
  out << j.dump(2) << "\n";
  return kSuccess;
}

struct LandscapeFlags {
  std::string engine;
  std::optional<int> jobs;
  std::optional<int> max_nodes;
  bool exhaustive = false;
};

int run_landscape(const CommonFlags& f, const LandscapeFlags& lf, std::ostream& out, std::ostream& err) {
  RunConfig cfg = resolve(f, "landscape");
  if (!lf.engine.empty()) {
    if (lf.engine != "sd" && lf.engine != "gpsd") throw ConfigError("--engine: expected sd or gpsd");
    cfg.landscape.engine = lf.engine == "sd" ? SearchEngine::sd : SearchEngine::gpsd;
  }
  if (lf.jobs) {
    if (*lf.jobs < 1) throw ConfigError("--jobs: must be positive");
    cfg.landscape.jobs = *lf.jobs;
  }
  if (lf.max_nodes) {
    if (*lf.max_nodes < 1) throw ConfigError("--max-nodes: must be positive");
    cfg.landscape.max_nodes = static_cast<std::size_t>(*lf.max_nodes);
  }
  if (lf.exhaustive) cfg.landscape.exhaustive = true;
  const Problem p = checked_problem(cfg);
  const LandscapeParams ls = landscape_params(cfg, p);
  const std::string bench = std::string(to_string(cfg.benchmark.kind)) + "_" + std::string(to_string(ls.engine));

  // The root search uses the top-level sd/gpsd sections.
  const RunOutcome root = execute(cfg, p, ls.engine);
  const std::string root_doc = result_to_json(cfg, root).dump(2) + "\n";
  write_text(output_path(cfg, landscape_filename(bench, cfg.seed, "root.json")), root_doc, err);
  if (root.aborted || root.run.status != RunStatus::converged || root.verified.residual_infnorm > ls.residual_bound) {
    err << "error: root search did not reach a stationary point (status "
        << (root.aborted ? "aborted" : to_string(root.run.status)) << ", |F|_inf " << root.verified.residual_infnorm
        << ")\n";
    return kNotConverged;
  }

  const LandscapeGraph graph = build_landscape(root.verified, p.landscape, ls);
  write_text(output_path(cfg, landscape_filename(bench, cfg.seed, "json")), graph_to_json(graph).dump(2) + "\n", err);
  std::ostringstream dot;
  write_graph_dot(dot, graph);
  write_text(output_path(cfg, landscape_filename(bench, cfg.seed, "dot")), dot.str(), err);

  std::map<int, int> per_index;
  for (const auto& n : graph.nodes) ++per_index[n.index()];
  out << "nodes " << graph.nodes.size() << ", edges " << graph.edge_count() << ", failed probes "
      << graph.failed_probes.size() << (graph.truncated ? ", truncated" : "") << "\n";
  for (auto it = per_index.rbegin(); it != per_index.rend(); ++it) out << "index " << it->first << ": " << it->second << "\n";
  return kSuccess;
}

int run_bench_command(const std::string& table, int seeds, const std::optional<std::string>& seed, int jobs,
                      const std::string& json_path, std::ostream& out, std::ostream& err) {
  BenchOptions o;
  o.seeds = seeds;
  o.jobs = jobs;
  if (seeds < 1) throw ConfigError("--seeds: must be positive");
  if (jobs < 1) throw ConfigError("--jobs: must be positive");
  if (const char* env = std::getenv("SADDLE_SEED"); env != nullptr && *env != '\0') o.base_seed = parse_seed(env, "SADDLE_SEED");
  if (seed) o.base_seed = parse_seed(*seed, "--seed");
  if (table != "all" && std::find(bench_tables().begin(), bench_tables().end(), table) == bench_tables().end()) {
    throw ConfigError("--table: unknown table '" + table + "'");
  }
  const auto rows = run_bench(table, o);
  print_bench(out, rows);
  if (!json_path.empty()) write_text(json_path, bench_to_json(rows).dump(2) + "\n", err);
  const bool all = std::all_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.pass; });
  return all ? kSuccess : kNotConverged;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Saddle point search with saddle dynamics and Gaussian process surrogates", "saddle"};
  app.require_subcommand(1);

  CommonFlags sd_flags, gpsd_flags, verify_flags, land_flags;
  auto* sd = app.add_subcommand("sd", "Saddle dynamics on the true force");
  add_common(*sd, sd_flags);
  auto* gpsd = app.add_subcommand("gpsd", "Saddle dynamics on a trust-region GP surrogate");
  add_common(*gpsd, gpsd_flags);

  auto* verify = app.add_subcommand("verify-index", "Morse index and residual at a point");
  add_common(*verify, verify_flags);
  std::string point, inline_x;
  double zero_tol = 0.0;
  verify->add_option("--point", point, "JSON file with an array or a result document");
  verify->add_option("--x", inline_x, "Point, comma separated");
  verify->add_option("--zero-tol", zero_tol, "Eigenvalue zero tolerance (default: relative)");

  auto* land = app.add_subcommand("landscape", "Downward search from a root saddle");
  add_common(*land, land_flags);
  LandscapeFlags lf;
  land->add_option("--engine", lf.engine, "sd | gpsd");
  land->add_option("--jobs", lf.jobs, "Worker threads for probes");
  land->add_option("--max-nodes", lf.max_nodes, "Node cap");
  land->add_flag("--exhaustive", lf.exhaustive, "Probe every lower index, not only index - 1");

  auto* bench = app.add_subcommand("bench", "Reproduce a reference table and compare");
  std::string table = "all", json_path;
  int seeds = 10, jobs = 1;
  std::optional<std::string> bench_seed;
  bench->add_option("--table", table, "rosenbrock-index | rosenbrock-error | rosenbrock-queries | codesign | phasefield | all");
  bench->add_option("--seeds", seeds, "Seeds per GPSD row");
  bench->add_option("--seed", bench_seed, "First seed");
  bench->add_option("--jobs", jobs, "Parallel seeds");
  bench->add_option("--json", json_path, "Also write the rows as JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (*sd) return run_search(sd_flags, SearchEngine::sd, out, err);
    if (*gpsd) return run_search(gpsd_flags, SearchEngine::gpsd, out, err);
    if (*verify) return run_verify(verify_flags, point, inline_x, zero_tol, out);
    if (*land) return run_landscape(land_flags, lf, out, err);
    if (*bench) return run_bench_command(table, seeds, bench_seed, jobs, json_path, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace saddle::cli
