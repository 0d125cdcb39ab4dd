#include "saddle/landscape.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "saddle/errors.hpp"

namespace saddle {

SaddleRecord verify_point(ForceOracle& force, const JacobianFn& jacobian, const Vector& x, double zero_tol) {
  SaddleRecord rec;
  rec.x = x;
  rec.residual_infnorm = inf_norm(force.evaluate(x));
  const EigenDecomposition eig = sym_eigen(jacobian(force, x));
  const double tol = zero_tol > 0.0 ? zero_tol : default_zero_tol(eig);
  const MorseIndex mi = morse_index(eig, tol);
  rec.index = mi.index;
  rec.degenerate = mi.degenerate;
  rec.eigenvalues = eig.values;
  const Index n = x.size();
  rec.unstable.resize(n, rec.index);
  for (int i = 0; i < rec.index; ++i) rec.unstable.col(i) = eig.vectors.col(n - 1 - i);
  return rec;
}

std::string_view to_string(SearchEngine engine) { return engine == SearchEngine::sd ? "sd" : "gpsd"; }

std::size_t LandscapeGraph::edge_count() const {
  std::size_t count = 0;
  for (const auto& node : nodes) count += node.parent_edges.size();
  return count;
}

std::pair<int, bool> register_node(LandscapeGraph& graph, const SaddleRecord& candidate, double dedup_tol) {
  if (!(dedup_tol > 0.0)) throw std::invalid_argument("register_node: dedup_tol must be positive");
  for (const auto& node : graph.nodes) {
    if (node.record.index == candidate.index && node.record.x.size() == candidate.x.size() &&
        inf_norm(node.record.x - candidate.x) <= dedup_tol) {
      return {node.id, false};
    }
  }
  const int id = static_cast<int>(graph.nodes.size());
  graph.nodes.push_back({id, candidate, {}});
  return {id, true};
}

namespace {

std::uint64_t probe_seed(std::uint64_t seed, const SaddleRecord& parent, const ParentEdge& spec) {
  // Depends on the parent location, not its id, so SD and GPSD graphs seed alike.
  std::uint64_t h = seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  };
  mix(static_cast<std::uint64_t>(parent.index));
  mix(static_cast<std::uint64_t>(spec.direction));
  mix(static_cast<std::uint64_t>(spec.sign + 1));
  mix(static_cast<std::uint64_t>(spec.target_index));
  return h;
}

ProbeOutcome run_probe(const SaddleRecord& parent, const ParentEdge& spec, const LandscapeProblem& problem,
                       const LandscapeParams& params) {
  ProbeOutcome out;
  out.spec = spec;
  try {
    std::unique_ptr<ForceOracle> force = problem.make_force();
    const Vector x0 = parent.x + spec.sign * params.perturb_eps * parent.unstable.col(spec.direction);
    const DirectionFrame frame = DirectionFrame::from_orthonormal(parent.unstable.leftCols(spec.target_index), 1e-8);

    SaddleRunResult run;
    if (params.engine == SearchEngine::sd) {
      SdParams sd = params.sd;
      sd.k = spec.target_index;
      run = run_sd(*force, make_state(x0, frame, sd), sd);
    } else {
      GpsdParams gp = params.gpsd;
      gp.sd.k = spec.target_index;
      gp.seed = probe_seed(params.seed, parent, spec);
      gp.initial_region.center = Vector();
      run = run_gpsd(*force, make_state(x0, frame, gp.sd), gp).run;
    }
    out.status = run.status;
    if (run.status != RunStatus::converged) {
      out.failure = "run ended with status " + std::string(to_string(run.status));
      return out;
    }
    SaddleRecord rec = verify_point(*force, problem.jacobian, run.final.x, params.zero_tol);
    rec.n_f = run.force_queries;
    rec.n_steps = run.n_steps;
    rec.engine = std::string(to_string(params.engine));
    if (rec.residual_infnorm > params.residual_bound) {
      out.failure = "residual above bound";
    } else if (rec.index >= parent.index) {
      out.failure = "index not below parent";
    } else {
      out.record = std::move(rec);
    }
  } catch (const GpsdAborted& e) {
    out.failure = e.what();
  } catch (const Error& e) {
    out.status = RunStatus::diverged;
    out.failure = e.what();
  }
  return out;
}

}  // namespace

std::vector<ProbeOutcome> downward_search(const SaddleNode& parent, int target_index, const LandscapeProblem& problem,
                                          const LandscapeParams& params) {
  const int k = parent.record.index;
  if (target_index < 0 || target_index >= k) {
    throw std::invalid_argument("downward_search: target index must lie in [0, parent index)");
  }
  if (!(params.perturb_eps > 0.0)) throw std::invalid_argument("downward_search: perturb_eps must be positive");

  std::vector<ParentEdge> specs;
  for (int i = target_index; i < k; ++i) {
    for (int sign : {1, -1}) specs.push_back({parent.id, i, sign, target_index});
  }
  std::vector<ProbeOutcome> outcomes(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < specs.size(); j = next++) {
      outcomes[j] = run_probe(parent.record, specs[j], problem, params);
    }
  };
  const auto threads = static_cast<std::size_t>(std::clamp(params.jobs, 1, static_cast<int>(specs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return outcomes;
}

LandscapeGraph build_landscape(const SaddleRecord& root, const LandscapeProblem& problem,
                               const LandscapeParams& params) {
  LandscapeGraph graph;
  register_node(graph, root, params.dedup_tol);
  // Pending parents ordered by (descending index, id).
  std::map<std::pair<int, int>, int> pending;
  pending[{-root.index, 0}] = 0;
  while (!pending.empty()) {
    const int id = pending.begin()->second;
    pending.erase(pending.begin());
    const int k = graph.nodes[static_cast<std::size_t>(id)].record.index;
    const int lowest = params.exhaustive ? 0 : k - 1;
    for (int m = k - 1; m >= lowest && m >= 0; --m) {
      // Copy: registration below may reallocate the node list.
      const SaddleNode parent = graph.nodes[static_cast<std::size_t>(id)];
      for (auto& outcome : downward_search(parent, m, problem, params)) {
        if (!outcome.record) {
          graph.failed_probes.push_back(std::move(outcome));
          continue;
        }
        if (graph.nodes.size() >= params.max_nodes) {
          graph.truncated = true;
          continue;
        }
        const auto [child, is_new] = register_node(graph, *outcome.record, params.dedup_tol);
        graph.nodes[static_cast<std::size_t>(child)].parent_edges.push_back(outcome.spec);
        if (is_new && outcome.record->index > 0) pending[{-outcome.record->index, child}] = child;
      }
    }
  }
  return graph;
}

nlohmann::json graph_to_json(const LandscapeGraph& graph) {
  using nlohmann::json;
  json nodes = json::array();
  json edges = json::array();
  for (const auto& node : graph.nodes) {
    const auto& r = node.record;
    nodes.push_back({{"id", node.id},
                     {"index", r.index},
                     {"degenerate", r.degenerate},
                     {"x", std::vector<double>(r.x.data(), r.x.data() + r.x.size())},
                     {"eigenvalues", std::vector<double>(r.eigenvalues.data(), r.eigenvalues.data() + r.eigenvalues.size())},
                     {"N_f", r.n_f},
                     {"n_steps", r.n_steps},
                     {"residual_infnorm", r.residual_infnorm},
                     {"engine", r.engine}});
    for (const auto& e : node.parent_edges) {
      edges.push_back({{"from", e.parent}, {"to", node.id}, {"direction", e.direction}, {"sign", e.sign},
                       {"target_index", e.target_index}});
    }
  }
  json failed = json::array();
  for (const auto& p : graph.failed_probes) {
    failed.push_back({{"parent", p.spec.parent}, {"direction", p.spec.direction}, {"sign", p.spec.sign},
                      {"target_index", p.spec.target_index}, {"status", std::string(to_string(p.status))},
                      {"reason", p.failure}});
  }
  return {{"nodes", nodes}, {"edges", edges}, {"failed_probes", failed}, {"truncated", graph.truncated}};
}

void write_graph_dot(std::ostream& out, const LandscapeGraph& graph) {
  out << "digraph landscape {\n  rankdir=TB;\n  node [shape=ellipse];\n";
  std::map<int, std::vector<int>, std::greater<>> by_index;
  for (const auto& node : graph.nodes) by_index[node.record.index].push_back(node.id);
  for (const auto& [index, ids] : by_index) {
    out << "  { rank=same;";
    for (int id : ids) out << " n" << id << ";";
    out << " }\n";
  }
  for (const auto& node : graph.nodes) out << "  n" << node.id << " [label=\"idx=" << node.record.index << "\"];\n";
  for (const auto& node : graph.nodes) {
    for (const auto& e : node.parent_edges) {
      out << "  n" << e.parent << " -> n" << node.id << " [label=\"v" << e.direction << (e.sign > 0 ? "+" : "-")
          << "\"];\n";
    }
  }
  out << "}\n";
}

std::string landscape_filename(const std::string& benchmark, std::uint64_t seed, const std::string& ext) {
  return "landscape_" + benchmark + "_" + std::to_string(seed) + "." + ext;
}

}  // namespace saddle
