#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "saddle/sequential_learner.hpp"

namespace saddle {

/// A converged, index-verified stationary point.
struct SaddleRecord {
  Vector x;
  int index = 0;
  int degenerate = 0;
  Vector eigenvalues;  // of H = grad F at x, ascending
  /// Eigenvectors of the `index` largest eigenvalues, largest first.
  Matrix unstable;
  double residual_infnorm = 0.0;
  std::uint64_t n_f = 0;
  std::int64_t n_steps = 0;
  std::string engine;
};

/// Builds the Jacobian used for index verification; must be thread-safe
/// given a distinct oracle per caller.
using JacobianFn = std::function<SymmetricMatrix(ForceOracle&, const Vector&)>;
using OracleFactory = std::function<std::unique_ptr<ForceOracle>()>;

struct LandscapeProblem {
  OracleFactory make_force;
  JacobianFn jacobian;
};

/// Eigen-analysis of `x` plus the true residual |F(x)|_inf (one extra query).
/// zero_tol <= 0 selects default_zero_tol.
SaddleRecord verify_point(ForceOracle& force, const JacobianFn& jacobian, const Vector& x, double zero_tol = 0.0);

enum class SearchEngine { sd, gpsd };

std::string_view to_string(SearchEngine engine);

struct LandscapeParams {
  SearchEngine engine = SearchEngine::sd;
  SdParams sd;      // k is set per probe
  GpsdParams gpsd;  // gpsd.sd.k and gpsd.seed are set per probe
  double perturb_eps = 0.1;
  double dedup_tol = 1e-3;
  double residual_bound = 1e-6;
  double zero_tol = 0.0;
  /// Probe every m < k instead of only m = k - 1.
  bool exhaustive = false;
  int jobs = 1;
  std::size_t max_nodes = 256;
  std::uint64_t seed = 0;
};

struct ParentEdge {
  int parent = 0;
  int direction = 0;  // 0-based index into the parent's unstable directions
  int sign = 1;
  int target_index = 0;
};

struct SaddleNode {
  int id = 0;
  SaddleRecord record;
  std::vector<ParentEdge> parent_edges;

  [[nodiscard]] int index() const { return record.index; }
};

struct ProbeOutcome {
  ParentEdge spec;
  std::optional<SaddleRecord> record;  // set when the probe produced a valid child
  RunStatus status = RunStatus::max_steps;
  std::string failure;                 // reason when `record` is empty
};

struct LandscapeGraph {
  std::vector<SaddleNode> nodes;
  std::vector<ProbeOutcome> failed_probes;
  bool truncated = false;  // max_nodes reached

  [[nodiscard]] std::size_t edge_count() const;
};

/// Returns the id of a node with equal index within dedup_tol (inf-norm) of
/// the candidate, or inserts a new node.
std::pair<int, bool> register_node(LandscapeGraph& graph, const SaddleRecord& candidate, double dedup_tol);

/**
 * @brief Probes x* +/- eps v_i for m <= i < k with initial frame v_0..v_{m-1}.
 *
 * Outcomes come back in (direction, sign) order regardless of `params.jobs`.
 * Runs that fail, miss the residual bound, or land on an index >= the
 * parent's are reported without a record.
 */
std::vector<ProbeOutcome> downward_search(const SaddleNode& parent, int target_index, const LandscapeProblem& problem,
                                          const LandscapeParams& params);

/// Breadth-first downward search from `root`, highest index first.
LandscapeGraph build_landscape(const SaddleRecord& root, const LandscapeProblem& problem,
                               const LandscapeParams& params);

nlohmann::json graph_to_json(const LandscapeGraph& graph);
void write_graph_dot(std::ostream& out, const LandscapeGraph& graph);

/// landscape_<benchmark>_<seed>.<ext>
std::string landscape_filename(const std::string& benchmark, std::uint64_t seed, const std::string& ext);

}  // namespace saddle
