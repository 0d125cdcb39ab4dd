#include <algorithm>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "saddle/landscape.hpp"
#include "saddle/systems/quartic.hpp"

using namespace saddle;

namespace {

// E = sum_i h_i x_i^2 / 2 + q_i x_i^4 / 4
LandscapeProblem quartic_problem(const Vector& h, const Vector& q) {
  systems::QuarticModel model{Matrix(h.asDiagonal()), Vector::Zero(h.size()), q};
  LandscapeProblem p;
  p.make_force = [model] { return std::make_unique<systems::QuarticOracle>(model); };
  p.jacobian = [model](ForceOracle&, const Vector& x) {
    Matrix j = -model.hessian;
    j.diagonal() -= (3.0 * model.quartic.array() * x.array().square()).matrix();
    return SymmetricMatrix(j);
  };
  return p;
}

LandscapeParams sd_params() {
  LandscapeParams p;
  p.sd.tau = 0.05;
  p.sd.schedule = {DimerDecay::polynomial, 0.05};
  p.sd.tol_x = 1e-9;
  p.residual_bound = 1e-6;
  p.dedup_tol = 1e-3;
  p.perturb_eps = 0.1;
  p.gpsd.sd = p.sd;
  p.gpsd.n_sample = p.gpsd.n_new = 30;
  p.gpsd.initial_region.half_width = 0.1;
  return p;
}

SaddleRecord root_of(const LandscapeProblem& problem, Index n) {
  auto f = problem.make_force();
  return verify_point(*f, problem.jacobian, Vector::Zero(n));
}

std::vector<std::pair<int, std::vector<long>>> signature(const LandscapeGraph& g) {
  std::vector<std::pair<int, std::vector<long>>> out;
  for (const auto& n : g.nodes) {
    std::vector<long> rounded;
    for (Index i = 0; i < n.record.x.size(); ++i) rounded.push_back(std::lround(n.record.x(i) * 100.0));
    out.emplace_back(n.index(), rounded);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("verify_point reports index, eigenvalues and residual") {
  const LandscapeProblem p = quartic_problem(Vector{{-1.0, 2.0}}, Vector{{1.0, 0.0}});
  const SaddleRecord root = root_of(p, 2);
  CHECK(root.index == 1);
  CHECK(root.degenerate == 0);
  CHECK(root.residual_infnorm == 0.0);
  CHECK(root.eigenvalues(0) == doctest::Approx(-2.0));
  CHECK(root.eigenvalues(1) == doctest::Approx(1.0));
  REQUIRE(root.unstable.cols() == 1);
  CHECK(std::abs(root.unstable(0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("double well: one saddle above two minima") {
  const LandscapeProblem p = quartic_problem(Vector{{-1.0, 1.0}}, Vector{{1.0, 0.0}});
  const LandscapeGraph g = build_landscape(root_of(p, 2), p, sd_params());
  REQUIRE(g.nodes.size() == 3);
  CHECK(g.edge_count() == 2);
  CHECK(g.failed_probes.empty());
  CHECK(g.nodes[0].index() == 1);
  std::vector<double> minima;
  for (const auto& n : g.nodes) {
    if (n.index() == 0) minima.push_back(n.record.x(0));
  }
  std::sort(minima.begin(), minima.end());
  REQUIRE(minima.size() == 2);
  CHECK(minima[0] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(minima[1] == doctest::Approx(1.0).epsilon(1e-6));
}

// H = -grad^2 E at the origin is diag(1, 2, -1): v_1 = e_2, v_2 = e_1.
// Target-1 probes perturb along v_2 only and keep v_1 as the frame, so they
// reach (+-1, 0, 0); each of those has e_2 as its single unstable direction.
TEST_CASE("index-2 root spawns two index-1 saddles and four minima") {
  const LandscapeProblem p = quartic_problem(Vector{{-1.0, -2.0, 1.0}}, Vector{{1.0, 2.0, 0.0}});
  const LandscapeGraph g = build_landscape(root_of(p, 3), p, sd_params());
  int count[3] = {0, 0, 0};
  for (const auto& n : g.nodes) ++count[n.index()];
  CHECK(count[2] == 1);
  CHECK(count[1] == 2);
  CHECK(count[0] == 4);
  CHECK(g.failed_probes.empty());
  for (const auto& n : g.nodes) {
    if (n.index() == 1) {
      CHECK(std::abs(n.record.x(0)) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(std::abs(n.record.x(1)) < 1e-6);
      REQUIRE(n.parent_edges.size() == 1);
      CHECK(n.parent_edges[0].parent == 0);
      CHECK(n.parent_edges[0].direction == 1);
    }
    if (n.index() == 0) {
      CHECK(std::abs(n.record.x(0)) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(std::abs(n.record.x(1)) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(n.parent_edges.size() == 1);
    }
  }
}

// Gradient-flow probes from the root start on an eigen-axis, which is
// invariant, so they stop at the axis saddles; (0, +-1, 0) then feed the
// minima a second time.
TEST_CASE("exhaustive search adds the saddles on the other axis") {
  const LandscapeProblem p = quartic_problem(Vector{{-1.0, -2.0, 1.0}}, Vector{{1.0, 2.0, 0.0}});
  LandscapeParams params = sd_params();
  params.exhaustive = true;
  const LandscapeGraph g = build_landscape(root_of(p, 3), p, params);
  REQUIRE(g.nodes.size() == 9);
  CHECK(g.edge_count() == 14);
  int axis_saddles = 0;
  for (const auto& n : g.nodes) {
    if (n.index() == 1 && std::abs(n.record.x(0)) < 1e-6) {
      ++axis_saddles;
      CHECK(std::abs(n.record.x(1)) == doctest::Approx(1.0).epsilon(1e-6));
      REQUIRE(n.parent_edges.size() == 1);
      CHECK(n.parent_edges[0].target_index == 0);
    }
    if (n.index() == 0) CHECK(n.parent_edges.size() == 2);
  }
  CHECK(axis_saddles == 2);
}

TEST_CASE("worker count does not change the graph" * doctest::test_suite("invariants")) {
  const LandscapeProblem p = quartic_problem(Vector{{-1.0, -2.0, 1.0}}, Vector{{1.0, 2.0, 0.0}});
  LandscapeParams params = sd_params();
  const std::string serial = graph_to_json(build_landscape(root_of(p, 3), p, params)).dump();
  params.jobs = 4;
  CHECK(graph_to_json(build_landscape(root_of(p, 3), p, params)).dump() == serial);
}

TEST_CASE("SD and GPSD landscapes have the same nodes") {
  const LandscapeProblem p = quartic_problem(Vector{{-1.0, 1.0}}, Vector{{1.0, 0.0}});
  LandscapeParams params = sd_params();
  params.residual_bound = 1e-3;
  const LandscapeGraph sd = build_landscape(root_of(p, 2), p, params);
  params.engine = SearchEngine::gpsd;
  const LandscapeGraph gp = build_landscape(root_of(p, 2), p, params);
  CHECK(signature(sd) == signature(gp));
  CHECK(gp.nodes[1].record.engine == "gpsd");
}

TEST_CASE("register_node deduplicates by index and distance") {
  LandscapeGraph g;
  SaddleRecord a;
  a.x = Vector{{1.0, 0.0}};
  a.index = 0;
  CHECK(register_node(g, a, 1e-3) == std::pair<int, bool>{0, true});
  SaddleRecord near = a;
  near.x(0) += 5e-4;
  CHECK(register_node(g, near, 1e-3) == std::pair<int, bool>{0, false});
  SaddleRecord other_index = a;
  other_index.index = 1;
  CHECK(register_node(g, other_index, 1e-3) == std::pair<int, bool>{1, true});
  CHECK(register_node(g, a, 1e-3) == std::pair<int, bool>{0, false});
  CHECK(g.nodes.size() == 2);
}

TEST_CASE("probes that do not lower the index are rejected") {
  const LandscapeProblem p = quartic_problem(Vector{{-1.0, 1.0}}, Vector{{1.0, 0.0}});
  LandscapeParams params = sd_params();
  params.sd.max_steps = 3;  // too short to converge
  const LandscapeGraph g = build_landscape(root_of(p, 2), p, params);
  CHECK(g.nodes.size() == 1);
  CHECK(g.failed_probes.size() == 2);
  CHECK_FALSE(g.failed_probes[0].failure.empty());
  SaddleNode parent{0, root_of(p, 2), {}};
  CHECK_THROWS_AS(downward_search(parent, 1, p, params), std::invalid_argument);
}

TEST_CASE("max_nodes truncates the graph") {
  const LandscapeProblem p = quartic_problem(Vector{{-1.0, -2.0, 1.0}}, Vector{{1.0, 2.0, 0.0}});
  LandscapeParams params = sd_params();
  params.max_nodes = 3;
  const LandscapeGraph g = build_landscape(root_of(p, 3), p, params);
  CHECK(g.nodes.size() == 3);
  CHECK(g.truncated);
}

TEST_CASE("graph JSON and DOT output") {
  const LandscapeProblem p = quartic_problem(Vector{{-1.0, 1.0}}, Vector{{1.0, 0.0}});
  const LandscapeGraph g = build_landscape(root_of(p, 2), p, sd_params());
  const nlohmann::json j = graph_to_json(g);
  REQUIRE(j["nodes"].size() == 3);
  CHECK(j["edges"].size() == 2);
  CHECK(j["nodes"][0]["index"] == 1);
  CHECK(j["nodes"][0]["x"].size() == 2);
  CHECK(j["edges"][0]["from"] == 0);
  CHECK(j["truncated"] == false);
  std::ostringstream dot;
  write_graph_dot(dot, g);
  const std::string s = dot.str();
  CHECK(s.rfind("digraph landscape {", 0) == 0);
  CHECK(s.find("n0 -> n1") != std::string::npos);
  CHECK(s.find("idx=1") != std::string::npos);
  CHECK(landscape_filename("phasefield", 7, "json") == "landscape_phasefield_7.json");
}
