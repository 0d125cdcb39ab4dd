#include <algorithm>
#include <numeric>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "saddle/sequential_learner.hpp"

using namespace saddle;

namespace {

FunctionOracle saddle_2d() {
  // E = -x^2/2 + y^2 + x^4/4: index-1 saddle at the origin, minima at (+-1, 0).
  return FunctionOracle(2, [](const Vector& x) { return Vector{{x(0) - x(0) * x(0) * x(0), -2.0 * x(1)}}; });
}

GpsdParams gpsd_defaults(std::uint64_t seed) {
  GpsdParams g;
  g.sd.k = 1;
  g.sd.tau = 0.02;
  g.sd.schedule = {DimerDecay::polynomial, 0.02};
  g.sd.tol_x = 1e-7;
  g.sd.max_steps = 20000;
  g.n_sample = g.n_new = 20;
  g.initial_region.half_width = 0.1;
  g.seed = seed;
  return g;
}

SdState start(const GpsdParams& g) {
  return make_state(Vector{{0.3, 0.2}}, gram_schmidt(Vector{{1.0, 0.3}}), g.sd);
}

}  // namespace

TEST_CASE("LHS puts exactly one point in every stratum of every coordinate" * doctest::test_suite("invariants")) {
  std::mt19937_64 rng(123);
  for (int m : {1, 2, 7, 50}) {
    const TrustRegion region{Vector{{0.5, -1.0, 2.0}}, 0.25};
    const auto pts = lhs_sample(region, m, rng);
    REQUIRE(pts.size() == static_cast<std::size_t>(m));
    for (Index d = 0; d < 3; ++d) {
      std::vector<int> strata;
      for (const auto& x : pts) {
        CHECK(region.contains(x));
        const double lo = region.center(d) - region.half_width;
        strata.push_back(std::min(m - 1, static_cast<int>((x(d) - lo) / (2.0 * region.half_width / m))));
      }
      std::sort(strata.begin(), strata.end());
      std::vector<int> expected(static_cast<std::size_t>(m));
      std::iota(expected.begin(), expected.end(), 0);
      CHECK(strata == expected);
    }
  }
}

TEST_CASE("LHS is reproducible from the generator state" * doctest::test_suite("invariants")) {
  std::mt19937_64 a(9), b(9);
  const TrustRegion region{Vector::Zero(4), 1.0};
  const auto pa = lhs_sample(region, 10, a);
  const auto pb = lhs_sample(region, 10, b);
  for (std::size_t j = 0; j < pa.size(); ++j) CHECK(pa[j] == pb[j]);
  CHECK_THROWS(lhs_sample(region, 0, a));
}

TEST_CASE("trust-region update truth table" * doctest::test_suite("invariants")) {
  GpsdParams g;
  g.tol_l = 0.05;
  g.tol_u = 0.15;
  g.delta_min = 1e-3;
  g.delta_max = 1.0;
  const TrustRegion region{Vector{{0.0, 0.0}}, 0.1};
  const Vector exit{{0.1, 0.05}};

  struct Row {
    double r;
    RegionAction action;
    bool recentre;
    double delta;
  };
  for (const Row& row : {Row{0.01, RegionAction::enlarge, true, 0.2}, Row{0.05, RegionAction::keep, true, 0.1},
                         Row{0.1, RegionAction::keep, true, 0.1}, Row{0.15, RegionAction::keep, true, 0.1},
                         Row{0.2, RegionAction::shrink, false, 0.05}}) {
    const RegionUpdate u = trust_region_update(row.r, g, region, exit);
    CHECK(u.action == row.action);
    CHECK(u.region.half_width == doctest::Approx(row.delta));
    CHECK(u.region.center == (row.recentre ? exit : region.center));
  }
  // Clamping at both ends.
  CHECK(trust_region_update(0.0, g, TrustRegion{exit, 0.8}, exit).region.half_width == 1.0);
  CHECK(trust_region_update(1.0, g, TrustRegion{exit, 1.5e-3}, exit).region.half_width == 1e-3);
  CHECK(to_string(RegionAction::shrink) == "shrink");
}

TEST_CASE("GPSD converges to the saddle of a two-dimensional double well") {
  FunctionOracle f = saddle_2d();
  const GpsdParams g = gpsd_defaults(1);
  const GpsdResult r = run_gpsd(f, start(g), g);
  CHECK(r.run.status == RunStatus::converged);
  CHECK(inf_norm(r.run.final.x) < 1e-3);
}

TEST_CASE("true-force accounting: N_f = N_sample + N_new per region update" * doctest::test_suite("invariants")) {
  for (std::uint64_t seed : {2u, 3u, 4u}) {
    FunctionOracle f = saddle_2d();
    const GpsdParams g = gpsd_defaults(seed);
    const GpsdResult r = run_gpsd(f, start(g), g);
    const auto expected = static_cast<std::uint64_t>(g.n_sample + g.n_new * r.region_updates);
    CHECK(r.run.force_queries == expected);
    CHECK(f.query_count() == expected);
    REQUIRE_FALSE(r.subproblems.empty());
    CHECK(r.subproblems.back().n_f_cumulative == expected);
    std::int64_t steps = 0;
    for (std::size_t i = 0; i < r.subproblems.size(); ++i) {
      const auto& s = r.subproblems[i];
      steps += s.n_steps;
      CHECK(s.subproblem_index == static_cast<int>(i));
      CHECK(s.n_f_cumulative == static_cast<std::uint64_t>(g.n_sample + g.n_new * static_cast<int>(s.action ? i + 1 : i)));
    }
    CHECK(steps == r.run.n_steps);
  }
}

TEST_CASE("seeded GPSD runs are deterministic" * doctest::test_suite("invariants")) {
  FunctionOracle f1 = saddle_2d();
  FunctionOracle f2 = saddle_2d();
  GpsdParams g = gpsd_defaults(5);
  g.sd.record_trajectory = true;
  const GpsdResult a = run_gpsd(f1, start(g), g);
  const GpsdResult b = run_gpsd(f2, start(g), g);
  CHECK(a.run.final.x == b.run.final.x);
  CHECK(a.run.force_queries == b.run.force_queries);
  CHECK(a.run.n_steps == b.run.n_steps);
  REQUIRE(a.run.trajectory.size() == b.run.trajectory.size());
  for (std::size_t i = 0; i < a.run.trajectory.size(); ++i) CHECK(a.run.trajectory[i].x == b.run.trajectory[i].x);
  std::ostringstream la, lb;
  write_subproblem_log(la, a.subproblems);
  write_subproblem_log(lb, b.subproblems);
  CHECK(la.str() == lb.str());
}

TEST_CASE("subproblem log is one JSON object per line") {
  FunctionOracle f = saddle_2d();
  const GpsdParams g = gpsd_defaults(6);
  const GpsdResult r = run_gpsd(f, start(g), g);
  std::ostringstream out;
  write_subproblem_log(out, r.subproblems);
  std::istringstream in(out.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto doc = nlohmann::json::parse(line);
    CHECK(doc.contains("delta"));
    CHECK(doc.contains("N_f_cumulative"));
    ++n;
  }
  CHECK(n == r.subproblems.size());
}

TEST_CASE("GPSD rejects a start outside the initial region") {
  FunctionOracle f = saddle_2d();
  GpsdParams g = gpsd_defaults(1);
  g.initial_region.center = Vector{{5.0, 5.0}};
  CHECK_THROWS_AS(run_gpsd(f, start(g), g), std::invalid_argument);
  g = gpsd_defaults(1);
  g.tol_l = 0.3;
  CHECK_THROWS_AS(g.validate(2), std::invalid_argument);
}

TEST_CASE("a custom sampler replaces LHS") {
  FunctionOracle f = saddle_2d();
  GpsdParams g = gpsd_defaults(7);
  int calls = 0;
  g.sampler = [&calls](const TrustRegion& region, int m, std::mt19937_64& rng) {
    ++calls;
    return lhs_sample(region, m, rng);
  };
  const GpsdResult r = run_gpsd(f, start(g), g);
  CHECK(calls == 1 + r.region_updates);
}
