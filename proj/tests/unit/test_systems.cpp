#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "saddle/systems/codesign.hpp"
#include "saddle/systems/init_directions.hpp"
#include "saddle/systems/phasefield.hpp"
#include "saddle/systems/quartic.hpp"
#include "saddle/systems/rosenbrock.hpp"
#include "test_oracles.hpp"

using namespace saddle;
using namespace saddle::systems;

TEST_CASE("Rosenbrock force is minus the gradient of the energy") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (auto c : kRosenbrockCases) {
    const RosenbrockParams p = rosenbrock_case(c);
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::Vector4d x(u(rng), u(rng), u(rng), u(rng));
      const RosenbrockEval ev = rosenbrock_force(x, p);
      CHECK(ev.energy == doctest::Approx(testing::rosenbrock_energy(x, p.a, p.b, p.c, p.d)));
      for (int i = 0; i < 4; ++i) {
        const double h = 1e-6;
        Eigen::Vector4d xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        const double fd = -(testing::rosenbrock_energy(xp, p.a, p.b, p.c, p.d) -
                            testing::rosenbrock_energy(xm, p.a, p.b, p.c, p.d)) /
                          (2.0 * h);
        CHECK(ev.force(i) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
      }
    }
  }
}

TEST_CASE("Rosenbrock cases carry the tabulated coefficients and indices") {
  const int expected[] = {1, 2, 3, 4};
  int i = 0;
  for (auto c : kRosenbrockCases) {
    RosenbrockOracle f(rosenbrock_case(c));
    CHECK(inf_norm(f.evaluate(Vector::Ones(4))) == 0.0);
    const EigenDecomposition eig = sym_eigen(fd_jacobian_sym(f, Vector::Ones(4), 1e-5));
    CHECK(morse_index(eig, default_zero_tol(eig)).index == expected[i++]);
  }
  CHECK(rosenbrock_case("iv").d == -2.0);
  CHECK_THROWS(rosenbrock_case("v"));
}

TEST_CASE("codesign force agrees with an independent Euler integration") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int trial = 0; trial < 5; ++trial) {
    Vector x(12);
    for (Index i = 0; i < 12; ++i) x(i) = u(rng);
    const std::vector<double> control(x.data() + 1, x.data() + 12);
    const std::vector<double> xi = testing::plant_xi(x(0), control, 0.01);
    const Vector f = codesign_force(x);
    CHECK(f(0) == x(0));
    for (int j = 0; j < 11; ++j) CHECK(f(j + 1) == doctest::Approx(-xi[j] * xi[j] * control[j]).epsilon(1e-13));
  }
}

TEST_CASE("codesign simulation count equals the query count" * doctest::test_suite("invariants")) {
  CodesignOracle f;
  for (int i = 0; i < 9; ++i) f.evaluate(Vector::Constant(12, 0.1 * i));
  fd_jacobian_sym(f, Vector::Zero(12), 1e-5);
  CHECK(f.simulation_count() == 9 + 24);
  CHECK(f.simulation_count() == f.query_count());
  CHECK(f.kind() == OracleKind::simulation);
}

TEST_CASE("origin is an index-1 saddle of the codesign objective") {
  CodesignOracle f;
  CHECK(inf_norm(f.evaluate(Vector::Zero(12))) == 0.0);
  const EigenDecomposition eig = sym_eigen(fd_jacobian_sym(f, Vector::Zero(12), 1e-5));
  CHECK(morse_index(eig, default_zero_tol(eig)).index == 1);
}

TEST_CASE("simulate_plant validates its grid") {
  CHECK_THROWS(simulate_plant(0.0, Vector::Zero(5)));
  CHECK_THROWS(codesign_force(Vector::Zero(3)));
}

TEST_CASE("fractional weights match the Gamma-function formula" * doctest::test_suite("invariants")) {
  for (double alpha : {0.5, 1.0, 1.5, 1.9}) {
    const std::vector<double> w = fractional_weights(alpha, 40);
    for (int j = 0; j < 40; ++j) {
      CHECK(w[static_cast<std::size_t>(j)] == doctest::Approx(testing::fractional_weight(alpha, j)).epsilon(1e-10));
    }
  }
}

TEST_CASE("fractional weights: sign pattern and vanishing total sum" * doctest::test_suite("invariants")) {
  for (double alpha : {0.3, 1.0, 1.5, 1.8}) {
    const std::vector<double> w = fractional_weights(alpha, 20000);
    CHECK(w[0] > 0.0);
    double partial = w[0];
    for (std::size_t j = 1; j < w.size(); ++j) {
      CHECK(w[j] < 0.0);
      partial += 2.0 * w[j];
      CHECK(partial > 0.0);  // w_0 + 2 sum_{1..j} w_i decreases to 0 from above
    }
    // Tail of 2 sum |w_j| ~ 2 Gamma(alpha+1) sin(pi alpha/2) / (pi alpha) N^{-alpha}.
    const double n = static_cast<double>(w.size());
    const double tail = 2.0 * std::tgamma(alpha + 1.0) * std::sin(M_PI * alpha / 2.0) / (M_PI * alpha) * std::pow(n, -alpha);
    CHECK(partial == doctest::Approx(tail).epsilon(0.02));
  }
}

TEST_CASE("discrete fractional Laplacian is symmetric Toeplitz and positive definite" * doctest::test_suite("invariants")) {
  const PhaseFieldConfig cfg;
  const SymmetricMatrix a = frac_laplacian_matrix(cfg);
  const int n = cfg.interior_nodes();
  CHECK(n == 63);
  REQUIRE(a.dim() == n);
  const std::vector<double> w = fractional_weights(cfg.alpha, n);
  const double scale = std::pow(cfg.h, -cfg.alpha);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      CHECK(a(i, j) == doctest::Approx(scale * w[static_cast<std::size_t>(std::abs(i - j))]));
    }
  }
  CHECK(sym_eigen(a).values.minCoeff() > 0.0);
}

TEST_CASE("phase-field Jacobian matches finite differences") {
  const PhaseFieldConfig cfg;
  PhaseFieldOracle f(cfg);
  const Vector u = phasefield_initial_profile(cfg);
  const Matrix analytic = f.jacobian(u).matrix();
  const Matrix numeric = fd_jacobian_sym(f, u, 1e-6).matrix();
  CHECK((analytic - numeric).cwiseAbs().maxCoeff() < 1e-6 * analytic.cwiseAbs().maxCoeff());
}

TEST_CASE("phase-field force at u = 0 vanishes and u_0 is the parabola") {
  const PhaseFieldConfig cfg;
  PhaseFieldOracle f(cfg);
  CHECK(inf_norm(f.evaluate(Vector::Zero(cfg.interior_nodes()))) == 0.0);
  const Vector x = cfg.grid();
  const Vector u0 = phasefield_initial_profile(cfg);
  CHECK(x(0) == doctest::Approx(-1.0 + cfg.h));
  CHECK(u0(31) == doctest::Approx(0.5));
  CHECK(u0(5) == doctest::Approx(0.5 * (1.0 - x(5) * x(5))));
}

TEST_CASE("phase-field config validation") {
  PhaseFieldConfig cfg;
  cfg.alpha = 2.5;
  CHECK_THROWS(cfg.validate());
  cfg = PhaseFieldConfig{};
  cfg.h = 0.3;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("smooth curve sampler stays in the region and is stratified in amplitude") {
  const PhaseFieldConfig cfg;
  const RegionSampler sampler = smooth_curve_sampler(cfg);
  std::mt19937_64 rng(4);
  const TrustRegion region{phasefield_initial_profile(cfg), 0.01};
  const auto curves = sampler(region, 30, rng);
  REQUIRE(curves.size() == 30);
  std::vector<double> amplitudes;
  for (const auto& c : curves) {
    CHECK(region.contains(c));
    amplitudes.push_back(inf_norm(c - region.center));
  }
  std::sort(amplitudes.begin(), amplitudes.end());
  CHECK(amplitudes.back() > 0.5 * region.half_width);
  CHECK(amplitudes.front() < 0.2 * region.half_width);
}

TEST_CASE("write_matrix_csv round-trips values") {
  Matrix m(2, 2);
  m << 0.1, 1.0 / 3.0, -2.5e-17, 7.0;
  std::ostringstream out;
  write_matrix_csv(out, m);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  const auto comma = line.find(',');
  CHECK(std::stod(line.substr(0, comma)) == 0.1);
  CHECK(std::stod(line.substr(comma + 1)) == 1.0 / 3.0);
}

TEST_CASE("quartic model loads from JSON and validates") {
  const auto doc = nlohmann::json::parse(R"({"matrix": [[-1, 0], [0, 1]], "quartic": [1, 0]})");
  const QuarticModel m = QuarticModel::from_json(doc);
  CHECK(m.center == Vector::Zero(2));
  QuarticOracle f(m);
  CHECK(f.evaluate(Vector{{1.0, 0.0}}).norm() == doctest::Approx(0.0));
  CHECK(m.energy(Vector{{1.0, 0.0}}) == doctest::Approx(-0.25));
  CHECK_THROWS(QuarticModel::from_json(nlohmann::json::parse(R"({"matrix": [[1, 2], [0, 1]]})")));
  CHECK_THROWS(QuarticModel::from_json(nlohmann::json::parse(R"({"matrix": [[1, 0]]})")));
  CHECK_THROWS(QuarticModel::from_json(nlohmann::json::parse(R"({"matrix": [[1]], "quartic": [1, 2]})")));
}

TEST_CASE("init_directions returns the leading eigenvectors of grad F") {
  Matrix h = Matrix::Zero(4, 4);
  h.diagonal() << -1.0, 3.0, 0.5, 2.0;
  const DirectionInit init = init_directions(SymmetricMatrix(h), 2);
  REQUIRE(init.frame.count() == 2);
  CHECK(std::abs(init.frame.vector(0)(1)) == doctest::Approx(1.0));
  CHECK(std::abs(init.frame.vector(1)(3)) == doctest::Approx(1.0));
  CHECK_FALSE(init.degenerate_gap);
  h.diagonal() << -1.0, 3.0, 2.0, 2.0;
  CHECK(init_directions(SymmetricMatrix(h), 2).degenerate_gap);
  CHECK(init_directions(SymmetricMatrix(h), 0).frame.count() == 0);
}
