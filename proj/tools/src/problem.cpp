#include "saddle_cli/problem.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "saddle/systems/codesign.hpp"
#include "saddle/systems/init_directions.hpp"
#include "saddle/systems/phasefield.hpp"
#include "saddle/systems/quartic.hpp"
#include "saddle/systems/rosenbrock.hpp"

namespace saddle::cli {

namespace {

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())); }

systems::QuarticModel load_quartic(const std::string& path) {
  if (path.empty()) throw ConfigError("benchmark.file: custom-file needs a model file");
  std::ifstream in(path);
  if (!in) throw ConfigError("benchmark.file: cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("benchmark.file: " + std::string(e.what()));
  }
  try {
    return systems::QuarticModel::from_json(doc);
  } catch (const std::exception& e) {
    throw ConfigError("benchmark.file: " + std::string(e.what()));
  }
}

double codesign_start(const std::string& c) {
  if (c == "i") return 0.2;
  if (c == "ii") return 0.1;
  return 0.05;
}

}  // namespace

Problem make_problem(const RunConfig& cfg) {
  const BenchmarkConfig& b = cfg.benchmark;
  Problem p;
  p.name = std::string(to_string(b.kind));
  const double fd = b.fd_step;
  const JacobianFn fd_jacobian = [fd](ForceOracle& f, const Vector& x) { return fd_jacobian_sym(f, x, fd); };
  Vector default_x0;

  switch (b.kind) {
    case BenchmarkKind::rosenbrock: {
      const systems::RosenbrockParams rp = b.rosenbrock;
      p.landscape.make_force = [rp] { return std::make_unique<systems::RosenbrockOracle>(rp); };
      p.landscape.jacobian = fd_jacobian;
      default_x0 = Vector{{0.7, 0.8, 1.2, 0.7}};
      break;
    }
    case BenchmarkKind::codesign: {
      p.landscape.make_force = [] { return std::make_unique<systems::CodesignOracle>(); };
      p.landscape.jacobian = fd_jacobian;
      default_x0 = Vector::Constant(12, codesign_start(b.case_name));
      break;
    }
    case BenchmarkKind::phasefield: {
      try {
        b.phasefield.validate();
      } catch (const std::exception& e) {
        throw ConfigError(std::string("benchmark: ") + e.what());
      }
      const systems::PhaseFieldConfig pc = b.phasefield;
      const auto a = std::make_shared<const SymmetricMatrix>(systems::frac_laplacian_matrix(pc));
      p.landscape.make_force = [pc] { return std::make_unique<systems::PhaseFieldOracle>(pc); };
      p.landscape.jacobian = [pc, a](ForceOracle&, const Vector& u) { return systems::phasefield_jacobian(u, pc, *a); };
      p.sampler = systems::smooth_curve_sampler(pc);
      default_x0 = systems::phasefield_initial_profile(pc);
      break;
    }
    case BenchmarkKind::custom_file: {
      const auto model = std::make_shared<const systems::QuarticModel>(load_quartic(b.file));
      p.landscape.make_force = [model] { return std::make_unique<systems::QuarticOracle>(*model); };
      p.landscape.jacobian = [model](ForceOracle&, const Vector& x) {
        Matrix h = -model->hessian;
        h.diagonal() -= (3.0 * model->quartic.array() * x.array().square()).matrix();
        return SymmetricMatrix(h);
      };
      default_x0 = model->center;
      break;
    }
  }

  p.x0 = b.x0.empty() ? default_x0 : to_vector(b.x0);
  if (p.x0.size() != default_x0.size()) {
    throw ConfigError("benchmark.x0: expected " + std::to_string(default_x0.size()) + " entries, got " +
                      std::to_string(p.x0.size()));
  }
  p.k = b.k.value_or(1);
  if (p.k < 0 || p.k > p.x0.size()) throw ConfigError("benchmark.k: must lie in [0, dimension]");

  if (b.kind == BenchmarkKind::codesign && p.k == 1) {
    p.frame = gram_schmidt(Matrix::Ones(p.x0.size(), 1));
  } else {
    auto oracle = p.landscape.make_force();
    const systems::DirectionInit init = systems::init_directions(p.landscape.jacobian(*oracle, p.x0), p.k);
    p.frame = init.frame;
    p.degenerate_gap = init.degenerate_gap;
  }
  return p;
}

SdParams sd_params(const RunConfig& cfg, const Problem& problem) {
  SdParams sd = cfg.sd;
  sd.k = problem.k;
  sd.record_trajectory = cfg.emit_trajectory;
  return sd;
}

GpsdParams gpsd_params(const RunConfig& cfg, const Problem& problem) {
  GpsdParams gp = cfg.gpsd;
  gp.sd = sd_params(cfg, problem);
  gp.seed = cfg.seed;
  gp.initial_region.center = problem.x0;
  gp.sampler = problem.sampler;
  return gp;
}

LandscapeParams landscape_params(const RunConfig& cfg, const Problem& problem) {
  LandscapeParams ls = cfg.landscape;
  ls.sd.record_trajectory = false;
  ls.gpsd.sd.record_trajectory = false;
  ls.gpsd.sampler = problem.sampler;
  ls.seed = cfg.seed;
  return ls;
}

}  // namespace saddle::cli
