#include "saddle/force_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "saddle/errors.hpp"

namespace saddle {

std::string_view to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::analytic:
      return "analytic";
    case OracleKind::simulation:
      return "simulation";
    case OracleKind::surrogate:
      return "surrogate";
  }
  return "unknown";
}

ForceOracle::ForceOracle(Index dim, OracleKind kind, bool reentrant) : dim_(dim), kind_(kind), reentrant_(reentrant) {
  if (dim <= 0) {
    throw std::invalid_argument("ForceOracle: dimension must be positive");
  }
}

Vector ForceOracle::evaluate(const Vector& x) {
  if (x.size() != dim_) {
    throw std::invalid_argument("ForceOracle: expected dimension " + std::to_string(dim_) + ", got " +
                                std::to_string(x.size()));
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("ForceOracle: non-finite query point");
  }

  Vector f;
  queries_.fetch_add(1, std::memory_order_relaxed);
  if (reentrant_) {
    f = compute(x);
  } else {
    std::lock_guard lock(serial_);
    f = compute(x);
  }

  if (f.size() != dim_) {
    throw std::logic_error("ForceOracle: compute() returned wrong dimension");
  }
  if (!f.allFinite()) {
    throw SimulationFailure(std::string(to_string(kind_)) + " force returned a non-finite value");
  }
  return f;
}

FunctionOracle::FunctionOracle(Index dim, Function f, OracleKind kind, bool reentrant)
    : ForceOracle(dim, kind, reentrant), f_(std::move(f)) {}

DimerEval dimer_hv(ForceOracle& oracle, const Vector& x, const Vector& v, double l) {
  if (!(l > 0.0)) {
    throw std::invalid_argument("dimer_hv: dimer length must be positive");
  }
  if (std::abs(v.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("dimer_hv: direction must be a unit vector");
  }
  const Vector plus = oracle.evaluate(x + l * v);
  const Vector minus = oracle.evaluate(x - l * v);
  return DimerEval{(plus - minus) / (2.0 * l), l};
}

}  // namespace saddle
