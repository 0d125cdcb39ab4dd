#include "saddle/systems/rosenbrock.hpp"

#include <stdexcept>
#include <string>

namespace saddle::systems {

RosenbrockParams rosenbrock_case(std::string_view name) {
  if (name == "i") return {-0.5, 0.5, 0.5, 2.0};
  if (name == "ii") return {-0.5, 0.5, -0.5, 2.0};
  if (name == "iii") return {-0.5, -0.5, -0.5, 2.0};
  if (name == "iv") return {-0.5, -0.5, -0.5, -2.0};
  throw std::invalid_argument("unknown Rosenbrock case '" + std::string(name) + "' (expected i, ii, iii or iv)");
}

RosenbrockEval rosenbrock_force(const Vector& x, const RosenbrockParams& p) {
  if (x.size() != 4) throw std::invalid_argument("rosenbrock_force: expected a 4-vector");
  const double r1 = x(3) - x(2) * x(2);
  const double r2 = x(2) - x(1) * x(1);
  const double r3 = x(1) - x(0) * x(0);
  const double r4 = 1.0 - x(0);

  RosenbrockEval out;
  out.energy = p.a * r1 * r1 + p.b * r2 * r2 + p.c * r3 * r3 + p.d * r4 * r4;
  Vector grad(4);
  grad(0) = -4.0 * p.c * x(0) * r3 - 2.0 * p.d * r4;
  grad(1) = -4.0 * p.b * x(1) * r2 + 2.0 * p.c * r3;
  grad(2) = -4.0 * p.a * x(2) * r1 + 2.0 * p.b * r2;
  grad(3) = 2.0 * p.a * r1;
  out.force = -grad;
  return out;
}

}  // namespace saddle::systems
