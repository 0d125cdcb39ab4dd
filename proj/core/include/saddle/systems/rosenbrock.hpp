#pragma once

#include <array>
#include <string_view>

#include "saddle/force_model.hpp"

namespace saddle::systems {

/// E = a(x4-x3^2)^2 + b(x3-x2^2)^2 + c(x2-x1^2)^2 + d(1-x1)^2
struct RosenbrockParams {
  double a = -0.5;
  double b = 0.5;
  double c = 0.5;
  double d = 2.0;
};

/// Coefficient sets (i)-(iv); (1,1,1,1) has index 1..4 respectively.
RosenbrockParams rosenbrock_case(std::string_view name);
inline constexpr std::array<std::string_view, 4> kRosenbrockCases{"i", "ii", "iii", "iv"};

struct RosenbrockEval {
  Vector force;  // -grad E
  double energy = 0.0;
};

RosenbrockEval rosenbrock_force(const Vector& x, const RosenbrockParams& p);

class RosenbrockOracle final : public ForceOracle {
 public:
  explicit RosenbrockOracle(RosenbrockParams p) : ForceOracle(4, OracleKind::analytic, true), p_(p) {}
  [[nodiscard]] const RosenbrockParams& params() const { return p_; }

 protected:
  Vector compute(const Vector& x) override { return rosenbrock_force(x, p_).force; }

 private:
  RosenbrockParams p_;
};

}  // namespace saddle::systems
