#pragma once

#include <nlohmann/json_fwd.hpp>

#include "saddle/force_model.hpp"

namespace saddle::systems {

/// E = 1/2 (x - c)^T A (x - c) + sum_i q_i x_i^4 / 4, F = -grad E.
/// With A = diag(-1, 1), c = 0, q = (1, 0) this is the double well
/// (x_1^2 - 1)^2 / 4 + x_2^2 / 2 up to a constant.
struct QuarticModel {
  Matrix hessian;
  Vector center;
  Vector quartic;

  /// Reads {"matrix": [[..]], "center": [..], "quartic": [..]}; center/quartic optional.
  static QuarticModel from_json(const nlohmann::json& doc);
  static QuarticModel double_well();

  [[nodiscard]] Vector force(const Vector& x) const;
  [[nodiscard]] double energy(const Vector& x) const;
};

class QuarticOracle final : public ForceOracle {
 public:
  explicit QuarticOracle(QuarticModel model);
  [[nodiscard]] const QuarticModel& model() const { return model_; }

 protected:
  Vector compute(const Vector& x) override { return model_.force(x); }

 private:
  QuarticModel model_;
};

}  // namespace saddle::systems
