#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Eigenvalues>
#include <nlohmann/json_fwd.hpp>

#include "saddle/force_model.hpp"
#include "saddle/types.hpp"

namespace saddle {

/// Squared-exponential kernel scales, stored in log-space.
struct Hyperparams {
  double log_sigma_f = 0.0;
  double log_sigma_l = 0.0;

  static Hyperparams from_scales(double sigma_f, double sigma_l);
  [[nodiscard]] double sigma_f() const;
  [[nodiscard]] double sigma_l() const;
};

/// Per-output observation noise standard deviations (log-space).
struct NoiseModel {
  std::vector<double> log_sigma;

  static NoiseModel uniform(Index outputs, double sigma);
  [[nodiscard]] double sigma(Index i) const;
  [[nodiscard]] Index size() const { return static_cast<Index>(log_sigma.size()); }
};

/// Locations with their observed force vectors. Locations are unique to 1e-12 (max-norm).
class TrainingSet {
 public:
  TrainingSet() = default;
  TrainingSet(Index input_dim, Index output_dim) : input_dim_(input_dim), output_dim_(output_dim) {}

  /// Appends a pair; throws DuplicatePoint if x is already present.
  void add(const Vector& x, const Vector& y);
  /// Appends unless x is already present; returns whether it was added.
  bool try_add(const Vector& x, const Vector& y);
  [[nodiscard]] bool contains(const Vector& x, double tol = 1e-12) const;

  [[nodiscard]] TrainingSet filtered(const std::function<bool(const Vector&)>& keep) const;

  [[nodiscard]] std::size_t size() const { return locations_.size(); }
  [[nodiscard]] bool empty() const { return locations_.empty(); }
  [[nodiscard]] Index input_dim() const { return input_dim_; }
  [[nodiscard]] Index output_dim() const { return output_dim_; }
  [[nodiscard]] const std::vector<Vector>& locations() const { return locations_; }
  [[nodiscard]] const std::vector<Vector>& observations() const { return observations_; }

 private:
  Index input_dim_ = 0;
  Index output_dim_ = 0;
  std::vector<Vector> locations_;
  std::vector<Vector> observations_;
};

/// Affine map of inputs to the unit cube: (x - center) / half_width.
struct InputScaling {
  Vector center;
  double half_width = 1.0;

  static InputScaling identity(Index dim);
  [[nodiscard]] Vector apply(const Vector& x) const { return (x - center) / half_width; }
};

/// Per-output standardization: y_std = (y - mean) / scale.
struct OutputScaling {
  Vector mean;
  Vector scale;

  static OutputScaling identity(Index outputs);
  /// Sample mean/std of the observations; std falls back to 1 when it vanishes or m < 2.
  static OutputScaling standardize(const TrainingSet& data);
};

/// sigma_f^2 exp(-|x - x2|^2 / (2 sigma_l^2))
double se_kernel(const Vector& x, const Vector& x2, const Hyperparams& hyper);

struct LikelihoodResult {
  double value = 0.0;
  /// Ordered as (log sigma_f, log sigma_l, log sigma_s_1 .. log sigma_s_P).
  Vector gradient;
};

/// Log evidence summed over independent output blocks, with analytic gradient.
/// Operates on the data exactly as given (no scaling). Throws FactorizationFailure.
LikelihoodResult log_marginal_likelihood(const TrainingSet& data, const Hyperparams& hyper, const NoiseModel& noise);

struct Prediction {
  Vector mean;
  Vector variance;
};

/**
 * @brief Trained multi-output GP with independent outputs sharing one SE kernel.
 *
 * The shared kernel matrix is reduced once to tridiagonal form, K = H T H^T;
 * each output block K + (s_i + jitter) I then only needs a tridiagonal solve.
 * Hyperparameters and noises live in scaled coordinates; predictions are
 * returned in original units. Instances are immutable.
 */
class GpSurrogate {
 public:
  /// Conditions on data with fixed hyperparameters. Throws FactorizationFailure.
  static GpSurrogate condition(TrainingSet data, Hyperparams hyper, NoiseModel noise, InputScaling inputs,
                               OutputScaling outputs);

  /// Prediction from the prior only (m = 0).
  static GpSurrogate prior(Index input_dim, Index output_dim, Hyperparams hyper);

  [[nodiscard]] Prediction predict(const Vector& x) const;
  [[nodiscard]] Vector predict_mean(const Vector& x) const;
  /// max_i Var[F_i(x)] in original units.
  [[nodiscard]] double uncertainty_radius(const Vector& x) const;

  [[nodiscard]] const TrainingSet& data() const { return data_; }
  [[nodiscard]] const Hyperparams& hyper() const { return hyper_; }
  [[nodiscard]] const NoiseModel& noise() const { return noise_; }
  [[nodiscard]] const InputScaling& input_scaling() const { return inputs_; }
  [[nodiscard]] const OutputScaling& output_scaling() const { return outputs_; }
  [[nodiscard]] double jitter() const { return jitter_; }

  [[nodiscard]] nlohmann::json to_json() const;
  static GpSurrogate from_json(const nlohmann::json& doc);

 private:
  GpSurrogate() = default;

  [[nodiscard]] Vector kernel_column(const Vector& unit_x) const;

  TrainingSet data_;
  Hyperparams hyper_;
  NoiseModel noise_;
  InputScaling inputs_;
  OutputScaling outputs_;

  // K + s_i I = H T_i H^T with H from the Householder reduction of the
  // correlation matrix and T_i tridiagonal, factored as L_i D_i L_i^T.
  [[nodiscard]] double reduced_quadratic(const Vector& w, Index output) const;

  Matrix unit_x_;  // m x d, scaled locations
  Eigen::Tridiagonalization<Matrix> reduction_;
  Matrix ldl_d_;   // m x P
  Matrix ldl_l_;   // (m-1) x P, subdiagonal of L_i
  Matrix alpha_;   // m x P, (K + s_i I)^{-1} y_i in scaled units
  double jitter_ = 0.0;
};

struct FitConfig {
  std::size_t min_points = 2;
  /// Length scales scanned (log-uniform over the bounds) for a cold start.
  int length_grid = 9;
  /// Half-width, in log sigma_l, of the bracket searched around a warm start.
  double warm_bracket = 0.35;
  /// Final bracket width in log sigma_l.
  double length_tol = 0.02;
  /// Inner ascent iterations over sigma_f and the noises per length scale.
  int max_iterations = 200;
  double sigma_l_min = 0.05;
  double sigma_l_max = 5.0;
  double sigma_f_min = 0.01;
  double sigma_f_max = 100.0;
  /// Lower bound on noise std, relative to the output std.
  double noise_floor = 1e-6;
  double noise_ceiling = 10.0;
  /// Defaults to the bounding box of the data.
  std::optional<InputScaling> input_scaling;
  bool standardize_outputs = true;
  /// Starting point for a warm-started search.
  std::optional<Hyperparams> warm_hyper;
  std::optional<NoiseModel> warm_noise;
};

/// Maximum-likelihood fit: profile search over the length scale, projected
/// gradient ascent over sigma_f and the noises at each length.
GpSurrogate fit(const TrainingSet& data, const FitConfig& config);

/// Keeps old points passing `keep`, adds `additions`, refits warm-started from `model`.
GpSurrogate update_data(const GpSurrogate& model, const TrainingSet& additions,
                        const std::function<bool(const Vector&)>& keep, FitConfig config);

/// Force oracle answering with the posterior mean of a surrogate.
class SurrogateOracle final : public ForceOracle {
 public:
  explicit SurrogateOracle(std::shared_ptr<const GpSurrogate> model);

  [[nodiscard]] const GpSurrogate& model() const { return *model_; }

 protected:
  Vector compute(const Vector& x) override { return model_->predict_mean(x); }

 private:
  std::shared_ptr<const GpSurrogate> model_;
};

}  // namespace saddle
