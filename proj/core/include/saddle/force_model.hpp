#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string_view>

#include "saddle/types.hpp"

namespace saddle {

enum class OracleKind { analytic, simulation, surrogate };

std::string_view to_string(OracleKind kind);

/**
 * @brief Counted access to a force field F: R^N -> R^N.
 *
 * Every call to evaluate() counts as exactly one query, regardless of N. The
 * counter is atomic; oracles that are not reentrant additionally serialize
 * calls to compute(). Surrogate oracles keep their own counter, so they never
 * contribute to the true-force count of the oracle they were trained on.
 */
class ForceOracle {
 public:
  ForceOracle(Index dim, OracleKind kind, bool reentrant);
  virtual ~ForceOracle() = default;

  ForceOracle(const ForceOracle&) = delete;
  ForceOracle& operator=(const ForceOracle&) = delete;

  /// F(x), incrementing the query counter by one.
  Vector evaluate(const Vector& x);

  [[nodiscard]] std::uint64_t query_count() const noexcept { return queries_.load(); }
  [[nodiscard]] Index dim() const noexcept { return dim_; }
  [[nodiscard]] OracleKind kind() const noexcept { return kind_; }
  [[nodiscard]] bool reentrant() const noexcept { return reentrant_; }

 protected:
  virtual Vector compute(const Vector& x) = 0;

 private:
  Index dim_;
  OracleKind kind_;
  bool reentrant_;
  std::atomic<std::uint64_t> queries_{0};
  std::mutex serial_;
};

/// Adapts a plain callable into a counted oracle.
class FunctionOracle final : public ForceOracle {
 public:
  using Function = std::function<Vector(const Vector&)>;

  FunctionOracle(Index dim, Function f, OracleKind kind = OracleKind::analytic, bool reentrant = true);

 protected:
  Vector compute(const Vector& x) override { return f_(x); }

 private:
  Function f_;
};

/// Central-difference Hessian-vector product of a force along a unit direction.
struct DimerEval {
  Vector hv;
  double length = 0.0;
};

/// hv = (F(x + l v) - F(x - l v)) / (2 l); costs exactly two queries.
DimerEval dimer_hv(ForceOracle& oracle, const Vector& x, const Vector& v, double l);

}  // namespace saddle
