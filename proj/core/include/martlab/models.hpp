#pragma once

// The three process families over the product space X^Z with the shift:
//
//   causal linear   X_k = sum_j a_j eps_{k-j}
//   semi-linear     X_k = sum_j alpha_j(omega_{k-j})
//   Hoelder         X_k = f(Y_k) - E f(Y_0),  Y semi-linear
//
// F_k is generated by the coordinates omega_j, j <= k. Every model is
// truncated at a lag L (alpha_j = 0 for j > L); the certified l2 mass
// beyond L is carried as `tail_bound()` and propagated into oracle errors.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "martlab/innovation.hpp"
#include "martlab/numeric.hpp"
#include "martlab/sequences.hpp"

namespace martlab {

/// Coordinates omega_0, omega_{-1}, omega_{-2}, ... given as point values.
using Past = std::vector<double>;

class CausalLinearModel {
 public:
  static constexpr double kDefaultRelativeTail = 1e-8;
  static constexpr std::size_t kMaxDefaultLag = std::size_t{1} << 22;

  /// Without an explicit lag, L is the smallest index whose l2 tail is below
  /// kDefaultRelativeTail of the total (capped at kMaxDefaultLag).
  CausalLinearModel(CoefficientSequence coeffs, InnovationSpace innovation,
                    std::optional<std::size_t> lag = std::nullopt);

  [[nodiscard]] const CoefficientSequence& coefficients() const noexcept { return coeffs_; }
  [[nodiscard]] const InnovationSpace& innovation() const noexcept { return innovation_; }
  [[nodiscard]] std::size_t lag() const noexcept { return truncated_.size() - 1; }
  /// a_0 .. a_L.
  [[nodiscard]] std::span<const double> truncated() const noexcept { return truncated_; }
  /// Certified upper bound on sum_{i>L} a_i^2.
  [[nodiscard]] double tail_bound() const noexcept { return tail_bound_; }

 private:
  CoefficientSequence coeffs_;
  InnovationSpace innovation_;
  std::vector<double> truncated_;
  double tail_bound_ = 0.0;
};

using AlphaFunction = std::function<double(double)>;

class SemiLinearModel {
 public:
  /// Tabulated form over a Discrete space: table[j][m] = alpha_j(x_m), each
  /// row centered under mu within 1e-12.
  SemiLinearModel(InnovationSpace space, std::vector<std::vector<double>> table,
                  double tail_bound = 0.0);

  /// Functional form over any space. `l2_norms[j]` must equal
  /// ||alpha_j||_{2,X}; `linear_coefficients`, when given, records that
  /// alpha_j(x) = a_j x.
  static SemiLinearModel functional(InnovationSpace space, std::vector<AlphaFunction> alphas,
                                    std::vector<double> l2_norms, double tail_bound = 0.0,
                                    std::vector<double> linear_coefficients = {});

  [[nodiscard]] const InnovationSpace& space() const noexcept { return space_; }
  [[nodiscard]] std::size_t lag() const noexcept { return norms_.size() - 1; }
  [[nodiscard]] bool tabulated() const noexcept { return !table_.empty(); }
  [[nodiscard]] const std::vector<std::vector<double>>& table() const noexcept { return table_; }
  [[nodiscard]] std::span<const double> row(std::size_t j) const { return table_.at(j); }
  [[nodiscard]] const std::vector<double>& linear_coefficients() const noexcept { return linear_; }
  /// alpha_j(x) for a point value x (a support point for tabulated models).
  [[nodiscard]] double alpha(std::size_t j, double x) const;
  [[nodiscard]] double alpha_at_index(std::size_t j, std::uint32_t m) const { return table_[j][m]; }
  /// ||alpha_j||_{2,X} for j = 0..L.
  [[nodiscard]] const std::vector<double>& lag_norms() const noexcept { return norms_; }
  /// || |alpha_j|^gamma ||_{2,X} for j = 0..L.
  [[nodiscard]] std::vector<double> holder_norms(double gamma) const;
  [[nodiscard]] double tail_bound() const noexcept { return tail_bound_; }

 private:
  SemiLinearModel() = default;

  InnovationSpace space_ = InnovationSpace::rademacher();
  std::vector<std::vector<double>> table_;
  std::vector<AlphaFunction> functions_;
  std::vector<double> linear_;
  std::vector<double> norms_;
  double tail_bound_ = 0.0;
};

/// A gamma-Hoelder function with constant C: |f(x) - f(y)| <= C |x - y|^gamma.
class HolderFunction {
 public:
  enum class Kind { AbsPower, SoftClip, Custom };

  /// f(y) = |y|^gamma, C = 1.
  static HolderFunction abs_power(double gamma);
  /// f(y) = sign(y) (s tanh(|y| / s))^gamma, C = 2^{1 - gamma}.
  static HolderFunction soft_clip(double gamma, double scale);
  /// Verified against the claimed constant on a test grid.
  static HolderFunction custom(std::function<double(double)> f, double gamma, double constant);

  [[nodiscard]] double operator()(double y) const;
  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] double gamma() const noexcept { return gamma_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] double constant() const noexcept { return constant_; }

 private:
  HolderFunction(Kind kind, double gamma, double scale, double constant,
                 std::function<double(double)> custom);

  Kind kind_;
  double gamma_;
  double scale_;
  double constant_;
  std::function<double(double)> custom_;
};

struct CenteringOptions {
  /// Monte Carlo draws when exact enumeration is not possible.
  std::size_t draws = 1'000'000;
  std::uint64_t seed = 0x5eed'c0de'0000'0001ULL;
  /// Exact enumeration of E f(Y_0) when the support of Y_0 has at most this
  /// many configurations (Discrete bases only).
  std::size_t enumeration_limit = std::size_t{1} << 22;
};

class HolderModel {
 public:
  HolderModel(SemiLinearModel base, HolderFunction f, CenteringOptions centering = {});

  [[nodiscard]] const SemiLinearModel& base() const noexcept { return base_; }
  [[nodiscard]] const HolderFunction& function() const noexcept { return f_; }
  [[nodiscard]] std::size_t lag() const noexcept { return base_.lag(); }
  /// E f(Y_0), frozen at construction; se == 0 when enumerated exactly.
  [[nodiscard]] Estimate centering() const noexcept { return centering_; }
  /// Maps a base value Y to X = f(Y) - E f(Y_0).
  [[nodiscard]] double transform(double y) const { return f_(y) - centering_.value; }

 private:
  SemiLinearModel base_;
  HolderFunction f_;
  Estimate centering_;
};

using ProcessModel = std::variant<CausalLinearModel, SemiLinearModel, HolderModel>;

[[nodiscard]] std::size_t model_lag(const ProcessModel& model) noexcept;
[[nodiscard]] const InnovationSpace& model_space(const ProcessModel& model) noexcept;
/// Depth of past needed by the conditional-expectation oracles (L).
[[nodiscard]] std::size_t required_past_depth(const ProcessModel& model) noexcept;
/// True for linear models and tabulated semi-linear models.
[[nodiscard]] bool has_exact_oracles(const ProcessModel& model) noexcept;

/// Exact rewrite alpha_j(x_m) = a_j x_m. Requires a Discrete innovation.
SemiLinearModel linear_as_semilinear(const CausalLinearModel& model);

/// Semi-linear form of a linear model over any space: tabulated for Discrete
/// innovations, functional otherwise.
SemiLinearModel semilinear_view(const CausalLinearModel& model);

/// ||P_0(X_i)||_2 for i = 0..count-1 (linear and semi-linear only).
std::vector<double> projection_norms(const ProcessModel& model, std::size_t count);

struct McOptions {
  std::size_t outer = 4000;  // pasts (norm estimates) or futures (conditional means)
  std::size_t inner = 16;    // inner draws per past, per independent half
  std::uint64_t seed = 0x0b5e'55ed'0000'0000ULL;
};

/// P_0(X_i) = E(X_i | F_0) - E(X_i | F_{-1}).
///
/// Linear and semi-linear models: exact, the function alpha_i on X (so
/// `point_values` over a Discrete support, `function` always). Hoelder
/// models: `estimator` returns an unbiased Monte Carlo value of P_0(X_i) at a
/// past (omega_0, omega_{-1}, ...) and `norm` is a Monte Carlo estimate of
/// ||P_0(X_i)||_2 from two independent inner means per past.
struct Projection {
  std::size_t lag = 0;
  bool exact = true;
  bool low_precision = false;
  std::function<double(double)> function;
  std::vector<double> point_values;
  std::function<Estimate(std::span<const double> past, std::uint64_t seed)> estimator;
  Estimate norm;
};

Projection p0_projection(const ProcessModel& model, std::size_t i, const McOptions& mc = {});

/// Var(S_n) by the coordinate decomposition S_n = sum_m g_{n,m}(omega_m).
/// err_bound covers the lag truncation. Throws UnsupportedModel for Hoelder
/// and functional semi-linear models.
OracleValue exact_variance(const ProcessModel& model, std::size_t n);

/// E(S_k | F_0) for k = 1..n at a pinned past (exact models only).
std::vector<double> conditional_drift_path(const ProcessModel& model, std::size_t n,
                                           std::span<const double> past);

/// E(S_n | F_0) at a pinned past. Exact (se = 0) for linear and tabulated
/// semi-linear models; Monte Carlo over futures for Hoelder models.
Estimate conditional_expectation_S(const ProcessModel& model, std::size_t n,
                                   std::span<const double> past, const McOptions& mc = {});

/// max_{1<=k<=n} |E(S_k | F_0)| at a pinned past.
Estimate max_conditional_drift(const ProcessModel& model, std::size_t n,
                               std::span<const double> past, const McOptions& mc = {});

/// Draws a past of the given depth from the product measure.
Past draw_past(const ProcessModel& model, std::size_t depth, Engine& rng);

}  // namespace martlab
