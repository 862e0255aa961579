#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "martlab/rng.hpp"

namespace martlab {

/// The coordinate space (X, mu) of the product measure: a finite discrete
/// distribution, which admits exact oracles, or a continuous sampler.
class InnovationSpace {
 public:
  enum class Kind { Discrete, Normal, Uniform };

  /// Points must be distinct; probabilities nonnegative and summing to 1
  /// within 1e-12.
  static InnovationSpace discrete(std::vector<double> points, std::vector<double> probs);
  /// Discrete {-1, +1} with probability 1/2 each.
  static InnovationSpace rademacher();
  static InnovationSpace normal(double variance = 1.0);
  /// Uniform on [-half_width, half_width].
  static InnovationSpace uniform(double half_width);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] bool is_discrete() const noexcept { return kind_ == Kind::Discrete; }
  [[nodiscard]] std::string tag() const;

  /// Support points and weights (Discrete only; empty otherwise).
  [[nodiscard]] std::span<const double> points() const noexcept { return points_; }
  [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }

  [[nodiscard]] double mean() const noexcept { return mean_; }
  [[nodiscard]] double variance() const noexcept { return variance_; }
  /// Normal: variance. Uniform: half width. Discrete: 0.
  [[nodiscard]] double parameter() const noexcept { return param_; }
  /// E|x|^r.
  [[nodiscard]] double abs_moment(double r) const;

  /// Index of a support point; throws InvalidArgument when x is not one.
  [[nodiscard]] std::uint32_t index_of(double x) const;

  /// sum_m p_m v_m for a function tabulated on the support.
  [[nodiscard]] double expectation(std::span<const double> values) const;
  /// sum_m p_m v_m^2.
  [[nodiscard]] double second_moment(std::span<const double> values) const;

  /// Draws a support index (Discrete only).
  [[nodiscard]] std::uint32_t draw_index(Engine& rng) const;
  /// Draws a point value (any kind).
  [[nodiscard]] double draw_value(Engine& rng) const;

 private:
  InnovationSpace() = default;

  Kind kind_ = Kind::Discrete;
  std::vector<double> points_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
  unsigned uniform_bits_ = 0;  // log2(size) when weights are uniform and size is 2^k
  bool uniform_weights_ = false;
  double mean_ = 0.0;
  double variance_ = 0.0;
  double param_ = 0.0;
  double sd_ = 0.0;
};

}  // namespace martlab
