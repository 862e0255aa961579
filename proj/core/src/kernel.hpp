#pragma once

// Flat view of a lag structure alpha_0..alpha_L as rows of a (L+1) x W
// table with weights w_m, so that ||v||^2 = sum_m w_m v_m^2. A linear model
// is the W = 1 case with the single weight Var(eps).

#include <cstddef>
#include <span>
#include <vector>

#include "martlab/models.hpp"

namespace martlab::detail {

class LagKernel {
 public:
  /// Throws UnsupportedModel when the model has no exact lag table.
  static LagKernel from(const ProcessModel& model);
  static LagKernel linear(std::span<const double> coeffs, double variance, double tail_bound);

  [[nodiscard]] std::size_t lag() const noexcept { return rows_ - 1; }
  [[nodiscard]] std::size_t width() const noexcept { return weights_.size(); }
  [[nodiscard]] std::span<const double> row(std::size_t j) const noexcept {
    return {table_.data() + j * width(), width()};
  }
  [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
  /// Certified bound on sum_{j>L} ||alpha_j||^2.
  [[nodiscard]] double tail_bound() const noexcept { return tail_bound_; }

  [[nodiscard]] double norm2(std::span<const double> v) const noexcept;
  [[nodiscard]] double inner(std::size_t j, std::size_t k) const noexcept;

  /// n^{-1}-free coordinate sum
  ///   sum_{s=0}^{n-1} ||P(s) - d||^2 + [past] sum_{t=0}^{L-1} ||P(n+t) - P(t)||^2
  /// with P(t) = alpha_0 + ... + alpha_{min(t,L)}. `d` empty means 0.
  [[nodiscard]] double coordinate_sum(std::size_t n, std::span<const double> d,
                                      bool include_past) const;

  /// Widens an exact value of ||S'||^2 for the truncated model to an interval
  /// that also contains ||S||^2 for the untruncated one, given
  /// ||S - S'|| <= delta.
  [[nodiscard]] static OracleValue widen(double value, double delta) noexcept;

 private:
  std::size_t rows_ = 0;
  std::vector<double> table_;
  std::vector<double> weights_;
  double tail_bound_ = 0.0;
};

}  // namespace martlab::detail
