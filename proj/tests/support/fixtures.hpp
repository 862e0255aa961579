#pragma once

// Shared model fixtures and small hand-rolled generators for property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "martlab/models.hpp"
#include "martlab/sequences.hpp"

namespace fixtures {

using namespace martlab;

inline CausalLinearModel iid(InnovationSpace eps = InnovationSpace::rademacher()) {
  return {CoefficientSequence::finite({1.0}), std::move(eps)};
}

inline CausalLinearModel coboundary(InnovationSpace eps = InnovationSpace::rademacher()) {
  return {CoefficientSequence::finite({1.0, -1.0}), std::move(eps)};
}

inline CausalLinearModel geometric(double rho = 0.5, InnovationSpace eps = InnovationSpace::rademacher(),
                                   std::optional<std::size_t> lag = std::nullopt) {
  return {CoefficientSequence::geometric(rho), std::move(eps), lag};
}

/// a_k = 1 / ((k + 2) ln(k + 2)): square-summable with weights k, not summable.
inline CausalLinearModel divergent(InnovationSpace eps = InnovationSpace::rademacher()) {
  return {CoefficientSequence::log_power_law(1.0, 1.0), std::move(eps)};
}

/// Two independent signs packed into one coordinate x = e1 + 2 e2 in
/// {-3, -1, 1, 3}; alpha_j mixes e1 with the product e1 e2, so the process is
/// semi-linear but not linear. ||alpha_j||_2 = rho^j sqrt(1 + 1/4).
inline InnovationSpace two_signs() { return InnovationSpace::discrete({-3.0, -1.0, 1.0, 3.0}, {0.25, 0.25, 0.25, 0.25}); }

inline double sign1(double x) { return (x == -3.0 || x == 1.0) ? -1.0 : 1.0; }
inline double sign2(double x) { return x > 0.0 ? 1.0 : -1.0; }

inline SemiLinearModel two_sign_semilinear(double rho = 0.5, std::size_t lag = 30) {
  const auto space = two_signs();
  std::vector<std::vector<double>> table(lag + 1, std::vector<double>(4));
  for (std::size_t j = 0; j <= lag; ++j) {
    const double r = std::pow(rho, static_cast<double>(j));
    for (std::size_t m = 0; m < 4; ++m) {
      const double x = space.points()[m];
      const double second = (j % 2 == 0) ? sign1(x) * sign2(x) : sign2(x);
      table[j][m] = r * (sign1(x) + 0.5 * second);
    }
  }
  const double per = 1.25;
  const double tail = per * std::pow(rho, 2.0 * static_cast<double>(lag + 1)) / (1.0 - rho * rho);
  return {space, std::move(table), tail};
}

/// Rademacher semi-linear base with alpha_j(x) = rho^j x.
inline SemiLinearModel geometric_base(double rho = 0.5, std::optional<std::size_t> lag = std::nullopt) {
  return linear_as_semilinear(geometric(rho, InnovationSpace::rademacher(), lag));
}

/// Hand-rolled generator for property tests; seeded per test for
/// reproducibility.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool coin() { return index(0, 1) == 1; }

  /// A nonnegative sequence from a random analytic family.
  CoefficientSequence analytic_sequence() {
    switch (index(0, 3)) {
      case 0: return CoefficientSequence::geometric(uniform(0.05, 0.95), uniform(0.1, 3.0));
      case 1: return CoefficientSequence::power_law(uniform(0.55, 3.0), uniform(0.1, 3.0));
      case 2: return CoefficientSequence::log_power_law(uniform(0.6, 2.5), uniform(0.0, 3.0), uniform(0.1, 2.0));
      default: return CoefficientSequence::dyadic_spikes(uniform(0.52, 0.98));
    }
  }

  std::vector<double> finite_values(std::size_t max_len, bool nonneg) {
    std::vector<double> v(index(1, max_len));
    for (auto& x : v) x = nonneg ? uniform(0.0, 2.0) : uniform(-2.0, 2.0);
    return v;
  }

  /// A discrete centered space with 2..6 support points.
  InnovationSpace discrete_space() {
    const std::size_t M = index(2, 6);
    std::vector<double> pts(M), probs(M);
    double total = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      pts[m] = static_cast<double>(m) + uniform(0.0, 0.5);
      probs[m] = uniform(0.2, 1.0);
      total += probs[m];
    }
    double mean = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      probs[m] /= total;
      mean += probs[m] * pts[m];
    }
    double check = 0.0;
    for (std::size_t m = 0; m + 1 < M; ++m) check += probs[m];
    probs[M - 1] = 1.0 - check;
    for (auto& x : pts) x -= mean;
    return InnovationSpace::discrete(pts, probs);
  }

  /// A random tabulated semi-linear model over `space` with lag in 0..max_lag.
  SemiLinearModel semilinear(const InnovationSpace& space, std::size_t max_lag) {
    const std::size_t L = index(0, max_lag);
    std::vector<std::vector<double>> table(L + 1, std::vector<double>(space.size()));
    for (auto& row : table) {
      for (auto& v : row) v = uniform(-1.0, 1.0);
      const double mean = space.expectation(row);
      for (auto& v : row) v -= mean;
    }
    return {space, std::move(table)};
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace fixtures
