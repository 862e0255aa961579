#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "martlab/models.hpp"
#include "martlab/numeric.hpp"
#include "martlab/simulate.hpp"

namespace martlab {

/// The truncated Gordin martingale difference D_N = sum_{k=0}^N P_0(X_k).
struct MartingaleApproximant {
  enum class Representation { LinearScalar, SemiLinearFunction, Estimated };

  struct CauchyPoint {
    std::size_t truncation = 0;  // N'
    double gap = 0.0;            // ||D_{2N'} - D_{N'}||_2
  };

  Representation representation = Representation::LinearScalar;
  std::size_t truncation = 0;
  /// LinearScalar: D = coefficient * omega_0.
  double coefficient = 0.0;
  /// d(x_m) on a Discrete support.
  std::vector<double> point_values;
  /// d as a function of the coordinate (empty for Estimated).
  std::function<double(double)> function;
  /// ||D_N||_2; se > 0 only for Estimated.
  Estimate norm;
  std::vector<CauchyPoint> cauchy;
  /// The Gordin series sum_k P_0(X_k) has no L2 limit for this model.
  bool divergent = false;

  [[nodiscard]] bool single_coordinate() const noexcept { return representation != Representation::Estimated; }
  /// Throws UnsupportedModel for Estimated approximants.
  [[nodiscard]] MartingaleIncrement increment() const;
};

/// D_N for linear and semi-linear models exactly; for Hoelder models only
/// ||D_N||_2 is estimated (coupled inner Monte Carlo, see McOptions).
MartingaleApproximant gordin_increment(const ProcessModel& model, std::size_t truncation,
                                       const McOptions& mc = {});

/// The truncation at which D_N equals the full Gordin sum of the truncated model.
[[nodiscard]] std::size_t full_truncation(const ProcessModel& model) noexcept;

/// n^{-1} ||S_n - sum_{k=1}^n D o T^k||_2^2 by the coordinate decomposition.
/// err_bound covers the model's lag truncation.
OracleValue ma_error_exact(const ProcessModel& model, const MartingaleApproximant& d, std::size_t n);

/// Same with S_n replaced by S_n - E(S_n | F_0). This part does not depend
/// on the past, so it is the reference for pinned-past simulations.
OracleValue ma_error_exact_centered(const ProcessModel& model, const MartingaleApproximant& d,
                                    std::size_t n);

enum class Functional { MA, MMA, MA0, MMA0 };
enum class Method { ExactOracle, MonteCarlo };

std::string_view to_string(Functional f) noexcept;
std::string_view to_string(Method m) noexcept;

struct ApproximationEntry {
  Functional functional = Functional::MA;
  std::size_t n = 0;
  double value = 0.0;
  double se = 0.0;  // Monte Carlo standard error, or certified bound for exact values
  Method method = Method::ExactOracle;
  std::optional<std::size_t> past_id;
  std::size_t truncation = 0;
};

struct ApproximationReport {
  std::string model_id;
  std::vector<ApproximationEntry> entries;
};

struct MaMcOptions {
  std::size_t workers = 1;
  /// With a pinned past, measure S_n - E(S_n | F_0) - M_n (see PathOptions).
  bool centered = false;
  std::optional<std::size_t> past_id;
  std::string model_id = "model";
};

/// Monte Carlo n^{-1} E|S_n - M_n|^2 (or of max_k |S_k - M_k| when maximal).
/// A pinned past gives the quenched functionals MA0 / MMA0.
ApproximationEntry ma_error_mc(const ProcessModel& model, const MartingaleApproximant& d,
                               std::size_t n, std::size_t replicates, std::uint64_t seed,
                               bool maximal, std::optional<std::span<const double>> past = std::nullopt,
                               const MaMcOptions& options = {});

/// n^{-1} sum_{k=1}^n E(X_0 E(S_{k-1} | F_{-N})) by covariance algebra.
double criterion3_statistic(const ProcessModel& model, std::size_t N, std::size_t n);

/// E sup_{k>=N} |sum_{i>=k} P_0(X_i)|^2; +inf when the series diverges.
double cpcond_statistic(const ProcessModel& model, std::size_t N);

}  // namespace martlab
