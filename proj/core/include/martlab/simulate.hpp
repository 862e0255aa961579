#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "martlab/models.hpp"
#include "martlab/rng.hpp"

namespace martlab {

/// D o T^k as a function of the single coordinate omega_k.
struct MartingaleIncrement {
  std::function<double(double)> function;
  /// d(x_m) by support index; used instead of `function` when nonempty.
  std::vector<double> point_values;
};

/// A realized path S_1..S_n. Index k-1 holds the value at time k.
struct PartialSumTrajectory {
  std::size_t n = 0;
  std::vector<double> sums;
  std::vector<double> running_max;
  /// max_{j<=k} |S_j - M_j|; empty unless a martingale was supplied.
  std::vector<double> running_max_abs_dev;
  /// S_k - M_k; empty unless a martingale was supplied.
  std::vector<double> deviation;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;

  /// X_k = S_k - S_{k-1}, k in 1..n.
  [[nodiscard]] double increment(std::size_t k) const { return k == 1 ? sums[0] : sums[k - 1] - sums[k - 2]; }
};

struct PathOptions {
  /// Pinned coordinates omega_0, omega_{-1}, ...; at least lag() of them.
  std::optional<std::span<const double>> past;
  const MartingaleIncrement* martingale = nullptr;
  /// Drop every contribution of coordinates at or before time 0, i.e. return
  /// S_k - E(S_k | F_0). Linear and semi-linear models only.
  bool centered = false;
  /// Linear models with lag at least this use block FFT convolution.
  std::size_t fft_min_lag = 128;
  /// Forces the naive O(n L) convolution.
  bool naive = false;
};

PartialSumTrajectory sample_path(const ProcessModel& model, std::size_t n, Stream stream,
                                 const PathOptions& options = {});

struct ReplicateRecord {
  double s_n = 0.0;
  double max_s = 0.0;       // max_{1<=k<=n} S_k
  double max_abs_dev = 0.0; // max_k |S_k - M_k|, NaN without a martingale
  double dev_n = 0.0;       // S_n - M_n, NaN without a martingale
  std::uint64_t seed = 0;
};

struct ReplicateBatch {
  std::string model_id;
  std::size_t n = 0;
  std::uint64_t master_seed = 0;
  std::vector<ReplicateRecord> records;

  [[nodiscard]] std::size_t count() const noexcept { return records.size(); }
  [[nodiscard]] std::vector<double> terminal_sums() const;
};

struct BatchOptions {
  PathOptions path;
  /// 0 means hardware concurrency.
  std::size_t workers = 1;
  /// Bound on stored records plus per-worker path buffers.
  std::size_t memory_budget_bytes = std::size_t{1} << 30;
  std::string model_id = "model";
};

/// Replicate r runs on Stream{master_seed, r}; the batch does not depend on
/// the number of workers or their schedule.
ReplicateBatch replicate_batch(const ProcessModel& model, std::size_t n, std::size_t replicates,
                               std::uint64_t master_seed, const BatchOptions& options = {});

/// Worker count from the MARTLAB_WORKERS environment variable, else 1.
std::size_t default_workers();

}  // namespace martlab
