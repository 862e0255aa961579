#include "martlab/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <fftw3.h>

#include "martlab/errors.hpp"

namespace martlab {

namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Overlap-save convolution y_k = sum_{j=0}^{L} a_j x_{k+L-j} for k = 0.. .
class BlockConvolver {
 public:
  explicit BlockConvolver(std::span<const double> a) : taps_(a.size()) {
    size_ = 256;
    while (size_ < 4 * taps_) size_ *= 2;
    bins_ = size_ / 2 + 1;
    in_ = fftw_alloc_real(size_);
    out_ = fftw_alloc_real(size_);
    spec_ = fftw_alloc_complex(bins_);
    kernel_.resize(bins_);
    {
      std::lock_guard lock(fftw_planner_mutex());
      forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(size_), in_, spec_, FFTW_ESTIMATE);
      backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(size_), spec_, out_, FFTW_ESTIMATE);
    }
    std::fill(in_, in_ + size_, 0.0);
    std::copy(a.begin(), a.end(), in_);
    fftw_execute(forward_);
    const double scale = 1.0 / static_cast<double>(size_);
    for (std::size_t b = 0; b < bins_; ++b) kernel_[b] = {spec_[b][0] * scale, spec_[b][1] * scale};
  }

  BlockConvolver(const BlockConvolver&) = delete;
  BlockConvolver& operator=(const BlockConvolver&) = delete;

  ~BlockConvolver() {
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(forward_);
      fftw_destroy_plan(backward_);
    }
    fftw_free(in_);
    fftw_free(out_);
    fftw_free(spec_);
  }

  /// x has length count + L; writes count outputs.
  void apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t L = taps_ - 1;
    const std::size_t block = size_ - L;
    const std::size_t count = y.size();
    for (std::size_t start = 0; start < count; start += block) {
      const std::size_t avail = std::min(size_, x.size() - start);
      std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(start), avail, in_);
      std::fill(in_ + avail, in_ + size_, 0.0);
      fftw_execute_dft_r2c(forward_, in_, spec_);
      for (std::size_t b = 0; b < bins_; ++b) {
        const std::complex<double> v(spec_[b][0], spec_[b][1]);
        const auto p = v * kernel_[b];
        spec_[b][0] = p.real();
        spec_[b][1] = p.imag();
      }
      fftw_execute_dft_c2r(backward_, spec_, out_);
      const std::size_t take = std::min(block, count - start);
      std::copy_n(out_ + L, take, y.begin() + static_cast<std::ptrdiff_t>(start));
    }
  }

 private:
  std::size_t taps_;
  std::size_t size_ = 0;
  std::size_t bins_ = 0;
  double* in_ = nullptr;
  double* out_ = nullptr;
  fftw_complex* spec_ = nullptr;
  std::vector<std::complex<double>> kernel_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

double dot_reversed_window(const double* taps_reversed, const double* x, std::size_t count) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t t = 0;
  for (; t + 4 <= count; t += 4) {
    s0 += taps_reversed[t] * x[t];
    s1 += taps_reversed[t + 1] * x[t + 1];
    s2 += taps_reversed[t + 2] * x[t + 2];
    s3 += taps_reversed[t + 3] * x[t + 3];
  }
  for (; t < count; ++t) s0 += taps_reversed[t] * x[t];
  return (s0 + s1) + (s2 + s3);
}

/// Per-worker path generator: owns every buffer, reused across replicates.
class PathEngine {
 public:
  PathEngine(const ProcessModel& model, std::size_t n, const PathOptions& opt)
      : model_(model), n_(n), lag_(model_lag(model)), opt_(opt) {
    if (n_ == 0) throw InvalidArgument("horizon must be >= 1");
    if (n_ > (std::size_t{1} << 32) || lag_ > (std::size_t{1} << 32)) {
      throw ResourceLimit("horizon or lag beyond 2^32");
    }
    if (opt_.past && opt_.past->size() < lag_) throw InsufficientPast(lag_, opt_.past->size());
    if (opt_.centered && std::holds_alternative<HolderModel>(model_)) {
      throw UnsupportedModel("centered paths need a linear or semi-linear model");
    }
    drop_past_ = opt_.centered && !opt_.past;
    const std::size_t slots = n_ + lag_;
    x_.resize(n_);
    if (const auto* lin = std::get_if<CausalLinearModel>(&model_)) {
      values_.resize(slots);
      const auto a = lin->truncated();
      if (!opt_.naive && lag_ >= opt_.fft_min_lag) {
        conv_ = std::make_unique<BlockConvolver>(a);
      } else {
        reversed_.assign(a.rbegin(), a.rend());
      }
    } else {
      const auto& base = semilinear_base();
      if (base.tabulated()) {
        idx_.resize(slots);
        // flat[m * (L+1) + j] = alpha_j(x_m), so each coordinate reads one row.
        const std::size_t M = base.space().size();
        flat_.resize(M * (lag_ + 1));
        for (std::size_t j = 0; j <= lag_; ++j) {
          for (std::size_t m = 0; m < M; ++m) flat_[m * (lag_ + 1) + j] = base.alpha_at_index(j, static_cast<std::uint32_t>(m));
        }
      } else {
        values_.resize(slots);
      }
    }
    if (opt_.past) {
      const auto& space = model_space(model_);
      if (space.is_discrete() && !idx_.empty()) {
        pinned_idx_.resize(lag_);
        for (std::size_t t = 0; t < lag_; ++t) pinned_idx_[t] = space.index_of((*opt_.past)[t]);
      }
    }
    if (opt_.martingale) dm_.resize(n_);
    if (opt_.centered && opt_.past) {
      // Pinned past: simulate with it and subtract the exact drift E(S_k | F_0).
      const auto drift = conditional_drift_path(model_, std::min(n_, std::max<std::size_t>(lag_, 1)), *opt_.past);
      drift_step_.resize(drift.size());
      for (std::size_t k = 0; k < drift.size(); ++k) drift_step_[k] = drift[k] - (k == 0 ? 0.0 : drift[k - 1]);
    }
  }

  [[nodiscard]] std::span<const double> increments() const noexcept { return x_; }
  [[nodiscard]] std::span<const double> martingale_increments() const noexcept { return dm_; }

  void run(std::uint64_t seed) {
    draw_coordinates(seed);
    if (std::holds_alternative<CausalLinearModel>(model_)) {
      linear_increments();
    } else {
      semilinear_increments();
    }
    for (std::size_t k = 0; k < drift_step_.size(); ++k) x_[k] -= drift_step_[k];
    if (opt_.martingale) martingale();
  }

 private:
  // Slot of time k (k in -L+1..n) is k + L - 1.
  [[nodiscard]] std::size_t slot(std::ptrdiff_t k) const noexcept {
    return static_cast<std::size_t>(k + static_cast<std::ptrdiff_t>(lag_) - 1);
  }

  [[nodiscard]] const SemiLinearModel& semilinear_base() const {
    if (const auto* semi = std::get_if<SemiLinearModel>(&model_)) return *semi;
    return std::get<HolderModel>(model_).base();
  }

  void draw_coordinates(std::uint64_t seed) {
    const auto& space = model_space(model_);
    Engine future(seed);
    const bool by_index = !idx_.empty();
    for (std::size_t k = 1; k <= n_; ++k) {
      if (by_index) {
        idx_[slot(static_cast<std::ptrdiff_t>(k))] = space.draw_index(future);
      } else {
        values_[slot(static_cast<std::ptrdiff_t>(k))] = space.draw_value(future);
      }
    }
    if (lag_ == 0) return;
    // Past slots: omega_{-t} for t = 0..L-1.
    if (opt_.past) {
      for (std::size_t t = 0; t < lag_; ++t) {
        const std::size_t s = slot(-static_cast<std::ptrdiff_t>(t));
        if (by_index) {
          idx_[s] = pinned_idx_[t];
        } else {
          values_[s] = (*opt_.past)[t];
        }
      }
      return;
    }
    if (opt_.centered) {
      // Unpinned: dropping every coordinate at or before 0 is S_k - E(S_k | F_0).
      if (!by_index) std::fill_n(values_.begin(), lag_, 0.0);
      return;
    }
    Engine past(substream_seed(seed, 1));
    for (std::size_t t = 0; t < lag_; ++t) {
      const std::size_t s = slot(-static_cast<std::ptrdiff_t>(t));
      if (by_index) {
        idx_[s] = space.draw_index(past);
      } else {
        values_[s] = space.draw_value(past);
      }
    }
  }

  void linear_increments() {
    if (conv_) {
      conv_->apply(values_, x_);
      return;
    }
    const std::size_t taps = lag_ + 1;
    for (std::size_t k = 1; k <= n_; ++k) {
      x_[k - 1] = dot_reversed_window(reversed_.data(), values_.data() + (k - 1), taps);
    }
  }

  void semilinear_increments() {
    const auto& base = semilinear_base();
    const auto* holder = std::get_if<HolderModel>(&model_);
    const std::size_t stride = lag_ + 1;
    for (std::size_t k = 1; k <= n_; ++k) {
      const std::size_t top = slot(static_cast<std::ptrdiff_t>(k));
      // Centered paths skip coordinates at or before time 0 (j >= k).
      const std::size_t jmax = drop_past_ ? std::min(lag_, k - 1) : lag_;
      double y = 0.0;
      if (!idx_.empty()) {
        for (std::size_t j = 0; j <= jmax; ++j) y += flat_[idx_[top - j] * stride + j];
      } else {
        for (std::size_t j = 0; j <= jmax; ++j) y += base.alpha(j, values_[top - j]);
      }
      x_[k - 1] = holder ? holder->transform(y) : y;
    }
  }

  void martingale() {
    const auto& d = *opt_.martingale;
    const auto& space = model_space(model_);
    for (std::size_t k = 1; k <= n_; ++k) {
      const std::size_t s = slot(static_cast<std::ptrdiff_t>(k));
      if (!idx_.empty()) {
        dm_[k - 1] = d.point_values.empty() ? d.function(space.points()[idx_[s]]) : d.point_values[idx_[s]];
      } else {
        dm_[k - 1] = d.function(values_[s]);
      }
    }
  }

  const ProcessModel& model_;
  std::size_t n_;
  std::size_t lag_;
  PathOptions opt_;
  std::vector<double> x_, dm_;
  std::vector<double> values_;
  std::vector<std::uint32_t> idx_, pinned_idx_;
  std::vector<double> reversed_;
  std::vector<double> drift_step_;
  bool drop_past_ = false;
  std::vector<double> flat_;
  std::unique_ptr<BlockConvolver> conv_;
};

ReplicateRecord summarize(const PathEngine& engine, bool with_martingale, std::uint64_t seed) {
  const auto x = engine.increments();
  const auto dm = engine.martingale_increments();
  ReplicateRecord rec;
  rec.seed = seed;
  double s = 0.0, m = 0.0;
  double max_s = -kInf, max_dev = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    s += x[k];
    max_s = std::max(max_s, s);
    if (with_martingale) {
      m += dm[k];
      max_dev = std::max(max_dev, std::abs(s - m));
    }
  }
  rec.s_n = s;
  rec.max_s = max_s;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rec.max_abs_dev = with_martingale ? max_dev : nan;
  rec.dev_n = with_martingale ? s - m : nan;
  return rec;
}

}  // namespace

PartialSumTrajectory sample_path(const ProcessModel& model, std::size_t n, Stream stream,
                                 const PathOptions& options) {
  PathEngine engine(model, n, options);
  const std::uint64_t seed = stream.seed();
  engine.run(seed);
  PartialSumTrajectory traj;
  traj.n = n;
  traj.seed = stream.master_seed;
  traj.replicate = stream.replicate;
  traj.sums.resize(n);
  traj.running_max.resize(n);
  const auto x = engine.increments();
  double s = 0.0, best = -kInf;
  for (std::size_t k = 0; k < n; ++k) {
    s += x[k];
    best = std::max(best, s);
    traj.sums[k] = s;
    traj.running_max[k] = best;
  }
  if (options.martingale) {
    const auto dm = engine.martingale_increments();
    traj.deviation.resize(n);
    traj.running_max_abs_dev.resize(n);
    double m = 0.0, dev = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      m += dm[k];
      traj.deviation[k] = traj.sums[k] - m;
      dev = std::max(dev, std::abs(traj.deviation[k]));
      traj.running_max_abs_dev[k] = dev;
    }
  }
  return traj;
}

std::vector<double> ReplicateBatch::terminal_sums() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.s_n);
  return out;
}

std::size_t default_workers() {
  if (const char* env = std::getenv("MARTLAB_WORKERS")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

ReplicateBatch replicate_batch(const ProcessModel& model, std::size_t n, std::size_t replicates,
                               std::uint64_t master_seed, const BatchOptions& options) {
  if (replicates == 0) throw InvalidArgument("replicates must be >= 1");
  std::size_t workers = options.workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                             : options.workers;
  workers = std::min(workers, replicates);
  const std::size_t per_worker = (n + model_lag(model)) * (2 * sizeof(double) + sizeof(std::uint32_t)) + n * sizeof(double);
  const double need = static_cast<double>(replicates) * sizeof(ReplicateRecord) +
                      static_cast<double>(workers) * static_cast<double>(per_worker);
  if (need > static_cast<double>(options.memory_budget_bytes)) {
    throw ResourceLimit("batch needs about " + std::to_string(static_cast<long long>(need)) +
                        " bytes, budget is " + std::to_string(options.memory_budget_bytes));
  }

  ReplicateBatch batch;
  batch.model_id = options.model_id;
  batch.n = n;
  batch.master_seed = master_seed;
  batch.records.resize(replicates);

  const bool with_martingale = options.path.martingale != nullptr;
  // Validate eagerly so configuration errors surface on the calling thread.
  PathEngine probe(model, n, options.path);

  constexpr std::size_t kChunk = 32;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&](PathEngine& engine) {
    try {
      while (true) {
        const std::size_t begin = next.fetch_add(kChunk);
        if (begin >= replicates) break;
        const std::size_t end = std::min(begin + kChunk, replicates);
        for (std::size_t r = begin; r < end; ++r) {
          const std::uint64_t seed = Stream{master_seed, r}.seed();
          engine.run(seed);
          batch.records[r] = summarize(engine, with_martingale, seed);
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(replicates);
    }
  };

  if (workers == 1) {
    work(probe);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
      threads.emplace_back([&] {
        try {
          PathEngine engine(model, n, options.path);
          work(engine);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(replicates);
        }
      });
    }
    work(probe);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return batch;
}

}  // namespace martlab
