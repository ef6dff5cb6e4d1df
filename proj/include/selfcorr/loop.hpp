#pragma once

// Self-consuming retraining loop with correction.
//
// Generation 0 fits the real data. Each later generation samples
// floor(lambda n) synthetic points from the previous model, corrects them
// toward the target, folds them into the synthetic pool and refits on
// real data plus pool.

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "selfcorr/correction.hpp"
#include "selfcorr/dataset.hpp"
#include "selfcorr/gaussian.hpp"

namespace selfcorr {

enum class AccrualPolicy {
  FreshEachGeneration,  ///< only the newest corrected batch is kept
  LogAccrual,           ///< newest batch plus every batch from a power-of-two generation
};

std::string_view to_string(AccrualPolicy policy) noexcept;
AccrualPolicy parse_accrual_policy(std::string_view token);

struct LoopConfig {
  Eigen::Index dim = 2;
  Eigen::Index n = 50;
  double lambda = 0.5;
  CorrectionSpec correction;
  Eigen::Index generations = 50;
  AccrualPolicy accrual = AccrualPolicy::FreshEachGeneration;
  std::uint64_t seed = 0;
  double cov_floor = kDefaultCovFloor;

  void validate() const;
  /// floor(lambda * n)
  Eigen::Index synth_count() const;

  friend bool operator==(const LoopConfig&, const LoopConfig&) = default;
};

struct GenerationRecord {
  Eigen::Index t = 0;
  GaussianParams theta;
  double w2_to_target = 0.0;
  double param_dist_to_target = 0.0;
  Eigen::Index synth_pool_size = 0;
};

struct Trajectory {
  LoopConfig config;
  GaussianParams target;
  std::vector<GenerationRecord> records;  ///< t = 0..T in order
};

/// Synthetic batches tagged with the generation that produced them.
using SynthPool = std::vector<std::pair<Eigen::Index, Dataset>>;

SynthPool accrue(SynthPool pool, Dataset batch, Eigen::Index t, AccrualPolicy policy);

Eigen::Index pool_point_count(const SynthPool& pool);

/// Runs the loop. Real data is drawn from `target` (n points) unless
/// `real_data` is given. Deterministic in (config, target, real_data).
Trajectory run_loop(const LoopConfig& config, const GaussianParams& target,
                    const std::optional<Dataset>& real_data = std::nullopt);

/// Seed of replicate r in a sweep. It does not depend on the configuration,
/// so every configuration sees the same real data and random streams for a
/// given replicate.
std::uint64_t sweep_seed(std::uint64_t base_seed, std::uint64_t replicate);

struct SweepFailure {
  std::size_t config_index = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::string message;
};

struct SweepResult {
  std::size_t replicates = 0;
  /// runs[config_index * replicates + replicate]; empty where the run failed.
  std::vector<std::optional<Trajectory>> runs;
  std::vector<SweepFailure> failures;

  std::vector<Trajectory> successful() const;
};

/// Runs every config x replicate. `threads == 0` uses the hardware
/// concurrency. Result order never depends on scheduling.
SweepResult sweep(const std::vector<LoopConfig>& configs, const GaussianParams& target, std::uint64_t base_seed,
                  std::size_t replicates, unsigned threads = 0,
                  const std::optional<Dataset>& real_data = std::nullopt);

struct ConfigSummary {
  LoopConfig config;  ///< seed of the first trajectory in the group
  std::size_t replicates = 0;
  double w2_late_mean = 0.0;
  double w2_late_std = 0.0;
  double param_dist_late_mean = 0.0;
  double contraction_ratio_median = 0.0;
};

/// Groups trajectories by configuration (ignoring seed), in order of first
/// appearance. Late-window statistics pool the last `late_window`
/// generations of every replicate; the standard deviation is the pooled
/// population deviation. The contraction ratio at step t is
/// param_dist(t) / param_dist(t-1) over all steps and replicates.
std::vector<ConfigSummary> summarize(const std::vector<Trajectory>& trajectories, Eigen::Index late_window);

/// Mean of w2_to_target over generations [first, last] inclusive.
double mean_w2(const Trajectory& trajectory, Eigen::Index first, Eigen::Index last);

}  // namespace selfcorr
