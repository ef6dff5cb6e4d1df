#include "selfcorr/loop.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "selfcorr/metrics.hpp"
#include "selfcorr/random.hpp"

namespace selfcorr {

namespace {

// Stream tags for the independent random substreams of a run.
enum StreamTag : std::uint64_t { kRealData = 1, kSynthesis = 2, kCorrection = 3 };

bool is_power_of_two(Eigen::Index t) { return t > 0 && (t & (t - 1)) == 0; }

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

std::string_view to_string(AccrualPolicy policy) noexcept {
  return policy == AccrualPolicy::LogAccrual ? "log" : "fresh";
}

AccrualPolicy parse_accrual_policy(std::string_view token) {
  if (token == "fresh") return AccrualPolicy::FreshEachGeneration;
  if (token == "log") return AccrualPolicy::LogAccrual;
  throw Error(ErrorKind::ParseError, "unknown accrual policy '" + std::string(token) + "' (expected fresh or log)");
}

void LoopConfig::validate() const {
  if (dim < 1) throw Error(ErrorKind::ConfigError, "dim must be >= 1");
  if (n < 2) throw Error(ErrorKind::ConfigError, "n must be >= 2 so the real data can be fitted");
  if (!std::isfinite(lambda) || lambda < 0.0) throw Error(ErrorKind::ConfigError, "lambda must be finite and >= 0");
  if (generations < 1) throw Error(ErrorKind::ConfigError, "generations must be >= 1");
  if (!std::isfinite(cov_floor) || cov_floor < 0.0) throw Error(ErrorKind::ConfigError, "cov_floor must be >= 0");
}

Eigen::Index LoopConfig::synth_count() const {
  return static_cast<Eigen::Index>(std::floor(lambda * static_cast<double>(n)));
}

SynthPool accrue(SynthPool pool, Dataset batch, Eigen::Index t, AccrualPolicy policy) {
  if (t < 1) throw Error(ErrorKind::InvalidArgument, "accrual starts at generation 1");
  if (policy == AccrualPolicy::FreshEachGeneration) {
    pool.clear();
  } else {
    std::erase_if(pool, [](const auto& entry) { return !is_power_of_two(entry.first); });
  }
  pool.emplace_back(t, std::move(batch));
  return pool;
}

Eigen::Index pool_point_count(const SynthPool& pool) {
  Eigen::Index total = 0;
  for (const auto& [gen, batch] : pool) total += batch.size();
  return total;
}

Trajectory run_loop(const LoopConfig& config, const GaussianParams& target, const std::optional<Dataset>& real_data) {
  config.validate();
  if (target.dim() != config.dim) {
    throw Error(ErrorKind::DimensionMismatch, "target has dimension " + std::to_string(target.dim()) +
                                                  ", config expects " + std::to_string(config.dim));
  }

  Dataset real(config.dim);
  if (real_data) {
    if (real_data->dim() != config.dim) throw Error(ErrorKind::DimensionMismatch, "real data dimension mismatch");
    real = *real_data;
  } else {
    Rng rng = make_rng(config.seed, kRealData);
    real = sample_gaussian(target, config.n, rng);
  }

  Trajectory out{config, target, {}};
  out.records.reserve(static_cast<std::size_t>(config.generations) + 1);
  auto record = [&](Eigen::Index t, GaussianParams theta, Eigen::Index pool_size) {
    const double w2 = gaussian_w2(theta, target);
    const double dist = param_distance(theta, target);
    out.records.push_back(GenerationRecord{t, std::move(theta), w2, dist, pool_size});
  };

  GaussianParams theta = fit_gaussian(real, config.cov_floor);
  record(0, theta, 0);

  const Eigen::Index m = config.synth_count();
  SynthPool pool;
  for (Eigen::Index t = 1; t <= config.generations; ++t) {
    try {
      if (m > 0) {
        Rng synth_rng = make_rng(config.seed, kSynthesis, static_cast<std::uint64_t>(t));
        const Dataset synth = sample_gaussian(theta, m, synth_rng);
        Rng correct_rng = make_rng(config.seed, kCorrection, static_cast<std::uint64_t>(t));
        Dataset corrected = config.correction.mode == CorrectionMode::DistributionWise
                                ? sample_corrected(synth, target, config.correction.gamma, m, correct_rng)
                                : apply_pointwise_correction(synth, target, config.correction.gamma, correct_rng,
                                                             config.correction.mode);
        pool = accrue(std::move(pool), std::move(corrected), t, config.accrual);
      }
      Dataset augmented = real;
      for (const auto& [gen, batch] : pool) augmented = augmented.concat(batch);
      theta = fit_gaussian(augmented, config.cov_floor);
      record(t, theta, pool_point_count(pool));
    } catch (const Error& e) {
      throw Error(e.kind(), "generation " + std::to_string(t) + ": " + e.what());
    }
  }
  return out;
}

std::uint64_t sweep_seed(std::uint64_t base_seed, std::uint64_t replicate) {
  return base_seed ^ mix64(replicate);
}

std::vector<Trajectory> SweepResult::successful() const {
  std::vector<Trajectory> out;
  for (const auto& run : runs) {
    if (run) out.push_back(*run);
  }
  return out;
}

SweepResult sweep(const std::vector<LoopConfig>& configs, const GaussianParams& target, std::uint64_t base_seed,
                  std::size_t replicates, unsigned threads, const std::optional<Dataset>& real_data) {
  if (configs.empty()) throw Error(ErrorKind::EmptyInput, "sweep needs at least one configuration");
  if (replicates == 0) throw Error(ErrorKind::InvalidArgument, "sweep needs at least one replicate");

  const std::size_t total = configs.size() * replicates;
  SweepResult result;
  result.replicates = replicates;
  result.runs.resize(total);
  std::vector<std::optional<SweepFailure>> failures(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      const std::size_t ci = job / replicates;
      const std::size_t rep = job % replicates;
      LoopConfig config = configs[ci];
      config.seed = sweep_seed(base_seed, rep);
      try {
        result.runs[job] = run_loop(config, target, real_data);
      } catch (const std::exception& e) {
        failures[job] = SweepFailure{ci, rep, config.seed, e.what()};
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
  }
  for (auto& f : failures) {
    if (f) result.failures.push_back(std::move(*f));
  }
  return result;
}

double mean_w2(const Trajectory& trajectory, Eigen::Index first, Eigen::Index last) {
  double sum = 0.0;
  Eigen::Index count = 0;
  for (const auto& r : trajectory.records) {
    if (r.t >= first && r.t <= last) {
      sum += r.w2_to_target;
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorKind::EmptyInput, "no generations in the requested window");
  return sum / static_cast<double>(count);
}

std::vector<ConfigSummary> summarize(const std::vector<Trajectory>& trajectories, Eigen::Index late_window) {
  if (trajectories.empty()) throw Error(ErrorKind::EmptyInput, "nothing to summarize");
  if (late_window < 1) throw Error(ErrorKind::InvalidArgument, "late window must be >= 1");

  auto same_config = [](LoopConfig a, LoopConfig b) {
    a.seed = b.seed = 0;
    return a == b;
  };
  std::vector<std::vector<const Trajectory*>> groups;
  for (const auto& traj : trajectories) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return same_config(g.front()->config, traj.config); });
    if (it == groups.end()) {
      groups.push_back({&traj});
    } else {
      it->push_back(&traj);
    }
  }

  std::vector<ConfigSummary> out;
  for (const auto& group : groups) {
    const Eigen::Index horizon = group.front()->config.generations;
    if (late_window > horizon + 1) {
      throw Error(ErrorKind::InvalidArgument, "late window " + std::to_string(late_window) +
                                                  " exceeds the " + std::to_string(horizon + 1) + " recorded generations");
    }
    const Eigen::Index first = horizon + 1 - late_window;
    std::vector<double> w2;
    double dist_sum = 0.0;
    std::vector<double> ratios;
    for (const Trajectory* traj : group) {
      const auto& recs = traj->records;
      for (const auto& r : recs) {
        if (r.t >= first) {
          w2.push_back(r.w2_to_target);
          dist_sum += r.param_dist_to_target;
        }
      }
      for (std::size_t t = 1; t < recs.size(); ++t) {
        const double prev = recs[t - 1].param_dist_to_target;
        const double cur = recs[t].param_dist_to_target;
        if (prev > 0.0) {
          ratios.push_back(cur / prev);
        } else if (cur == 0.0) {
          ratios.push_back(1.0);
        }
      }
    }
    const double count = static_cast<double>(w2.size());
    // Welford keeps a constant series at exactly zero spread.
    double mean = 0.0;
    double m2 = 0.0;
    double seen = 0.0;
    for (const double v : w2) {
      seen += 1.0;
      const double delta = v - mean;
      mean += delta / seen;
      m2 += delta * (v - mean);
    }
    const double var = m2 / count;

    ConfigSummary s;
    s.config = group.front()->config;
    s.replicates = group.size();
    s.w2_late_mean = mean;
    s.w2_late_std = std::sqrt(var);
    s.param_dist_late_mean = dist_sum / count;
    s.contraction_ratio_median = median(std::move(ratios));
    out.push_back(s);
  }
  return out;
}

}  // namespace selfcorr
