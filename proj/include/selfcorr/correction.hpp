#pragma once

// Correction operators: the distribution-wise mixture toward the target
// model, its sampler, and the point-wise corrector that moves each synthetic
// point onto a matched draw from that mixture.

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "selfcorr/dataset.hpp"
#include "selfcorr/gaussian.hpp"
#include "selfcorr/random.hpp"

namespace selfcorr {

/// Correction strength gamma in [0, inf]. Infinity is its own variant.
class CorrectionStrength {
 public:
  constexpr CorrectionStrength() = default;

  static CorrectionStrength finite(double gamma);
  static constexpr CorrectionStrength infinite() {
    CorrectionStrength s;
    s.infinite_ = true;
    return s;
  }
  /// Accepts "inf" or a nonnegative decimal.
  static CorrectionStrength parse(std::string_view token);

  constexpr bool is_infinite() const noexcept { return infinite_; }
  /// +infinity for the infinite variant.
  double value() const noexcept;
  /// Mixture weight 1/(1+gamma) on the model being corrected.
  double model_weight() const noexcept { return infinite_ ? 0.0 : 1.0 / (1.0 + gamma_); }
  /// Mixture weight gamma/(1+gamma) on the target model.
  double target_weight() const noexcept { return infinite_ ? 1.0 : gamma_ / (1.0 + gamma_); }

  std::string to_string() const;

  friend constexpr bool operator==(const CorrectionStrength& a, const CorrectionStrength& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.gamma_ == b.gamma_);
  }
  friend constexpr bool operator<(const CorrectionStrength& a, const CorrectionStrength& b) {
    if (a.infinite_) return false;
    return b.infinite_ || a.gamma_ < b.gamma_;
  }

 private:
  double gamma_ = 0.0;
  bool infinite_ = false;
};

enum class CorrectionMode {
  DistributionWise,  ///< corrected points drawn directly from the mixture
  PointwiseMatched,  ///< each synthetic point moved to its distance-minimizing match
  PointwiseRandom,   ///< each synthetic point moved to a uniformly random match
};

std::string_view to_string(CorrectionMode mode) noexcept;
CorrectionMode parse_correction_mode(std::string_view token);

struct CorrectionSpec {
  CorrectionStrength gamma;
  CorrectionMode mode = CorrectionMode::DistributionWise;

  friend bool operator==(const CorrectionSpec&, const CorrectionSpec&) = default;
};

struct Matching {
  /// permutation[i] is the destination index matched to source i.
  std::vector<Eigen::Index> permutation;
  double cost = 0.0;
};

/// (p(x) + gamma p_star(x)) / (1 + gamma); p_star(x) when gamma is infinite.
double mixture_density(const GaussianParams& p, const GaussianParams& p_star, CorrectionStrength gamma,
                       const Point& x);

/// m i.i.d. draws from (empirical(synth) + gamma target) / (1 + gamma).
/// Every draw consumes one uniform, one resampling index and one target
/// normal vector regardless of which branch wins, so runs that differ only in
/// gamma stay on common random numbers.
Dataset sample_corrected(const Dataset& synth, const GaussianParams& target, CorrectionStrength gamma,
                         Eigen::Index m, Rng& rng);

/// Permutation minimizing the summed Euclidean distance from src[i] to
/// dst[sigma(i)]; ties go to the lexicographically smallest permutation.
Matching match_pointwise(const Dataset& src, const Dataset& dst);

/// Uniformly random matching of n points.
Matching random_matching(Eigen::Index n, Rng& rng);

/// Draws |synth| points from the corrected mixture and returns them reordered
/// so that output[i] is the point synth[i] is moved to.
Dataset apply_pointwise_correction(const Dataset& synth, const GaussianParams& target, CorrectionStrength gamma,
                                   Rng& rng, CorrectionMode mode = CorrectionMode::PointwiseMatched);

inline constexpr std::uint64_t kCdfMonteCarloSeed = 0x5e1fc0aa5e1fc0aaULL;
inline constexpr Eigen::Index kCdfMonteCarloDraws = 100000;

/// Sup over probe points of |F_sample(v) - F_mix(v)| with
/// F_mix = (F_synth_ref + gamma F_target) / (1 + gamma). All CDFs are
/// orthant CDFs P(X <= v componentwise). F_target is exact for diagonal
/// covariances and a fixed-seed Monte Carlo estimate otherwise.
double empirical_cdf_sup_distance(const Dataset& sample, const Dataset& synth_ref, const GaussianParams& target,
                                  CorrectionStrength gamma, const Dataset& probes);

/// Fraction of points lying componentwise below `v`.
double empirical_cdf(const Dataset& data, const Point& v);

}  // namespace selfcorr
