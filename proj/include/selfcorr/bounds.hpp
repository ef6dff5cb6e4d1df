#pragma once

// Closed-form stability quantities for iterative retraining with correction:
// the amplification constant rho(lambda), the contraction factor
// rho / (1 + gamma), the admissibility test on (lambda, gamma), the error
// floor tau_n(delta) and the resulting distance bound after t generations.
//
// "Undefined" (std::nullopt) marks the region lambda (alpha + eps L) >= alpha
// where no guarantee exists. It is a value, not an error.

#include <cstdint>
#include <optional>
#include <vector>

#include "selfcorr/correction.hpp"

namespace selfcorr {

struct StabilityConstants {
  double alpha = 1.0;    ///< strong concavity of the expected log-likelihood at the optimum
  double L = 0.0;        ///< Lipschitz constant of x -> Hessian of log p_theta(x)
  double epsilon = 0.0;  ///< W2 distance between the data distribution and the best model
  double eps_opt = 0.0;  ///< optimization error floor
  double a = 0.0;        ///< statistical error scale
  double b = 1.0;        ///< statistical error log-argument scale

  /// Throws ConfigError unless alpha > 0, b > 0, the rest >= 0, all finite.
  void validate() const;
};

std::optional<double> rho(double lambda, const StabilityConstants& c);

std::optional<double> contraction_factor(double lambda, CorrectionStrength gamma, const StabilityConstants& c);

/// lambda (1 + eps L / alpha) < (1 + gamma) / (2 + gamma); threshold 1 at gamma = inf.
bool admissible(double lambda, CorrectionStrength gamma, const StabilityConstants& c);

/// Largest lambda that is admissible in the limit, i.e. the threshold
/// (1 + gamma) / ((2 + gamma)(1 + eps L / alpha)).
double admissible_lambda_limit(CorrectionStrength gamma, const StabilityConstants& c);

/// eps_opt + a / sqrt(n) * sqrt(log(b / delta)).
double tau_n(double delta, std::uint64_t n, const StabilityConstants& c);

/// tau * sum_{i=0}^{t} kappa^i + kappa^t * theta0_dist, with the geometric sum
/// in closed form.
double bound_value(std::uint64_t t, double tau, double kappa, double theta0_dist);

/// The distance bound after t generations at confidence 1 - delta, using
/// tau_n(delta / t). t = 0 returns theta0_dist.
std::optional<double> bound_trajectory(std::uint64_t t, std::uint64_t n, double delta, double theta0_dist,
                                       double lambda, CorrectionStrength gamma, const StabilityConstants& c);

struct GridCell {
  double lambda = 0.0;
  CorrectionStrength gamma;
  bool admissible = false;
  std::optional<double> rho;
  std::optional<double> contraction_factor;
};

/// Row-major over gammas: cells[g * lambdas.size() + l].
std::vector<GridCell> admissibility_grid(const std::vector<double>& lambdas,
                                         const std::vector<CorrectionStrength>& gammas, const StabilityConstants& c);

}  // namespace selfcorr
