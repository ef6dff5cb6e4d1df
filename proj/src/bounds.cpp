#include "selfcorr/bounds.hpp"

#include <cmath>
#include <string>

#include "selfcorr/error.hpp"

namespace selfcorr {

void StabilityConstants::validate() const {
  const bool finite = std::isfinite(alpha) && std::isfinite(L) && std::isfinite(epsilon) &&
                      std::isfinite(eps_opt) && std::isfinite(a) && std::isfinite(b);
  if (!finite) throw Error(ErrorKind::ConfigError, "stability constants must be finite");
  if (!(alpha > 0.0)) throw Error(ErrorKind::ConfigError, "alpha must be positive");
  if (!(b > 0.0)) throw Error(ErrorKind::ConfigError, "b must be positive");
  if (L < 0.0 || epsilon < 0.0 || eps_opt < 0.0 || a < 0.0) {
    throw Error(ErrorKind::ConfigError, "L, epsilon, eps_opt and a must be nonnegative");
  }
}

namespace {

void check_lambda(double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "lambda must be a finite nonnegative number");
  }
}

}  // namespace

std::optional<double> rho(double lambda, const StabilityConstants& c) {
  check_lambda(lambda);
  const double scaled = lambda * (c.alpha + c.epsilon * c.L);
  const double denom = c.alpha - scaled;
  if (denom <= 0.0) return std::nullopt;
  return scaled / denom;
}

std::optional<double> contraction_factor(double lambda, CorrectionStrength gamma, const StabilityConstants& c) {
  const auto r = rho(lambda, c);
  if (!r) return std::nullopt;
  if (gamma.is_infinite()) return 0.0;
  return *r / (1.0 + gamma.value());
}

double admissible_lambda_limit(CorrectionStrength gamma, const StabilityConstants& c) {
  const double threshold = gamma.is_infinite() ? 1.0 : (1.0 + gamma.value()) / (2.0 + gamma.value());
  return threshold / (1.0 + c.epsilon * c.L / c.alpha);
}

bool admissible(double lambda, CorrectionStrength gamma, const StabilityConstants& c) {
  check_lambda(lambda);
  const double threshold = gamma.is_infinite() ? 1.0 : (1.0 + gamma.value()) / (2.0 + gamma.value());
  return lambda * (1.0 + c.epsilon * c.L / c.alpha) < threshold;
}

double tau_n(double delta, std::uint64_t n, const StabilityConstants& c) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorKind::InvalidDelta, "delta must lie in (0, 1), got " + std::to_string(delta));
  }
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "n must be positive");
  const double ratio = c.b / delta;
  if (!(ratio > 1.0)) {
    throw Error(ErrorKind::NonPositiveLogArgument,
                "b / delta = " + std::to_string(ratio) + " <= 1 makes the statistical term undefined");
  }
  return c.eps_opt + c.a / std::sqrt(static_cast<double>(n)) * std::sqrt(std::log(ratio));
}

double bound_value(std::uint64_t t, double tau, double kappa, double theta0_dist) {
  const double steps = static_cast<double>(t);
  const double geometric = kappa == 1.0 ? steps + 1.0 : (1.0 - std::pow(kappa, steps + 1.0)) / (1.0 - kappa);
  return tau * geometric + std::pow(kappa, steps) * theta0_dist;
}

std::optional<double> bound_trajectory(std::uint64_t t, std::uint64_t n, double delta, double theta0_dist,
                                       double lambda, CorrectionStrength gamma, const StabilityConstants& c) {
  if (!(theta0_dist >= 0.0)) throw Error(ErrorKind::InvalidArgument, "initial distance must be nonnegative");
  const auto kappa = contraction_factor(lambda, gamma, c);
  if (!kappa) return std::nullopt;
  if (t == 0) return theta0_dist;
  return bound_value(t, tau_n(delta / static_cast<double>(t), n, c), *kappa, theta0_dist);
}

std::vector<GridCell> admissibility_grid(const std::vector<double>& lambdas,
                                         const std::vector<CorrectionStrength>& gammas, const StabilityConstants& c) {
  if (lambdas.empty() || gammas.empty()) throw Error(ErrorKind::EmptyInput, "grid needs lambda and gamma values");
  std::vector<GridCell> cells;
  cells.reserve(lambdas.size() * gammas.size());
  for (const auto& gamma : gammas) {
    for (const double lambda : lambdas) {
      cells.push_back(GridCell{lambda, gamma, admissible(lambda, gamma, c), rho(lambda, c),
                               contraction_factor(lambda, gamma, c)});
    }
  }
  return cells;
}

}  // namespace selfcorr
