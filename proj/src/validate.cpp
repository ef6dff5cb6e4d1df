#include "selfcorr/validate.hpp"

#include <algorithm>
#include <cstring>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "selfcorr/bounds.hpp"
#include "selfcorr/correction.hpp"
#include "selfcorr/csv.hpp"
#include "selfcorr/format.hpp"
#include "selfcorr/metrics.hpp"
#include "selfcorr/random.hpp"

namespace selfcorr {

namespace {

constexpr std::uint64_t kValidationSeed = 20240611;

GaussianParams random_gaussian(Rng& rng, Eigen::Index d) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd mean(d);
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) mean(i) = normal(rng);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = normal(rng);
  Eigen::MatrixXd cov = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
  cov = 0.5 * (cov + cov.transpose()).eval();
  return GaussianParams(mean, cov);
}

double trapezoid(const std::function<double(double)>& f, double lo, double hi, int steps) {
  const double h = (hi - lo) / steps;
  double sum = 0.5 * (f(lo) + f(hi));
  for (int i = 1; i < steps; ++i) sum += f(lo + i * h);
  return sum * h;
}

GaussianParams gaussian_1d(double mean, double var) {
  return GaussianParams(Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, var));
}

using Check = std::function<std::string()>;  // empty string on success

std::string w2_nonnegative_symmetric(const ValidationHooks& hooks) {
  Rng rng(kValidationSeed);
  for (int i = 0; i < 100; ++i) {
    const auto p = random_gaussian(rng, 2);
    const auto q = random_gaussian(rng, 2);
    const double pq = hooks.gaussian_w2(p, q);
    const double qp = hooks.gaussian_w2(q, p);
    if (!(pq >= 0.0)) return "negative distance " + format_double(pq);
    if (std::abs(pq - qp) > 1e-9) return "asymmetric: " + format_double(pq) + " vs " + format_double(qp);
  }
  return {};
}

std::string w2_identity(const ValidationHooks& hooks) {
  Rng rng(kValidationSeed + 1);
  for (int i = 0; i < 100; ++i) {
    const auto p = random_gaussian(rng, 2);
    const double self = hooks.gaussian_w2(p, p);
    if (!(std::abs(self) <= 1e-9)) return "W2(p, p) = " + format_double(self);
    const auto q = random_gaussian(rng, 2);
    if (!(hooks.gaussian_w2(p, q) > 1e-9)) return "distinct Gaussians at zero distance";
  }
  return {};
}

std::string w2_triangle(const ValidationHooks& hooks) {
  Rng rng(kValidationSeed + 2);
  for (int i = 0; i < 100; ++i) {
    const auto p = random_gaussian(rng, 2);
    const auto q = random_gaussian(rng, 2);
    const auto r = random_gaussian(rng, 2);
    const double lhs = hooks.gaussian_w2(p, r);
    const double rhs = hooks.gaussian_w2(p, q) + hooks.gaussian_w2(q, r);
    if (lhs > rhs + 1e-9) return "triangle violated: " + format_double(lhs) + " > " + format_double(rhs);
  }
  return {};
}

std::string w2_closed_forms(const ValidationHooks& hooks) {
  const auto a = GaussianParams::standard(2);
  const GaussianParams b(Eigen::Vector2d(3.0, 4.0), Eigen::Matrix2d::Identity());
  const double shift = hooks.gaussian_w2(a, b);
  if (std::abs(shift - 5.0) > 1e-12) return "mean shift (3,4) gave " + format_double(shift);
  const double scale = hooks.gaussian_w2(gaussian_1d(0.0, 0.25), gaussian_1d(0.0, 4.0));
  if (std::abs(scale - 1.5) > 1e-12) return "N(0,0.5^2) vs N(0,2^2) gave " + format_double(scale);
  return {};
}

std::string param_distance_metric() {
  Rng rng(kValidationSeed + 3);
  for (int i = 0; i < 100; ++i) {
    const auto p = random_gaussian(rng, 3);
    const auto q = random_gaussian(rng, 3);
    const auto r = random_gaussian(rng, 3);
    if (param_distance(p, from_param_vector(to_param_vector(p), 3)) != 0.0) return "round trip not at zero distance";
    if (param_distance(p, q) != param_distance(q, p)) return "asymmetric";
    if (param_distance(p, r) > param_distance(p, q) + param_distance(q, r) + 1e-12) return "triangle violated";
  }
  return {};
}

std::string mle_optimality() {
  Rng rng(kValidationSeed + 4);
  const auto data = sample_gaussian(GaussianParams::standard(2), 500, rng);
  const auto fitted = fit_gaussian(data);
  auto mean_log_lik = [&](const GaussianParams& g) {
    const GaussianDensity<double> density(g);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < data.size(); ++i) sum += density.log_pdf(data.point(i));
    return sum / static_cast<double>(data.size());
  };
  const double best = mean_log_lik(fitted);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 20; ++i) {
    Eigen::Vector2d dir(normal(rng), normal(rng));
    dir = 1e-3 * dir.normalized();
    const double perturbed = mean_log_lik(GaussianParams(fitted.mean() + dir, fitted.cov()));
    if (perturbed > best) return "perturbed mean increased the log-likelihood";
  }
  return {};
}

std::string mixture_normalization() {
  const auto p = gaussian_1d(0.5, 1.0);
  const auto target = gaussian_1d(0.0, 1.0);
  for (const double g : {0.0, 0.5, 1.0, 4.0}) {
    const auto gamma = CorrectionStrength::finite(g);
    const double mass = trapezoid(
        [&](double x) { return mixture_density(p, target, gamma, Eigen::VectorXd::Constant(1, x)); }, -10.0, 10.0,
        4000);
    if (std::abs(mass - 1.0) > 1e-4) return "gamma " + format_double(g) + " integrates to " + format_double(mass);
  }
  return {};
}

std::string mixture_strengths() {
  const auto p = gaussian_1d(1.0, 2.0);
  const auto target = gaussian_1d(0.0, 1.0);
  for (const double x : {-2.0, -0.3, 0.0, 0.7, 2.5}) {
    const Eigen::VectorXd v = Eigen::VectorXd::Constant(1, x);
    const double pp = pdf(p, v);
    const double pt = pdf(target, v);
    if (mixture_density(p, target, CorrectionStrength::finite(0.0), v) != pp) return "gamma 0 is not p";
    if (std::abs(mixture_density(p, target, CorrectionStrength::finite(1.0), v) - 0.5 * (pp + pt)) > 1e-15) {
      return "gamma 1 is not the average";
    }
    if (mixture_density(p, target, CorrectionStrength::infinite(), v) != pt) return "gamma inf is not the target";
  }
  return {};
}

std::string mixture_pointwise_inequality() {
  const auto p = gaussian_1d(1.0, 1.5);
  const auto target = gaussian_1d(0.0, 1.0);
  for (const double g : {0.25, 0.5, 2.0, 4.0}) {
    const auto gamma = CorrectionStrength::finite(g);
    for (int i = 0; i < 100; ++i) {
      const Eigen::VectorXd v = Eigen::VectorXd::Constant(1, -5.0 + 10.0 * i / 99.0);
      const double mix = mixture_density(p, target, gamma, v);
      const double to_target = std::abs(mix - pdf(target, v));
      const double to_model = std::abs(mix - pdf(p, v));
      const bool ok = g > 1.0 ? to_target <= to_model : to_target >= to_model;
      if (!ok) return "gamma " + format_double(g) + " fails at x = " + format_double(v(0));
    }
  }
  return {};
}

double brute_force_matching_cost(const Dataset& src, const Dataset& dst) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(src.size()));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < src.size(); ++i) cost += (src.point(i) - dst.point(perm[static_cast<std::size_t>(i)])).norm();
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::string matching_brute_force() {
  Rng rng(kValidationSeed + 5);
  for (Eigen::Index n = 1; n <= 8; ++n) {
    for (int rep = 0; rep < 3; ++rep) {
      const auto src = sample_gaussian(GaussianParams::standard(2), n, rng);
      const auto dst = sample_gaussian(GaussianParams::standard(2), n, rng);
      const auto m = match_pointwise(src, dst);
      const double oracle = brute_force_matching_cost(src, dst);
      if (!is_permutation(m.permutation)) return "result is not a permutation";
      if (std::abs(m.cost - oracle) > 1e-12 * std::max(1.0, oracle)) {
        return "n = " + std::to_string(n) + ": cost " + format_double(m.cost) + " vs " + format_double(oracle);
      }
    }
  }
  return {};
}

std::string matching_beats_identity() {
  Rng rng(kValidationSeed + 6);
  for (const Eigen::Index n : {5, 12, 30}) {
    const auto src = sample_gaussian(GaussianParams::standard(2), n, rng);
    const auto dst = sample_gaussian(GaussianParams::standard(2), n, rng);
    double identity = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) identity += (src.point(i) - dst.point(i)).norm();
    if (match_pointwise(src, dst).cost > identity + 1e-12) return "matching worse than identity at n = " + std::to_string(n);
  }
  return {};
}

std::string admissible_implies_contraction() {
  Rng rng(kValidationSeed + 7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int set = 0; set < 10; ++set) {
    StabilityConstants c;
    c.alpha = 0.1 + 2.0 * unit(rng);
    c.L = 2.0 * unit(rng);
    c.epsilon = unit(rng);
    for (int i = 0; i < 50; ++i) {
      for (int j = 0; j < 50; ++j) {
        const double lambda = 1.2 * i / 49.0;
        const auto gamma = CorrectionStrength::finite(10.0 * j / 49.0);
        if (!admissible(lambda, gamma, c)) continue;
        const auto k = contraction_factor(lambda, gamma, c);
        if (!k || *k >= 1.0) return "admissible (" + format_double(lambda) + ", " + gamma.to_string() + ") without contraction";
      }
    }
  }
  return {};
}

std::string frontier_doubling() {
  const StabilityConstants c;  // epsilon = 0
  const double zero = admissible_lambda_limit(CorrectionStrength::finite(0.0), c);
  const double inf = admissible_lambda_limit(CorrectionStrength::infinite(), c);
  if (zero != 0.5 || inf != 1.0) return "frontiers " + format_double(zero) + " and " + format_double(inf);
  if (!admissible(0.49, CorrectionStrength::finite(0.0), c) || admissible(0.5, CorrectionStrength::finite(0.0), c)) {
    return "gamma 0 frontier not at 0.5";
  }
  if (!admissible(0.99, CorrectionStrength::infinite(), c) || admissible(1.0, CorrectionStrength::infinite(), c)) {
    return "gamma inf frontier not at 1";
  }
  return {};
}

std::string csv_roundtrip() {
  Rng rng(kValidationSeed + 8);
  std::uniform_int_distribution<std::uint64_t> bits;
  std::vector<TrajectoryRow> rows;
  for (int i = 0; i < 2000; ++i) {
    TrajectoryRow r;
    r.generation = i;
    r.seed = bits(rng);
    auto random_double = [&] {
      double v;
      do {
        const std::uint64_t b = bits(rng);
        std::memcpy(&v, &b, sizeof v);
      } while (!std::isfinite(v));
      return v;
    };
    r.lambda = random_double();
    r.gamma = i % 7 == 0 ? CorrectionStrength::infinite() : CorrectionStrength::finite(std::abs(random_double()));
    r.mode = static_cast<CorrectionMode>(i % 3);
    r.n = i + 2;
    r.w2 = random_double();
    r.param_dist = random_double();
    r.synth_pool_size = i;
    rows.push_back(r);
  }
  std::stringstream buffer;
  write_trajectory_csv(buffer, rows);
  const auto parsed = read_trajectory_csv(buffer);
  if (parsed != rows) return "parsed rows differ from written rows";
  return {};
}

}  // namespace

ValidationHooks default_hooks() {
  return ValidationHooks{[](const GaussianParams& p, const GaussianParams& q) { return gaussian_w2(p, q); }};
}

std::vector<PropertyResult> run_validation(const ValidationHooks& hooks) {
  const std::vector<std::pair<std::string, Check>> checks{
      {"w2-nonnegative-symmetric", [&] { return w2_nonnegative_symmetric(hooks); }},
      {"w2-identity-of-indiscernibles", [&] { return w2_identity(hooks); }},
      {"w2-triangle-inequality", [&] { return w2_triangle(hooks); }},
      {"w2-closed-forms", [&] { return w2_closed_forms(hooks); }},
      {"param-distance-metric", param_distance_metric},
      {"mle-local-optimality", mle_optimality},
      {"mixture-normalization", mixture_normalization},
      {"mixture-strengths-0-1-inf", mixture_strengths},
      {"mixture-pointwise-inequality", mixture_pointwise_inequality},
      {"matching-brute-force-n-le-8", matching_brute_force},
      {"matching-not-worse-than-identity", matching_beats_identity},
      {"admissible-implies-contraction", admissible_implies_contraction},
      {"admissible-frontier-doubling", frontier_doubling},
      {"csv-float-roundtrip", csv_roundtrip},
  };
  std::vector<PropertyResult> out;
  for (const auto& [name, check] : checks) {
    PropertyResult r{name, false, {}};
    try {
      r.detail = check();
      r.passed = r.detail.empty();
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace selfcorr
