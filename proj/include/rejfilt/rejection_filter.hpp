#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>

#include "rejfilt/errors.hpp"
#include "rejfilt/gaussian_model.hpp"
#include "rejfilt/likelihood.hpp"
#include "rejfilt/moment_accumulator.hpp"
#include "rejfilt/rng.hpp"

namespace rejfilt {

struct RFConfig {
  std::int64_t attempts = 100;     // m
  double recovery_factor = 0.0;    // r, covariance inflation on empty updates
  std::uint64_t rng_seed = 0;
};

struct ApproxRejectionDiagnostics {
  double acceptance_rate = 0.0;   // N_a / m
  double clipped_fraction = 0.0;  // drawn samples with some P(E|x)/kappa_E > 1
  std::optional<double> bad_mass_bound;  // delta, when enumerable
};

struct UpdateResult {
  GaussianModel posterior;
  std::int64_t n_accepted = 0;
  ApproxRejectionDiagnostics diagnostics;
};

namespace detail {

inline void check_likelihood_value(double p) {
  if (!(p >= 0.0) || !std::isfinite(p)) {
    throw InvalidLikelihoodError("likelihood evaluation returned negative or non-finite value");
  }
}

/// prod over evidence of min(P(E|x)/kappa_E, 1); flags whether any ratio clipped.
template <typename Evidence>
double acceptance_probability(const Eigen::VectorXd& x, std::span<const Evidence> evidence,
                              const LikelihoodModel<Evidence>& likelihood, bool* clipped) {
  double prod = 1.0;
  for (const Evidence& e : evidence) {
    const double p = likelihood.evaluate(e, x);
    check_likelihood_value(p);
    double ratio = p / likelihood.scale(e);
    if (ratio > 1.0) {
      ratio = 1.0;
      if (clipped != nullptr) *clipped = true;
    }
    prod *= ratio;
  }
  return prod;
}

}  // namespace detail

/// Accept iff prod_E min(P(E|x)/kappa_E, 1) >= u.
template <typename Evidence>
bool accept_sample(const Eigen::VectorXd& x, std::span<const Evidence> evidence,
                   const LikelihoodModel<Evidence>& likelihood, double u) {
  if (!(u >= 0.0 && u < 1.0)) {
    throw std::invalid_argument("accept_sample: u must lie in [0, 1)");
  }
  return detail::acceptance_probability(x, evidence, likelihood, nullptr) >= u;
}

/// One rejection-filtering update: draw `attempts` candidates from the prior,
/// keep those passing the rescaled-likelihood test, and refit a Gaussian to
/// the survivors. Candidate i draws from candidate_stream(rng_seed, i), so a
/// batched run splitting the attempt range reproduces the same candidates.
///
/// With zero acceptances the prior is returned with covariance inflated by
/// (1 + recovery_factor); a single acceptance keeps that inflation but
/// recenters on the accepted sample.
template <typename Evidence>
UpdateResult rf_update(std::span<const Evidence> evidence, const GaussianModel& prior,
                       const LikelihoodModel<Evidence>& likelihood, const RFConfig& config) {
  if (config.attempts < 1) throw std::invalid_argument("rf_update: attempts must be >= 1");
  if (!(config.recovery_factor >= 0.0)) {
    throw std::invalid_argument("rf_update: recovery factor must be >= 0");
  }

  const Eigen::MatrixXd factor = covariance_factor(prior.covariance());
  MomentAccumulator acc(prior.dim());
  std::int64_t clipped_draws = 0;

  for (std::int64_t i = 0; i < config.attempts; ++i) {
    RngStream stream = candidate_stream(config.rng_seed, static_cast<std::uint64_t>(i));
    const Eigen::VectorXd x = sample_with_factor(prior.mean(), factor, stream);
    const double u = stream.uniform01();

    bool clipped = false;
    const double p = detail::acceptance_probability(x, evidence, likelihood, &clipped);
    if (clipped) ++clipped_draws;
    if (p >= u) acc.accumulate(x);
  }

  const double m = static_cast<double>(config.attempts);
  ApproxRejectionDiagnostics diag;
  diag.acceptance_rate = static_cast<double>(acc.count()) / m;
  diag.clipped_fraction = static_cast<double>(clipped_draws) / m;

  return UpdateResult{finalize(acc, prior, config.recovery_factor), acc.count(), diag};
}

/// delta of the approximate-rejection bound on a fully enumerable instance:
///   sum_{x in bad} (P(E|x) - kappa) P(x) / sum_x P(E|x) P(x),
/// where bad = {x : P(E|x) > kappa}.
double discrete_bad_mass(std::span<const double> prior_probs,
                         std::span<const double> likelihoods, double kappa);

}  // namespace rejfilt
