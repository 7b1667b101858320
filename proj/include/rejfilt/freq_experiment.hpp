#pragma once

#include <cstdint>
#include <vector>

#include "rejfilt/gaussian_model.hpp"
#include "rejfilt/likelihood.hpp"
#include "rejfilt/rng.hpp"

namespace rejfilt {

inline constexpr double kDefaultStepSigma = M_PI / 120.0;

/// Two-outcome inversion likelihood for frequency estimation:
/// P(1 | x) = cos^2((x - x_minus) * t / 2), P(0 | x) = 1 - P(1 | x).
double freq_likelihood(int outcome, double x, double x_minus, double t);

/// LikelihoodModel over the outcome bit; (x_minus, t) are the experiment
/// settings chosen per update, kappa the acceptance scale under study.
class FreqLikelihood final : public LikelihoodModel<int> {
 public:
  FreqLikelihood(double x_minus, double t, double kappa = 1.0);

  double evaluate(const int& outcome, const Eigen::VectorXd& x) const override;
  double scale(const int&) const override { return kappa_; }

  [[nodiscard]] double x_minus() const { return x_minus_; }
  [[nodiscard]] double t() const { return t_; }

 private:
  double x_minus_;
  double t_;
  double kappa_;
};

/// Particle guess heuristic: the inversion point is one draw from the current
/// model and t = 1 / sqrt(trace Sigma). Undefined on a zero-spread model.
struct ExperimentDesign {
  double x_minus = 0.0;
  double t = 0.0;
};
ExperimentDesign pgh_design(const GaussianModel& model, RngStream& rng);

/// True frequency following a normal random walk in the update index.
struct DriftingTruth {
  double current = 0.0;
  double step_sigma = kDefaultStepSigma;

  /// x(0) ~ Uniform(0, pi/2).
  static DriftingTruth initial(RngStream& rng, double step_sigma = kDefaultStepSigma);
};

/// current + N(0, step_sigma^2).
DriftingTruth advance_truth(const DriftingTruth& truth, RngStream& rng);

/// Bernoulli outcome with success probability freq_likelihood(1, ...).
int simulate_outcome(const DriftingTruth& truth, double x_minus, double t, RngStream& rng);

struct ExperimentRecord {
  std::int64_t k = 0;
  double x_minus = 0.0;
  double t = 0.0;
  int outcome = 0;
  std::int64_t n_accepted = 0;
  double mean = 0.0;
  double trace_cov = 0.0;
  double truth = 0.0;
  double loss = 0.0;  // (mean - truth)^2
};

struct TrackingConfig {
  std::int64_t n_updates = 200;
  std::int64_t attempts = 100;        // m
  double recovery_factor = 0.02;      // r
  double kappa = 1.0;
  double eta = kDefaultStepSigma * kDefaultStepSigma;  // diffusion rate, matches the walk
  double step_sigma = kDefaultStepSigma;               // truth walk
  std::uint64_t seed = 0;
};

struct TrackingResult {
  double initial_loss = 0.0;  // loss of the prior mean before any update
  std::vector<ExperimentRecord> records;
};

/// One tracking trial: per update, diffuse the model, design via PGH,
/// simulate the outcome, advance the truth, then rejection-filter update.
TrackingResult run_tracking(const TrackingConfig& config);

struct KappaSweepRow {
  double kappa = 0.0;
  double median_initial_loss = 0.0;
  double median_final_loss = 0.0;
  double normalized_median_loss = 0.0;  // median(final) / median(initial)
};

/// Sensitivity sweep: for each kappa, `trials` independent inferences of
/// `n_measurements` updates; the median terminal loss is normalized by the
/// median loss before any update. Trials run in parallel, one stream each.
std::vector<KappaSweepRow> kappa_sweep(const std::vector<double>& kappa_values,
                                       std::int64_t n_measurements, std::int64_t attempts,
                                       double recovery_factor, std::int64_t trials,
                                       std::uint64_t seed);

/// Median of an unsorted sample (midpoint convention for even sizes).
double median(std::vector<double> values);

}  // namespace rejfilt
