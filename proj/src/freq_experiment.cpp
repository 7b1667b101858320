#include "rejfilt/freq_experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "rejfilt/diffusion.hpp"
#include "rejfilt/parallel.hpp"
#include "rejfilt/rejection_filter.hpp"

namespace rejfilt {

double freq_likelihood(int outcome, double x, double x_minus, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("freq_likelihood: t must be > 0");
  const double c = std::cos((x - x_minus) * t / 2.0);
  const double p1 = c * c;
  return outcome != 0 ? p1 : 1.0 - p1;
}

FreqLikelihood::FreqLikelihood(double x_minus, double t, double kappa)
    : x_minus_(x_minus), t_(t), kappa_(kappa) {
  if (!(t > 0.0)) throw std::invalid_argument("FreqLikelihood: t must be > 0");
  if (!(kappa > 0.0 && kappa <= 1.0)) {
    throw std::invalid_argument("FreqLikelihood: kappa must lie in (0, 1]");
  }
}

double FreqLikelihood::evaluate(const int& outcome, const Eigen::VectorXd& x) const {
  return freq_likelihood(outcome, x[0], x_minus_, t_);
}

ExperimentDesign pgh_design(const GaussianModel& model, RngStream& rng) {
  const double trace = model.covariance().trace();
  if (!(trace > 0.0)) {
    throw std::invalid_argument("pgh_design: undefined on a zero-spread model");
  }
  ExperimentDesign design;
  design.x_minus = sample_prior(model, rng)[0];
  design.t = 1.0 / std::sqrt(trace);
  return design;
}

DriftingTruth DriftingTruth::initial(RngStream& rng, double step_sigma) {
  DriftingTruth truth;
  truth.current = rng.uniform01() * (M_PI / 2.0);
  truth.step_sigma = step_sigma;
  return truth;
}

DriftingTruth advance_truth(const DriftingTruth& truth, RngStream& rng) {
  DriftingTruth out = truth;
  out.current += truth.step_sigma * rng.normal();
  return out;
}

int simulate_outcome(const DriftingTruth& truth, double x_minus, double t, RngStream& rng) {
  const double p1 = freq_likelihood(1, truth.current, x_minus, t);
  return rng.uniform01() < p1 ? 1 : 0;
}

TrackingResult run_tracking(const TrackingConfig& config) {
  if (config.n_updates < 1) throw std::invalid_argument("run_tracking: n_updates must be >= 1");

  // Prior matched to the Uniform(0, pi/2) initial truth.
  const double prior_mean = M_PI / 4.0;
  const double prior_var = (M_PI / 4.0) * (M_PI / 4.0) / 3.0;
  GaussianModel model(Eigen::VectorXd::Constant(1, prior_mean),
                      Eigen::MatrixXd::Constant(1, 1, prior_var));
  const DiffusionKernel kernel(config.eta);

  RngStream ctrl(derive_seed(config.seed, 0x74726163ULL));  // trial control stream
  DriftingTruth truth = DriftingTruth::initial(ctrl, config.step_sigma);

  TrackingResult result;
  result.initial_loss = (prior_mean - truth.current) * (prior_mean - truth.current);
  result.records.reserve(static_cast<std::size_t>(config.n_updates));

  for (std::int64_t k = 0; k < config.n_updates; ++k) {
    model = diffuse(model, kernel, 1.0);
    const ExperimentDesign design = pgh_design(model, ctrl);
    const int outcome = simulate_outcome(truth, design.x_minus, design.t, ctrl);
    truth = advance_truth(truth, ctrl);

    const FreqLikelihood likelihood(design.x_minus, design.t, config.kappa);
    const std::array<int, 1> evidence{outcome};
    RFConfig rf;
    rf.attempts = config.attempts;
    rf.recovery_factor = config.recovery_factor;
    rf.rng_seed = ctrl.split();
    UpdateResult update = rf_update<int>(evidence, model, likelihood, rf);
    model = std::move(update.posterior);

    ExperimentRecord rec;
    rec.k = k;
    rec.x_minus = design.x_minus;
    rec.t = design.t;
    rec.outcome = outcome;
    rec.n_accepted = update.n_accepted;
    rec.mean = model.mean()[0];
    rec.trace_cov = model.covariance().trace();
    rec.truth = truth.current;
    rec.loss = (rec.mean - rec.truth) * (rec.mean - rec.truth);
    result.records.push_back(rec);
  }
  return result;
}

std::vector<KappaSweepRow> kappa_sweep(const std::vector<double>& kappa_values,
                                       std::int64_t n_measurements, std::int64_t attempts,
                                       double recovery_factor, std::int64_t trials,
                                       std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("kappa_sweep: trials must be >= 1");
  for (const double kappa : kappa_values) {
    if (!(kappa > 0.0 && kappa <= 1.0)) {
      throw std::invalid_argument("kappa_sweep: kappa values must lie in (0, 1]");
    }
  }

  std::vector<KappaSweepRow> table;
  table.reserve(kappa_values.size());
  for (std::size_t ki = 0; ki < kappa_values.size(); ++ki) {
    std::vector<double> initial(static_cast<std::size_t>(trials));
    std::vector<double> final_loss(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](std::int64_t trial) {
      TrackingConfig config;
      config.n_updates = n_measurements;
      config.attempts = attempts;
      config.recovery_factor = recovery_factor;
      config.kappa = kappa_values[ki];
      config.seed = derive_seed(seed, static_cast<std::uint64_t>(trial));
      const TrackingResult result = run_tracking(config);
      initial[static_cast<std::size_t>(trial)] = result.initial_loss;
      final_loss[static_cast<std::size_t>(trial)] = result.records.back().loss;
    });

    KappaSweepRow row;
    row.kappa = kappa_values[ki];
    row.median_initial_loss = median(initial);
    row.median_final_loss = median(final_loss);
    row.normalized_median_loss = row.median_final_loss / row.median_initial_loss;
    table.push_back(row);
  }
  return table;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace rejfilt
