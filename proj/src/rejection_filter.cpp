#include "rejfilt/rejection_filter.hpp"

namespace rejfilt {

double discrete_bad_mass(std::span<const double> prior_probs,
                         std::span<const double> likelihoods, double kappa) {
  if (prior_probs.size() != likelihoods.size()) {
    throw DimensionMismatchError("discrete_bad_mass: table sizes disagree");
  }
  if (!(kappa > 0.0)) throw std::invalid_argument("discrete_bad_mass: kappa must be > 0");

  double evidence_prob = 0.0;
  double bad_mass = 0.0;
  for (std::size_t i = 0; i < prior_probs.size(); ++i) {
    evidence_prob += likelihoods[i] * prior_probs[i];
    if (likelihoods[i] > kappa) bad_mass += (likelihoods[i] - kappa) * prior_probs[i];
  }
  if (evidence_prob <= 0.0) return 0.0;
  return bad_mass / evidence_prob;
}

}  // namespace rejfilt
