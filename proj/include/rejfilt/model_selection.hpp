#pragma once

#include <cstdint>
#include <vector>

namespace rejfilt {

/// Hedged log total-likelihood of one candidate model, accumulated from the
/// per-update acceptance counts. The hedging term beta keeps the register
/// finite through all-reject updates; beta = 1/2 suits the two-outcome
/// accept/reject event.
struct LogLikelihoodRegister {
  double value = 0.0;      // ell, natural log
  double hedging = 0.5;    // beta > 0
  std::int64_t updates_seen = 0;
};

/// value += ln((n_accepted + beta) / (attempts + 2 beta)).
/// Requires 0 <= n_accepted <= attempts and attempts >= 1.
LogLikelihoodRegister update_register(const LogLikelihoodRegister& reg, std::int64_t n_accepted,
                                      std::int64_t attempts);

/// Bayes factor K favoring model A over model B, exp(ell_A - ell_B), computed
/// in log space. Both registers must have seen the same number of updates
/// (same evidence stream, same attempt count) or the shared normalization
/// does not cancel; throws IncomparableRegistersError otherwise.
double bayes_factor(const LogLikelihoodRegister& reg_a, const LogLikelihoodRegister& reg_b);

struct TwoModelDemoRow {
  std::int64_t k = 0;
  double ell_a = 0.0;
  double ell_b = 0.0;
  double bayes = 0.0;
  std::int64_t n_accepted_a = 0;
  std::int64_t n_accepted_b = 0;
};

/// Streaming model selection on a two-model Bernoulli instance. Data come
/// from model A with success probability p_true; model A learns the rate
/// through rejection-filter updates while model B predicts a coin flip.
/// Both models track one register over the shared evidence stream.
std::vector<TwoModelDemoRow> run_two_model_demo(std::int64_t updates, std::int64_t attempts,
                                                double p_true, std::uint64_t seed);

}  // namespace rejfilt
