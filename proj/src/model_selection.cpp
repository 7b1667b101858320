#include "rejfilt/model_selection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "rejfilt/errors.hpp"
#include "rejfilt/rejection_filter.hpp"

namespace rejfilt {

LogLikelihoodRegister update_register(const LogLikelihoodRegister& reg, std::int64_t n_accepted,
                                      std::int64_t attempts) {
  if (attempts < 1) throw std::invalid_argument("update_register: attempts must be >= 1");
  if (n_accepted < 0 || n_accepted > attempts) {
    throw std::invalid_argument("update_register: need 0 <= n_accepted <= attempts");
  }
  if (!(reg.hedging > 0.0)) throw std::invalid_argument("update_register: hedging must be > 0");

  LogLikelihoodRegister out = reg;
  out.value += std::log((static_cast<double>(n_accepted) + reg.hedging) /
                        (static_cast<double>(attempts) + 2.0 * reg.hedging));
  out.updates_seen += 1;
  return out;
}

double bayes_factor(const LogLikelihoodRegister& reg_a, const LogLikelihoodRegister& reg_b) {
  if (reg_a.updates_seen != reg_b.updates_seen) {
    throw IncomparableRegistersError("bayes_factor: registers saw different update counts");
  }
  return std::exp(reg_a.value - reg_b.value);
}

namespace {

/// P(1|x) = x, clamped away from hard zeros so acceptance never locks up.
class RateLikelihood final : public LikelihoodModel<int> {
 public:
  double evaluate(const int& outcome, const Eigen::VectorXd& x) const override {
    const double p = std::clamp(x[0], 0.02, 0.98);
    return outcome != 0 ? p : 1.0 - p;
  }
};

/// Structureless alternative: every outcome is a coin flip.
class CoinFlipLikelihood final : public LikelihoodModel<int> {
 public:
  double evaluate(const int&, const Eigen::VectorXd&) const override { return 0.5; }
};

}  // namespace

std::vector<TwoModelDemoRow> run_two_model_demo(std::int64_t updates, std::int64_t attempts,
                                                double p_true, std::uint64_t seed) {
  if (updates < 1) throw std::invalid_argument("run_two_model_demo: updates must be >= 1");
  if (!(p_true > 0.0 && p_true < 1.0)) {
    throw std::invalid_argument("run_two_model_demo: p_true must lie in (0, 1)");
  }

  const RateLikelihood like_a;
  const CoinFlipLikelihood like_b;
  GaussianModel model_a(Eigen::VectorXd::Constant(1, 0.5),
                        Eigen::MatrixXd::Constant(1, 1, 0.25));
  GaussianModel model_b = model_a;
  LogLikelihoodRegister reg_a;
  LogLikelihoodRegister reg_b;

  RngStream stream(derive_seed(seed, 0x6D6F64656CULL));
  std::vector<TwoModelDemoRow> rows;
  rows.reserve(static_cast<std::size_t>(updates));

  for (std::int64_t k = 0; k < updates; ++k) {
    const std::array<int, 1> evidence{stream.uniform01() < p_true ? 1 : 0};

    RFConfig config;
    config.attempts = attempts;
    config.recovery_factor = 0.02;
    config.rng_seed = stream.split();
    UpdateResult up_a = rf_update<int>(evidence, model_a, like_a, config);
    config.rng_seed = stream.split();
    UpdateResult up_b = rf_update<int>(evidence, model_b, like_b, config);
    model_a = std::move(up_a.posterior);
    model_b = std::move(up_b.posterior);

    reg_a = update_register(reg_a, up_a.n_accepted, attempts);
    reg_b = update_register(reg_b, up_b.n_accepted, attempts);

    TwoModelDemoRow row;
    row.k = k;
    row.ell_a = reg_a.value;
    row.ell_b = reg_b.value;
    row.bayes = bayes_factor(reg_a, reg_b);
    row.n_accepted_a = up_a.n_accepted;
    row.n_accepted_b = up_b.n_accepted;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rejfilt
