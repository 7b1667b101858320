#pragma once

#include <functional>
#include <stdexcept>
#include <utility>

#include <Eigen/Core>

namespace rejfilt {

/// Evidence-conditional likelihood P(E|x) together with its per-evidence
/// acceptance scale kappa_E in (0, 1]. Evaluation must be deterministic for
/// a fixed (evidence, x) pair.
template <typename Evidence>
class LikelihoodModel {
 public:
  virtual ~LikelihoodModel() = default;

  virtual double evaluate(const Evidence& evidence, const Eigen::VectorXd& x) const = 0;

  /// kappa_E for this evidence; acceptance uses min(P(E|x)/kappa_E, 1).
  virtual double scale(const Evidence& /*evidence*/) const { return 1.0; }
};

/// Adapter for ad-hoc likelihoods, mostly in tests and demos.
template <typename Evidence>
class FunctionLikelihood final : public LikelihoodModel<Evidence> {
 public:
  using Fn = std::function<double(const Evidence&, const Eigen::VectorXd&)>;

  explicit FunctionLikelihood(Fn fn, double kappa = 1.0)
      : fn_(std::move(fn)), kappa_(kappa) {
    if (!(kappa > 0.0 && kappa <= 1.0)) {
      throw std::invalid_argument("FunctionLikelihood: kappa must lie in (0, 1]");
    }
  }

  double evaluate(const Evidence& evidence, const Eigen::VectorXd& x) const override {
    return fn_(evidence, x);
  }

  double scale(const Evidence&) const override { return kappa_; }

 private:
  Fn fn_;
  double kappa_;
};

}  // namespace rejfilt
