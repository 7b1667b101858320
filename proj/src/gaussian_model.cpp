#include "rejfilt/gaussian_model.hpp"

#include <cmath>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "rejfilt/errors.hpp"

namespace rejfilt {

GaussianModel::GaussianModel(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  const Eigen::Index d = mean_.size();
  if (covariance_.rows() != d || covariance_.cols() != d) {
    throw CorruptedModelError("GaussianModel: mean/covariance dimensions disagree");
  }
  if (!mean_.allFinite() || !covariance_.allFinite()) {
    throw CorruptedModelError("GaussianModel: non-finite entries");
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j + 1; i < d; ++i) {
      const double a = covariance_(i, j);
      const double b = covariance_(j, i);
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) {
        throw CorruptedModelError("GaussianModel: covariance not symmetric");
      }
    }
  }
  if (d > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(covariance_,
                                                        Eigen::EigenvaluesOnly);
    const double min_eig = eigs.eigenvalues().minCoeff();
    if (min_eig < -1e-10 * covariance_.trace()) {
      throw CorruptedModelError("GaussianModel: covariance not PSD within tolerance");
    }
  }
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& covariance) {
  const Eigen::Index d = covariance.rows();
  const double trace = covariance.trace();
  if (trace <= 0.0) {
    if (covariance.isZero(0.0)) return Eigen::MatrixXd::Zero(d, d);
    throw CorruptedModelError("covariance_factor: nonpositive trace with nonzero entries");
  }

  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
  for (double jitter = 1e-12; jitter <= 1e-6 * 1.0000001; jitter *= 10.0) {
    llt.compute(covariance + (jitter * trace) * identity);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw CorruptedModelError("covariance_factor: Cholesky failed after jitter escalation");
}

Eigen::VectorXd sample_prior(const GaussianModel& model, RngStream& rng) {
  return sample_with_factor(model.mean(), covariance_factor(model.covariance()), rng);
}

Eigen::VectorXd sample_with_factor(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor,
                                   RngStream& rng) {
  return mean + factor * rng.normal_vector(mean.size());
}

}  // namespace rejfilt
