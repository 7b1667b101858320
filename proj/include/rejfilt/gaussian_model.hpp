#pragma once

#include <Eigen/Dense>

#include "rejfilt/rng.hpp"

namespace rejfilt {

/// Gaussian belief state: mean vector and covariance matrix. This is the
/// entire state carried between updates.
class GaussianModel {
 public:
  /// Validates symmetry (1e-12 relative), positive semidefiniteness
  /// (min eigenvalue >= -1e-10 * trace) and dimension agreement.
  /// Throws CorruptedModelError on violation.
  GaussianModel(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  [[nodiscard]] const Eigen::VectorXd& mean() const { return mean_; }
  [[nodiscard]] const Eigen::MatrixXd& covariance() const { return covariance_; }
  [[nodiscard]] Eigen::Index dim() const { return mean_.size(); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
};

/// Lower-triangular factor L with L*L^T ~= covariance. Resampled covariances
/// go numerically semidefinite routinely, so a plain Cholesky is retried
/// under escalating diagonal jitter (1e-12 * trace, growing tenfold up to
/// 1e-6 * trace) before giving up. Throws CorruptedModelError on failure.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& covariance);

/// One draw x = mean + L*z with z standard normal.
Eigen::VectorXd sample_prior(const GaussianModel& model, RngStream& rng);

/// Draw reusing a precomputed factor; the hot path inside an update loop.
Eigen::VectorXd sample_with_factor(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor,
                                   RngStream& rng);

}  // namespace rejfilt
