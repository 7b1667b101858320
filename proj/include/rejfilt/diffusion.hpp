#pragma once

#include <optional>

#include <Eigen/Dense>

#include "rejfilt/gaussian_model.hpp"

namespace rejfilt {

/// Zero-mean Gaussian kernel convolved with the belief between updates so a
/// drifting true parameter stays within support. Scalar rate is the common
/// case; a full rate matrix covers anisotropic drift.
class DiffusionKernel {
 public:
  explicit DiffusionKernel(double rate);
  explicit DiffusionKernel(Eigen::MatrixXd rate_matrix);

  [[nodiscard]] double rate() const { return rate_; }
  [[nodiscard]] const std::optional<Eigen::MatrixXd>& rate_matrix() const { return rate_matrix_; }

 private:
  double rate_ = 0.0;
  std::optional<Eigen::MatrixXd> rate_matrix_;
};

/// Prediction step: mean unchanged, covariance grows by rate * dt (times the
/// identity for a scalar rate). dt must be nonnegative.
GaussianModel diffuse(const GaussianModel& model, const DiffusionKernel& kernel, double dt);

}  // namespace rejfilt
