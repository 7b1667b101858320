#include "rejfilt/diffusion.hpp"

#include <stdexcept>
#include <utility>

#include "rejfilt/errors.hpp"

namespace rejfilt {

DiffusionKernel::DiffusionKernel(double rate) : rate_(rate) {
  if (!(rate >= 0.0)) throw std::invalid_argument("DiffusionKernel: rate must be >= 0");
}

DiffusionKernel::DiffusionKernel(Eigen::MatrixXd rate_matrix)
    : rate_matrix_(std::move(rate_matrix)) {
  const Eigen::MatrixXd& r = *rate_matrix_;
  if (r.rows() != r.cols()) {
    throw DimensionMismatchError("DiffusionKernel: rate matrix must be square");
  }
  if (!r.isApprox(r.transpose(), 1e-12)) {
    throw std::invalid_argument("DiffusionKernel: rate matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(r, Eigen::EigenvaluesOnly);
  if (eigs.eigenvalues().minCoeff() < -1e-10 * std::max(r.trace(), 1e-300)) {
    throw std::invalid_argument("DiffusionKernel: rate matrix must be PSD");
  }
}

GaussianModel diffuse(const GaussianModel& model, const DiffusionKernel& kernel, double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("diffuse: dt must be >= 0");

  if (kernel.rate_matrix()) {
    if (kernel.rate_matrix()->rows() != model.dim()) {
      throw DimensionMismatchError("diffuse: rate matrix dimension mismatch");
    }
    return GaussianModel(model.mean(), model.covariance() + dt * (*kernel.rate_matrix()));
  }
  Eigen::MatrixXd cov = model.covariance();
  cov.diagonal().array() += kernel.rate() * dt;
  return GaussianModel(model.mean(), cov);
}

}  // namespace rejfilt
