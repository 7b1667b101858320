#include "rejfilt/moment_accumulator.hpp"

#include <stdexcept>

#include "rejfilt/errors.hpp"

namespace rejfilt {

MomentAccumulator::MomentAccumulator(Eigen::Index dim)
    : mean_(Eigen::VectorXd::Zero(dim)),
      centered_(Eigen::MatrixXd::Zero(dim, dim)),
      sum_(LongVector::Zero(dim)),
      outer_(LongMatrix::Zero(dim, dim)) {}

void MomentAccumulator::accumulate(const Eigen::VectorXd& x) {
  if (x.size() != mean_.size()) {
    throw DimensionMismatchError("MomentAccumulator::accumulate: sample dimension mismatch");
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("MomentAccumulator::accumulate: non-finite sample");
  }

  const LongVector xl = x.cast<long double>();
  sum_ += xl;
  outer_ += xl * xl.transpose();

  ++count_;
  const Eigen::VectorXd delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  centered_.noalias() += delta * (x - mean_).transpose();
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.dim() != dim()) {
    throw DimensionMismatchError("MomentAccumulator::merge: dimension mismatch");
  }
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }

  // Chan et al. pairwise combination of Welford states.
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const Eigen::VectorXd delta = other.mean_ - mean_;
  mean_ += delta * (nb / n);
  centered_ += other.centered_ + (delta * delta.transpose()) * (na * nb / n);

  sum_ += other.sum_;
  outer_ += other.outer_;
  count_ += other.count_;
}

Eigen::MatrixXd MomentAccumulator::sample_covariance() const {
  if (count_ < 2) {
    throw std::logic_error("MomentAccumulator::sample_covariance: needs count >= 2");
  }
  const Eigen::MatrixXd cov = centered_ / static_cast<double>(count_ - 1);
  return 0.5 * (cov + cov.transpose());
}

Eigen::VectorXd MomentAccumulator::naive_sum() const { return sum_.cast<double>(); }

Eigen::MatrixXd MomentAccumulator::naive_outer_sum() const { return outer_.cast<double>(); }

Eigen::MatrixXd MomentAccumulator::naive_sample_covariance() const {
  if (count_ < 2) {
    throw std::logic_error("MomentAccumulator::naive_sample_covariance: needs count >= 2");
  }
  const long double n = static_cast<long double>(count_);
  const LongVector mu = sum_ / n;
  const LongMatrix cov = (outer_ - n * (mu * mu.transpose())) / (n - 1.0L);
  const Eigen::MatrixXd out = cov.cast<double>();
  return 0.5 * (out + out.transpose());
}

std::size_t MomentAccumulator::memory_bytes() const {
  const std::size_t d = static_cast<std::size_t>(dim());
  return sizeof(*this) + d * (sizeof(double) + sizeof(long double)) +
         d * d * (sizeof(double) + sizeof(long double));
}

GaussianModel finalize(const MomentAccumulator& acc, const GaussianModel& fallback, double r) {
  if (acc.count() >= 2) {
    return GaussianModel(acc.running_mean(), acc.sample_covariance());
  }
  const Eigen::MatrixXd widened = (1.0 + r) * fallback.covariance();
  if (acc.count() == 1) {
    // One sample fixes location but carries no spread information.
    return GaussianModel(acc.running_mean(), widened);
  }
  return GaussianModel(fallback.mean(), widened);
}

MomentAccumulator merge(const MomentAccumulator& a, const MomentAccumulator& b) {
  MomentAccumulator out = a;
  out.merge(b);
  return out;
}

}  // namespace rejfilt
