#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

#include "rejfilt/gaussian_model.hpp"

namespace rejfilt {

/// Streaming first/second moments of accepted samples. State is a function
/// of the dimension only, never of how many samples passed through.
///
/// Two parallel paths are kept:
///  - Welford running mean and centered sum of products (authoritative);
///  - naive sums M = sum(x) and S = sum(x x^T) in long double, the form
///    worker nodes ship to the combine step.
class MomentAccumulator {
 public:
  using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

  explicit MomentAccumulator(Eigen::Index dim);

  /// Adds one accepted sample. Throws DimensionMismatchError on a size
  /// mismatch and InvalidLikelihoodError never; non-finite components throw
  /// std::invalid_argument.
  void accumulate(const Eigen::VectorXd& x);

  /// Folds another accumulator in, as if its samples had been accumulated
  /// here. Commutative and associative up to roundoff.
  void merge(const MomentAccumulator& other);

  [[nodiscard]] std::int64_t count() const { return count_; }
  [[nodiscard]] Eigen::Index dim() const { return mean_.size(); }

  /// Welford running mean (valid for count >= 1).
  [[nodiscard]] const Eigen::VectorXd& running_mean() const { return mean_; }

  /// Sample covariance from the Welford path, symmetrized (count >= 2).
  [[nodiscard]] Eigen::MatrixXd sample_covariance() const;

  /// Naive sums, rounded from the widened representation.
  [[nodiscard]] Eigen::VectorXd naive_sum() const;
  [[nodiscard]] Eigen::MatrixXd naive_outer_sum() const;

  /// Sample covariance recomputed from the naive sums, for cross-checks.
  [[nodiscard]] Eigen::MatrixXd naive_sample_covariance() const;

  /// Bytes held by this accumulator, heap included.
  [[nodiscard]] std::size_t memory_bytes() const;

 private:
  std::int64_t count_ = 0;
  Eigen::VectorXd mean_;        // Welford running mean
  Eigen::MatrixXd centered_;    // sum of (x - mean_old)(x - mean_new)^T
  LongVector sum_;              // naive M
  LongMatrix outer_;            // naive S
};

/// Maps an accumulator to the posterior model:
///   count >= 2  -> (running mean, sample covariance)
///   count == 1  -> (the single sample, (1+r) * fallback covariance)
///   count == 0  -> (fallback mean, (1+r) * fallback covariance)
GaussianModel finalize(const MomentAccumulator& acc, const GaussianModel& fallback, double r);

/// Value-returning merge.
MomentAccumulator merge(const MomentAccumulator& a, const MomentAccumulator& b);

}  // namespace rejfilt
