#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rejfilt/rng.hpp"

namespace rejfilt {

/// Immutable labeled training corpus, one row per vector, binary labels.
class Corpus {
 public:
  Corpus(Eigen::MatrixXf features, std::vector<std::int32_t> labels);

  [[nodiscard]] const Eigen::MatrixXf& features() const { return features_; }
  [[nodiscard]] const std::vector<std::int32_t>& labels() const { return labels_; }
  [[nodiscard]] Eigen::Index size() const { return features_.rows(); }
  [[nodiscard]] Eigen::Index dim() const { return features_.cols(); }

  [[nodiscard]] const std::vector<std::int32_t>& class_members(int label) const {
    return class_members_[static_cast<std::size_t>(label)];
  }

  /// Per-feature value range over the corpus; the sigma floor scales with it.
  [[nodiscard]] double feature_range(Eigen::Index feature) const {
    return static_cast<double>(feature_max_[feature] - feature_min_[feature]);
  }

 private:
  Eigen::MatrixXf features_;
  std::vector<std::int32_t> labels_;
  std::array<std::vector<std::int32_t>, 2> class_members_;
  Eigen::VectorXf feature_min_;
  Eigen::VectorXf feature_max_;
};

/// exp(-(x_i - E)^2 / 2 sigma^2); already <= 1, so kappa = 1.
double pixel_likelihood(double observed, double x_i, double sigma);

/// Finite hypothesis set over training vectors, stored as (corpus row,
/// multiplicity) pairs. Replication-heavy resampling keeps the unique count
/// far below the capacity, which is what the per-query passes scale with.
struct ParticleCloud {
  struct Member {
    std::int32_t index = 0;   // corpus row
    std::int64_t weight = 0;  // multiplicity, > 0
  };
  std::vector<Member> members;

  [[nodiscard]] std::int64_t total_weight() const;
  [[nodiscard]] std::array<std::int64_t, 2> class_weights(const Corpus& corpus) const;
};

/// Cloud of `capacity` particles drawn uniformly per class, class counts
/// proportional to the corpus class frequencies.
ParticleCloud initial_cloud(const Corpus& corpus, std::int64_t capacity, RngStream& rng);

struct PixelQuery {
  Eigen::Index feature = 0;
  double sigma = 0.0;
};

/// Maximum-variance query selection: the feature with the largest intensity
/// variance across the cloud, sigma its standard deviation floored at
/// 1e-3 times the corpus range of that feature. Ties break to the lowest
/// feature index. Returns nullopt when no feature varies (degenerate cloud).
std::optional<PixelQuery> select_query(const Corpus& corpus, const ParticleCloud& cloud);

struct ClassifyUpdate {
  ParticleCloud survivors;               // accepted particles with multiplicities
  std::array<double, 2> posterior{};     // accepted class frequencies
  double sigma_used = 0.0;               // after any recovery widening
  int widen_rounds = 0;
};

/// Rejection update over the discrete cloud: each particle survives with
/// probability pixel_likelihood(observed, x_i, sigma). An empty acceptance
/// keeps the cloud and retries with sigma widened by (1+r) until something
/// survives.
ClassifyUpdate rf_classify_update(const Corpus& corpus, const ParticleCloud& cloud,
                                  double observed, Eigen::Index feature, double sigma,
                                  double recovery_factor, RngStream& rng);

/// Bootstrap-style resampler: class counts proportional to the survivor
/// class frequencies (largest-remainder rounding); 95% of each class target
/// replicates survivors of that class, the rest draws uniformly from the
/// corpus vectors of that class. Empty survivor sets fall back to the corpus
/// class proportions with purely fresh draws.
ParticleCloud resample_cloud(const Corpus& corpus, const ParticleCloud& survivors,
                             std::int64_t capacity, RngStream& rng);

struct ClassifyOptions {
  double stop_threshold = 0.01;  // session ends once min class posterior <= this
  int restarts = 3;
  std::int64_t budget = 784;     // total feature reads, split over restarts
  std::int64_t capacity = 1000;
  double recovery_factor = 0.02;
};

struct ClassifyOutcome {
  std::int32_t label = 0;
  std::int64_t queries = 0;
  std::vector<std::int64_t> histogram;  // per-feature query counts
  std::vector<std::pair<Eigen::Index, float>> query_log;  // (feature, observed value)
};

/// Active classification of one test vector: `restarts` independent sessions,
/// each looping query selection, feature read, rejection update and resample
/// until confident or out of budget; final label by majority vote.
ClassifyOutcome classify(std::span<const float> test_vector, const Corpus& corpus,
                         const ClassifyOptions& options, RngStream& rng);

/// Features whose query count reaches the p-th percentile of all counts
/// (zeros included); at p > 0 never-queried features are dropped. p = 0
/// retains everything.
std::vector<Eigen::Index> feature_select(std::span<const std::int64_t> histogram,
                                         double percentile);

/// Plain kNN baseline, Euclidean metric, majority vote, ties toward the
/// smaller class label.
std::int32_t knn_classify(std::span<const float> test_vector, const Corpus& corpus, int k);

}  // namespace rejfilt
