#include "rejfilt/classification.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

#include "rejfilt/errors.hpp"

namespace rejfilt {

namespace {

/// Deterministic largest-remainder apportionment of `total` seats over two
/// nonnegative weights; ties go to the smaller class.
std::array<std::int64_t, 2> apportion(const std::array<double, 2>& weights, std::int64_t total) {
  const double w = weights[0] + weights[1];
  if (!(w > 0.0)) throw std::invalid_argument("apportion: weights sum to zero");

  std::array<std::int64_t, 2> counts{};
  std::array<double, 2> remainder{};
  std::int64_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double quota = static_cast<double>(total) * weights[c] / w;
    counts[c] = static_cast<std::int64_t>(std::floor(quota));
    remainder[c] = quota - std::floor(quota);
    assigned += counts[c];
  }
  std::int64_t leftover = total - assigned;
  while (leftover > 0) {
    const int pick = (remainder[1] > remainder[0]) ? 1 : 0;
    counts[pick] += 1;
    remainder[pick] = -1.0;
    --leftover;
  }
  return counts;
}

/// Run-length merge of drawn corpus rows into weighted members.
void append_counted(std::vector<ParticleCloud::Member>& members,
                    std::vector<std::int32_t>& drawn) {
  std::sort(drawn.begin(), drawn.end());
  for (std::size_t i = 0; i < drawn.size();) {
    std::size_t j = i;
    while (j < drawn.size() && drawn[j] == drawn[i]) ++j;
    members.push_back({drawn[i], static_cast<std::int64_t>(j - i)});
    i = j;
  }
}

std::int64_t binomial_draw(std::int64_t trials, double p, RngStream& rng) {
  if (p >= 1.0) return trials;
  if (p <= 0.0) return 0;
  if (trials == 1) return rng.uniform01() < p ? 1 : 0;
  std::binomial_distribution<std::int64_t> dist(trials, p);
  return dist(rng);
}

}  // namespace

Corpus::Corpus(Eigen::MatrixXf features, std::vector<std::int32_t> labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.rows() == 0 || features_.cols() == 0) {
    throw std::invalid_argument("Corpus: empty feature matrix");
  }
  if (static_cast<Eigen::Index>(labels_.size()) != features_.rows()) {
    throw DimensionMismatchError("Corpus: label count differs from row count");
  }
  for (Eigen::Index i = 0; i < features_.rows(); ++i) {
    const std::int32_t label = labels_[static_cast<std::size_t>(i)];
    if (label != 0 && label != 1) {
      throw std::invalid_argument("Corpus: labels must be binary");
    }
    class_members_[static_cast<std::size_t>(label)].push_back(static_cast<std::int32_t>(i));
  }
  feature_min_ = features_.colwise().minCoeff();
  feature_max_ = features_.colwise().maxCoeff();
}

double pixel_likelihood(double observed, double x_i, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("pixel_likelihood: sigma must be > 0");
  const double z = (x_i - observed) / sigma;
  return std::exp(-0.5 * z * z);
}

std::int64_t ParticleCloud::total_weight() const {
  std::int64_t total = 0;
  for (const Member& m : members) total += m.weight;
  return total;
}

std::array<std::int64_t, 2> ParticleCloud::class_weights(const Corpus& corpus) const {
  std::array<std::int64_t, 2> weights{};
  for (const Member& m : members) {
    weights[static_cast<std::size_t>(corpus.labels()[static_cast<std::size_t>(m.index)])] +=
        m.weight;
  }
  return weights;
}

ParticleCloud initial_cloud(const Corpus& corpus, std::int64_t capacity, RngStream& rng) {
  if (capacity < 1) throw std::invalid_argument("initial_cloud: capacity must be >= 1");

  const std::array<double, 2> freq{static_cast<double>(corpus.class_members(0).size()),
                                   static_cast<double>(corpus.class_members(1).size())};
  const std::array<std::int64_t, 2> targets = apportion(freq, capacity);

  ParticleCloud cloud;
  for (int c = 0; c < 2; ++c) {
    const std::vector<std::int32_t>& pool = corpus.class_members(c);
    if (targets[c] > 0 && pool.empty()) {
      throw CorpusIntegrityError("initial_cloud: class without corpus vectors");
    }
    std::vector<std::int32_t> drawn;
    drawn.reserve(static_cast<std::size_t>(targets[c]));
    for (std::int64_t i = 0; i < targets[c]; ++i) {
      drawn.push_back(pool[rng.uniform_below(pool.size())]);
    }
    append_counted(cloud.members, drawn);
  }
  return cloud;
}

std::optional<PixelQuery> select_query(const Corpus& corpus, const ParticleCloud& cloud) {
  if (cloud.members.empty()) throw std::invalid_argument("select_query: empty cloud");

  const Eigen::Index d = corpus.dim();
  const double total = static_cast<double>(cloud.total_weight());

  // Two passes keep the all-identical case at exactly zero variance.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const ParticleCloud::Member& m : cloud.members) {
    mean.noalias() +=
        static_cast<double>(m.weight) * corpus.features().row(m.index).cast<double>().transpose();
  }
  mean /= total;

  Eigen::VectorXd variance = Eigen::VectorXd::Zero(d);
  for (const ParticleCloud::Member& m : cloud.members) {
    const Eigen::VectorXd dev =
        corpus.features().row(m.index).cast<double>().transpose() - mean;
    variance.noalias() += static_cast<double>(m.weight) * dev.cwiseProduct(dev);
  }
  variance /= total;

  Eigen::Index best = 0;
  double best_var = variance[0];
  for (Eigen::Index j = 1; j < d; ++j) {
    if (variance[j] > best_var) {
      best_var = variance[j];
      best = j;
    }
  }
  if (!(best_var > 0.0)) return std::nullopt;

  PixelQuery query;
  query.feature = best;
  query.sigma = std::max(std::sqrt(best_var), 1e-3 * corpus.feature_range(best));
  return query;
}

ClassifyUpdate rf_classify_update(const Corpus& corpus, const ParticleCloud& cloud,
                                  double observed, Eigen::Index feature, double sigma,
                                  double recovery_factor, RngStream& rng) {
  if (cloud.members.empty()) throw std::invalid_argument("rf_classify_update: empty cloud");
  if (!(sigma > 0.0)) throw std::invalid_argument("rf_classify_update: sigma must be > 0");
  if (!(recovery_factor >= 0.0)) {
    throw std::invalid_argument("rf_classify_update: recovery factor must be >= 0");
  }

  ClassifyUpdate update;
  update.sigma_used = sigma;
  for (;;) {
    update.survivors.members.clear();
    std::array<std::int64_t, 2> accepted{};
    for (const ParticleCloud::Member& m : cloud.members) {
      const double p = pixel_likelihood(
          observed, static_cast<double>(corpus.features()(m.index, feature)),
          update.sigma_used);
      const std::int64_t kept = binomial_draw(m.weight, p, rng);
      if (kept > 0) {
        update.survivors.members.push_back({m.index, kept});
        accepted[static_cast<std::size_t>(
            corpus.labels()[static_cast<std::size_t>(m.index)])] += kept;
      }
    }
    const std::int64_t total = accepted[0] + accepted[1];
    if (total > 0) {
      update.posterior[0] = static_cast<double>(accepted[0]) / static_cast<double>(total);
      update.posterior[1] = static_cast<double>(accepted[1]) / static_cast<double>(total);
      return update;
    }
    // Nothing survived: widen and retry against the same observation. The
    // likelihood tends to 1 as sigma grows, so this terminates.
    update.sigma_used *= 1.0 + recovery_factor;
    update.widen_rounds += 1;
  }
}

ParticleCloud resample_cloud(const Corpus& corpus, const ParticleCloud& survivors,
                             std::int64_t capacity, RngStream& rng) {
  if (capacity < 1) throw std::invalid_argument("resample_cloud: capacity must be >= 1");

  std::array<std::int64_t, 2> survivor_weight{};
  std::array<std::vector<ParticleCloud::Member>, 2> by_class;
  for (const ParticleCloud::Member& m : survivors.members) {
    const auto label =
        static_cast<std::size_t>(corpus.labels()[static_cast<std::size_t>(m.index)]);
    survivor_weight[label] += m.weight;
    by_class[label].push_back(m);
  }
  const std::int64_t total_survivors = survivor_weight[0] + survivor_weight[1];

  const std::array<double, 2> proportions =
      total_survivors > 0
          ? std::array<double, 2>{static_cast<double>(survivor_weight[0]),
                                  static_cast<double>(survivor_weight[1])}
          : std::array<double, 2>{static_cast<double>(corpus.class_members(0).size()),
                                  static_cast<double>(corpus.class_members(1).size())};
  const std::array<std::int64_t, 2> targets = apportion(proportions, capacity);

  ParticleCloud cloud;
  for (int c = 0; c < 2; ++c) {
    const std::int64_t target = targets[c];
    if (target == 0) continue;
    const std::vector<std::int32_t>& pool = corpus.class_members(c);
    if (pool.empty()) {
      throw CorpusIntegrityError("resample_cloud: class has posterior mass but no corpus vectors");
    }

    const std::vector<ParticleCloud::Member>& source = by_class[static_cast<std::size_t>(c)];
    const std::int64_t replicated =
        source.empty() ? 0 : std::llround(0.95 * static_cast<double>(target));
    const std::int64_t fresh = target - replicated;

    if (replicated > 0) {
      // Weight-proportional replication of the surviving particles.
      std::vector<std::int64_t> cdf(source.size());
      std::int64_t running = 0;
      for (std::size_t i = 0; i < source.size(); ++i) {
        running += source[i].weight;
        cdf[i] = running;
      }
      std::vector<std::int32_t> drawn;
      drawn.reserve(static_cast<std::size_t>(replicated));
      for (std::int64_t i = 0; i < replicated; ++i) {
        const std::int64_t pick =
            static_cast<std::int64_t>(rng.uniform_below(static_cast<std::uint64_t>(running)));
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), pick);
        drawn.push_back(source[static_cast<std::size_t>(it - cdf.begin())].index);
      }
      append_counted(cloud.members, drawn);
    }
    if (fresh > 0) {
      std::vector<std::int32_t> drawn;
      drawn.reserve(static_cast<std::size_t>(fresh));
      for (std::int64_t i = 0; i < fresh; ++i) {
        drawn.push_back(pool[rng.uniform_below(pool.size())]);
      }
      append_counted(cloud.members, drawn);
    }
  }
  return cloud;
}

ClassifyOutcome classify(std::span<const float> test_vector, const Corpus& corpus,
                         const ClassifyOptions& options, RngStream& rng) {
  if (static_cast<Eigen::Index>(test_vector.size()) != corpus.dim()) {
    throw DimensionMismatchError("classify: test vector dimension mismatch");
  }
  if (options.restarts < 1) throw std::invalid_argument("classify: restarts must be >= 1");
  if (options.budget < options.restarts) {
    throw std::invalid_argument("classify: budget must cover one query per restart");
  }
  if (!(options.stop_threshold > 0.0 && options.stop_threshold < 0.5)) {
    throw std::invalid_argument("classify: stop threshold must lie in (0, 0.5)");
  }

  ClassifyOutcome outcome;
  outcome.histogram.assign(static_cast<std::size_t>(corpus.dim()), 0);
  const std::int64_t session_budget = options.budget / options.restarts;

  std::array<int, 2> votes{};
  for (int session = 0; session < options.restarts; ++session) {
    ParticleCloud cloud = initial_cloud(corpus, options.capacity, rng);
    const std::array<std::int64_t, 2> start = cloud.class_weights(corpus);
    std::array<double, 2> posterior{
        static_cast<double>(start[0]) / static_cast<double>(start[0] + start[1]),
        static_cast<double>(start[1]) / static_cast<double>(start[0] + start[1])};

    for (std::int64_t q = 0; q < session_budget; ++q) {
      const std::optional<PixelQuery> query = select_query(corpus, cloud);
      if (!query) break;

      const float observed_f = test_vector[static_cast<std::size_t>(query->feature)];
      const double observed = static_cast<double>(observed_f);
      outcome.queries += 1;
      outcome.histogram[static_cast<std::size_t>(query->feature)] += 1;
      outcome.query_log.emplace_back(query->feature, observed_f);

      const ClassifyUpdate update = rf_classify_update(
          corpus, cloud, observed, query->feature, query->sigma, options.recovery_factor, rng);
      posterior = update.posterior;
      if (std::min(posterior[0], posterior[1]) <= options.stop_threshold) break;
      cloud = resample_cloud(corpus, update.survivors, options.capacity, rng);
    }
    votes[posterior[1] > posterior[0] ? 1 : 0] += 1;
  }

  outcome.label = votes[1] > votes[0] ? 1 : 0;
  return outcome;
}

std::vector<Eigen::Index> feature_select(std::span<const std::int64_t> histogram,
                                         double percentile) {
  if (histogram.empty()) throw std::invalid_argument("feature_select: empty histogram");
  if (!(percentile >= 0.0 && percentile < 100.0)) {
    throw std::invalid_argument("feature_select: percentile must lie in [0, 100)");
  }

  std::vector<Eigen::Index> retained;
  if (percentile == 0.0) {
    for (std::size_t i = 0; i < histogram.size(); ++i) {
      retained.push_back(static_cast<Eigen::Index>(i));
    }
    return retained;
  }

  // Nearest-rank percentile over all features, zero counts included.
  std::vector<std::int64_t> sorted(histogram.begin(), histogram.end());
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::min<double>(
      std::ceil(percentile / 100.0 * static_cast<double>(sorted.size())),
      static_cast<double>(sorted.size())));
  const std::int64_t threshold = sorted[rank == 0 ? 0 : rank - 1];

  for (std::size_t i = 0; i < histogram.size(); ++i) {
    if (histogram[i] >= threshold && histogram[i] > 0) {
      retained.push_back(static_cast<Eigen::Index>(i));
    }
  }
  return retained;
}

std::int32_t knn_classify(std::span<const float> test_vector, const Corpus& corpus, int k) {
  if (k < 1) throw std::invalid_argument("knn_classify: k must be >= 1");
  if (static_cast<Eigen::Index>(test_vector.size()) != corpus.dim()) {
    throw DimensionMismatchError("knn_classify: test vector dimension mismatch");
  }

  const Eigen::Map<const Eigen::VectorXf> probe(test_vector.data(),
                                                static_cast<Eigen::Index>(test_vector.size()));
  const Eigen::Index n = corpus.size();
  std::vector<std::pair<double, std::int32_t>> distances;
  distances.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d2 = (corpus.features().row(i).transpose() - probe).squaredNorm();
    distances.emplace_back(d2, static_cast<std::int32_t>(i));
  }

  const auto kk = static_cast<std::ptrdiff_t>(std::min<Eigen::Index>(k, n));
  std::partial_sort(distances.begin(), distances.begin() + kk, distances.end());

  std::array<int, 2> votes{};
  for (std::ptrdiff_t i = 0; i < kk; ++i) {
    votes[static_cast<std::size_t>(
        corpus.labels()[static_cast<std::size_t>(distances[static_cast<std::size_t>(i)]
                                                     .second)])] += 1;
  }
  return votes[1] > votes[0] ? 1 : 0;
}

}  // namespace rejfilt
