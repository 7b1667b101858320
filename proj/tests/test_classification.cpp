#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "rejfilt/classification.hpp"
#include "rejfilt/errors.hpp"
#include "rejfilt/mnist_idx.hpp"
#include "rejfilt/rng.hpp"

using rejfilt::ClassifyOptions;
using rejfilt::ClassifyOutcome;
using rejfilt::ClassifyUpdate;
using rejfilt::Corpus;
using rejfilt::ParticleCloud;
using rejfilt::PixelQuery;
using rejfilt::RngStream;
using rejfilt::classify;
using rejfilt::feature_select;
using rejfilt::initial_cloud;
using rejfilt::knn_classify;
using rejfilt::pixel_likelihood;
using rejfilt::resample_cloud;
using rejfilt::rf_classify_update;
using rejfilt::select_query;

namespace {

/// Two well-separated Gaussian blobs: centers 0.3 and 0.5 per feature with
/// noise sigma 0.02, i.e. a 10-sigma gap.
struct Blobs {
  Eigen::MatrixXf features;
  std::vector<std::int32_t> labels;
};

Blobs make_blobs(int per_class, int dim, std::uint64_t seed, double noise = 0.02) {
  Blobs out;
  out.features.resize(2 * per_class, dim);
  out.labels.resize(static_cast<std::size_t>(2 * per_class));
  RngStream rng(seed);
  for (int i = 0; i < 2 * per_class; ++i) {
    const int label = i < per_class ? 0 : 1;
    const double center = label == 0 ? 0.3 : 0.5;
    for (int j = 0; j < dim; ++j) {
      const double v = std::clamp(center + noise * rng.normal(), 0.0, 1.0);
      out.features(i, j) = static_cast<float>(v);
    }
    out.labels[static_cast<std::size_t>(i)] = label;
  }
  return out;
}

Corpus blob_corpus(int per_class, int dim, std::uint64_t seed) {
  Blobs b = make_blobs(per_class, dim, seed);
  return Corpus(std::move(b.features), std::move(b.labels));
}

}  // namespace

TEST_CASE("pixel likelihood at the anchor residuals") {
  CHECK(pixel_likelihood(0.7, 0.7, 0.1) == 1.0);
  CHECK(pixel_likelihood(0.5, 0.6, 0.1) == doctest::Approx(std::exp(-0.5)));
  CHECK(pixel_likelihood(0.2, 0.5, 0.1) == doctest::Approx(std::exp(-4.5)));
  CHECK_THROWS_AS(pixel_likelihood(0.1, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("corpus validation") {
  Eigen::MatrixXf f(2, 3);
  f.setZero();
  CHECK_THROWS_AS(Corpus(f, {0}), rejfilt::DimensionMismatchError);
  CHECK_THROWS_AS(Corpus(f, {0, 7}), std::invalid_argument);
  CHECK_THROWS_AS(Corpus(Eigen::MatrixXf(), {}), std::invalid_argument);
}

TEST_CASE("query selection finds the only varying feature") {
  Eigen::MatrixXf f(2, 10);
  f.setConstant(0.25f);
  f(0, 7) = 0.75f;
  const Corpus corpus(f, {0, 1});

  ParticleCloud cloud;
  cloud.members = {{0, 1}, {1, 1}};
  const auto query = select_query(corpus, cloud);
  REQUIRE(query.has_value());
  CHECK(query->feature == 7);
  CHECK(query->sigma == doctest::Approx(0.25));
}

TEST_CASE("query ties break to the lowest feature index") {
  Eigen::MatrixXf f(2, 6);
  f.setConstant(0.5f);
  f(0, 2) = 0.0f;
  f(0, 5) = 0.0f;
  const Corpus corpus(f, {0, 1});
  ParticleCloud cloud;
  cloud.members = {{0, 3}, {1, 3}};
  const auto query = select_query(corpus, cloud);
  REQUIRE(query.has_value());
  CHECK(query->feature == 2);
}

TEST_CASE("a degenerate cloud yields no query") {
  Eigen::MatrixXf f(3, 4);
  f.setConstant(0.5f);
  f(2, 1) = 0.9f;
  const Corpus corpus(f, {0, 0, 1});
  ParticleCloud cloud;
  cloud.members = {{0, 5}, {1, 3}};  // identical rows only
  CHECK_FALSE(select_query(corpus, cloud).has_value());
}

TEST_CASE("sigma is floored by the corpus feature range") {
  Eigen::MatrixXf f(4, 2);
  f << 0.0f, 0.5f, 1e-6f, 0.5f, 1.0f, 0.5f, 1.0f, 0.5f;
  const Corpus corpus(f, {0, 0, 1, 1});
  ParticleCloud cloud;
  cloud.members = {{0, 1}, {1, 1}};  // std at feature 0 is 5e-7
  const auto query = select_query(corpus, cloud);
  REQUIRE(query.has_value());
  CHECK(query->feature == 0);
  CHECK(query->sigma == doctest::Approx(1e-3));  // 1e-3 * range(=1)
}

TEST_CASE("an uninformative query keeps the prior proportions") {
  const Corpus corpus = blob_corpus(20, 4, 1);
  RngStream rng(2);
  ParticleCloud cloud = initial_cloud(corpus, 100, rng);
  const auto before = cloud.class_weights(corpus);

  const ClassifyUpdate update =
      rf_classify_update(corpus, cloud, 0.4, 0, 1e12, 0.02, rng);
  const auto after = update.survivors.class_weights(corpus);
  CHECK(after[0] == before[0]);
  CHECK(after[1] == before[1]);
  CHECK(update.posterior[0] ==
        doctest::Approx(static_cast<double>(before[0]) / (before[0] + before[1])));
}

TEST_CASE("ten-sigma separation pins the posterior") {
  // Class 0 sits exactly on the observation, class 1 ten sigma away.
  Eigen::MatrixXf f(4, 2);
  f << 0.3f, 0.5f, 0.3f, 0.5f, 0.8f, 0.5f, 0.8f, 0.5f;
  const Corpus corpus(f, {0, 0, 1, 1});
  ParticleCloud cloud;
  cloud.members = {{0, 25}, {1, 25}, {2, 25}, {3, 25}};

  RngStream rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const ClassifyUpdate update =
        rf_classify_update(corpus, cloud, 0.3, 0, 0.05, 0.02, rng);
    CHECK(update.posterior[0] >= 0.99);
  }
}

TEST_CASE("per-particle acceptance follows the likelihood exactly") {
  Eigen::MatrixXf f(2, 1);
  f << 0.2f, 0.9f;
  const Corpus corpus(f, {0, 1});
  const double sigma = 0.45;
  const double p_expected = pixel_likelihood(0.9, 0.2, sigma);

  ParticleCloud lone;
  lone.members = {{0, 1}, {1, 1}};  // the second particle always survives
  RngStream rng(13);
  int survived = 0;
  const int reps = 10000;
  for (int i = 0; i < reps; ++i) {
    const ClassifyUpdate update =
        rf_classify_update(corpus, lone, 0.9, 0, sigma, 0.02, rng);
    for (const auto& m : update.survivors.members) {
      if (m.index == 0) ++survived;
    }
  }
  const double rate = static_cast<double>(survived) / reps;
  const double band = 4.0 * std::sqrt(p_expected * (1.0 - p_expected) / reps);
  CHECK(std::abs(rate - p_expected) < band);
}

TEST_CASE("two-particle expected acceptance counts") {
  Eigen::MatrixXf f(2, 1);
  f << 0.5f, 0.5f + 0.1177410023f;  // second residual gives likelihood 1/2 at sigma 0.1
  const Corpus corpus(f, {0, 1});
  const double sigma = 0.1;
  REQUIRE(pixel_likelihood(0.5, f(1, 0), sigma) == doctest::Approx(0.5).epsilon(1e-4));

  ParticleCloud cloud;
  cloud.members = {{0, 1}, {1, 1}};
  RngStream rng(3);
  std::int64_t first = 0;
  std::int64_t second = 0;
  const int reps = 10000;
  for (int i = 0; i < reps; ++i) {
    const ClassifyUpdate update = rf_classify_update(corpus, cloud, 0.5, 0, sigma, 0.02, rng);
    for (const auto& m : update.survivors.members) {
      (m.index == 0 ? first : second) += m.weight;
    }
  }
  CHECK(first == reps);  // likelihood exactly 1
  CHECK(static_cast<double>(second) / reps == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("empty acceptance widens sigma until something survives") {
  Eigen::MatrixXf f(2, 1);
  f << 0.0f, 1.0f;
  const Corpus corpus(f, {0, 1});
  ParticleCloud cloud;
  cloud.members = {{0, 1}};
  RngStream rng(5);
  const ClassifyUpdate update = rf_classify_update(corpus, cloud, 1.0, 0, 1e-4, 0.02, rng);
  CHECK(update.widen_rounds > 0);
  CHECK(update.sigma_used > 1e-4);
  CHECK(update.survivors.members.size() == 1);
}

TEST_CASE("resampling keeps the 95/5 split within a class") {
  const Corpus corpus = blob_corpus(10, 3, 21);  // rows 0..9 class 0
  ParticleCloud survivors;
  survivors.members = {{2, 7}};  // a single surviving class-0 particle

  RngStream rng(17);
  const ParticleCloud cloud = resample_cloud(corpus, survivors, 100, rng);
  CHECK(cloud.total_weight() == 100);
  const auto weights = cloud.class_weights(corpus);
  CHECK(weights[0] == 100);
  CHECK(weights[1] == 0);

  std::int64_t replicated = 0;
  for (const auto& m : cloud.members) {
    CHECK(corpus.labels()[static_cast<std::size_t>(m.index)] == 0);
    if (m.index == 2) replicated += m.weight;
  }
  CHECK(replicated >= 95);
}

TEST_CASE("balanced survivors split the capacity evenly") {
  const Corpus corpus = blob_corpus(10, 3, 22);
  ParticleCloud survivors;
  survivors.members = {{1, 5}, {12, 5}};  // one survivor per class

  RngStream rng(19);
  const ParticleCloud cloud = resample_cloud(corpus, survivors, 100, rng);
  const auto weights = cloud.class_weights(corpus);
  CHECK(weights[0] == 50);
  CHECK(weights[1] == 50);

  std::int64_t rep0 = 0;
  std::int64_t rep1 = 0;
  for (const auto& m : cloud.members) {
    if (m.index == 1) rep0 += m.weight;
    if (m.index == 12) rep1 += m.weight;
  }
  CHECK(rep0 >= 48);
  CHECK(rep1 >= 48);
}

TEST_CASE("empty survivors resample from the corpus proportions") {
  Blobs b = make_blobs(10, 3, 23);
  // Drop half of class 1 to skew the prior 2:1.
  Eigen::MatrixXf f(15, 3);
  std::vector<std::int32_t> labels;
  for (int i = 0; i < 15; ++i) {
    f.row(i) = b.features.row(i);
    labels.push_back(b.labels[static_cast<std::size_t>(i)]);
  }
  const Corpus corpus(std::move(f), std::move(labels));

  RngStream rng(29);
  const ParticleCloud cloud = resample_cloud(corpus, ParticleCloud{}, 90, rng);
  const auto weights = cloud.class_weights(corpus);
  CHECK(weights[0] == 60);
  CHECK(weights[1] == 30);
}

TEST_CASE("separable blobs classify at high accuracy") {
  const Corpus corpus = blob_corpus(200, 8, 41);
  const Blobs test = make_blobs(50, 8, 42);

  ClassifyOptions options;
  options.stop_threshold = 0.01;
  options.restarts = 3;
  options.budget = 48;
  options.capacity = 200;

  int correct = 0;
  std::int64_t histogram_total = 0;
  for (int i = 0; i < 100; ++i) {
    RngStream rng(rejfilt::derive_seed(7, static_cast<std::uint64_t>(i)));
    const Eigen::VectorXf row = test.features.row(i).transpose();
    const ClassifyOutcome outcome = classify(
        std::span<const float>(row.data(), static_cast<std::size_t>(row.size())), corpus,
        options, rng);
    CHECK(outcome.queries <= options.budget);
    histogram_total += std::accumulate(outcome.histogram.begin(), outcome.histogram.end(),
                                       std::int64_t{0});
    CHECK(histogram_total > 0);
    CHECK(std::accumulate(outcome.histogram.begin(), outcome.histogram.end(),
                          std::int64_t{0}) == outcome.queries);
    CHECK(outcome.query_log.size() == static_cast<std::size_t>(outcome.queries));
    if (outcome.label == test.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  CHECK(correct >= 99);
}

TEST_CASE("tighter stop thresholds never cost fewer queries") {
  const Corpus corpus = blob_corpus(100, 8, 51);
  const Blobs test = make_blobs(20, 8, 52);

  double lax_queries = 0.0;
  double strict_queries = 0.0;
  for (int i = 0; i < 40; ++i) {
    const Eigen::VectorXf row = test.features.row(i).transpose();
    const std::span<const float> view(row.data(), static_cast<std::size_t>(row.size()));
    ClassifyOptions options;
    options.restarts = 3;
    options.budget = 120;
    options.capacity = 200;

    options.stop_threshold = 0.4;
    RngStream rng_lax(rejfilt::derive_seed(99, static_cast<std::uint64_t>(i)));
    lax_queries += static_cast<double>(classify(view, corpus, options, rng_lax).queries);

    options.stop_threshold = 0.001;
    RngStream rng_strict(rejfilt::derive_seed(99, static_cast<std::uint64_t>(i)));
    strict_queries += static_cast<double>(classify(view, corpus, options, rng_strict).queries);
  }
  CHECK(strict_queries >= lax_queries);
}

TEST_CASE("classify validates the session parameters") {
  const Corpus corpus = blob_corpus(5, 4, 61);
  const std::vector<float> probe(4, 0.4f);
  RngStream rng(1);
  ClassifyOptions options;
  options.restarts = 5;
  options.budget = 3;
  CHECK_THROWS_AS(classify(probe, corpus, options, rng), std::invalid_argument);
  options.budget = 20;
  options.stop_threshold = 0.7;
  CHECK_THROWS_AS(classify(probe, corpus, options, rng), std::invalid_argument);
}

TEST_CASE("feature selection percentile rules") {
  std::vector<std::int64_t> histogram(784, 0);
  const std::vector<std::size_t> hot{3, 50, 100, 200, 300, 400, 500, 600, 700, 750};
  for (std::size_t i = 0; i < hot.size(); ++i) {
    histogram[hot[i]] = static_cast<std::int64_t>(10 * (i + 1));
  }

  const auto all = feature_select(histogram, 0.0);
  CHECK(all.size() == 784);

  const auto top = feature_select(histogram, 95.0);
  CHECK(top.size() <= hot.size());
  for (const Eigen::Index f : top) {
    CHECK(std::find(hot.begin(), hot.end(), static_cast<std::size_t>(f)) != hot.end());
  }

  std::size_t prev = 785;
  for (const double p : {0.0, 10.0, 35.0, 50.0, 75.0, 90.0, 95.0, 99.0}) {
    const std::size_t size = feature_select(histogram, p).size();
    CHECK(size <= prev);
    prev = size;
  }

  CHECK_THROWS_AS(feature_select(histogram, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(feature_select(histogram, -1.0), std::invalid_argument);
}

TEST_CASE("knn anchors") {
  const Corpus corpus = blob_corpus(50, 8, 71);

  // An exact corpus vector maps to its own label at k = 1.
  const Eigen::VectorXf row0 = corpus.features().row(0).transpose();
  CHECK(knn_classify(std::span<const float>(row0.data(), 8), corpus, 1) == 0);
  const Eigen::VectorXf row60 = corpus.features().row(60).transpose();
  CHECK(knn_classify(std::span<const float>(row60.data(), 8), corpus, 1) == 1);

  // k = corpus size votes the global majority (here a tie, broken to 0).
  CHECK(knn_classify(std::span<const float>(row60.data(), 8), corpus,
                     static_cast<int>(corpus.size())) == 0);

  const Blobs test = make_blobs(50, 8, 72);
  int correct = 0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXf row = test.features.row(i).transpose();
    if (knn_classify(std::span<const float>(row.data(), 8), corpus, 5) ==
        test.labels[static_cast<std::size_t>(i)]) {
      ++correct;
    }
  }
  CHECK(correct >= 99);
}

TEST_CASE("idx containers round-trip through files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rejfilt_idx_test";
  fs::create_directories(dir);

  Blobs blobs = make_blobs(6, 16, 81);
  rejfilt::write_idx_images(dir / "img.idx", blobs.features, 4, 4);
  rejfilt::write_idx_labels(dir / "lab.idx", blobs.labels);

  const Eigen::MatrixXf images = rejfilt::read_idx_images(dir / "img.idx");
  const std::vector<std::int32_t> labels = rejfilt::read_idx_labels(dir / "lab.idx");
  REQUIRE(images.rows() == 12);
  REQUIRE(images.cols() == 16);
  REQUIRE(labels == blobs.labels);
  // Quantization to bytes costs at most half a level.
  CHECK((images - blobs.features).cwiseAbs().maxCoeff() <= 0.5f / 255.0f + 1e-6f);

  // Wrong magic: a label file read as images.
  CHECK_THROWS(rejfilt::read_idx_images(dir / "lab.idx"));
  CHECK_THROWS(rejfilt::read_idx_labels(dir / "img.idx"));
  CHECK_THROWS(rejfilt::read_idx_images(dir / "missing.idx"));
  fs::remove_all(dir);
}
