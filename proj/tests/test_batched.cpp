#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "rejfilt/batched.hpp"
#include "rejfilt/errors.hpp"

using rejfilt::DimensionMismatchError;
using rejfilt::FunctionLikelihood;
using rejfilt::GaussianModel;
using rejfilt::MomentAccumulator;
using rejfilt::PartialUpdate;
using rejfilt::RFConfig;
using rejfilt::RngStream;
using rejfilt::combine;
using rejfilt::node_update;
using rejfilt::parse_binary;
using rejfilt::parse_json;
using rejfilt::rf_update;
using rejfilt::run_batched;
using rejfilt::serialize_binary;
using rejfilt::serialize_json;
using rejfilt::split_attempts;

namespace {

using Unit = int;
const std::array<Unit, 1> kOneEvidence{0};

FunctionLikelihood<Unit> gaussian_bump() {
  return FunctionLikelihood<Unit>([](const Unit&, const Eigen::VectorXd& x) {
    Eigen::VectorXd c(2);
    c << 0.4, -0.2;
    return std::exp(-0.5 * (x - c).squaredNorm());
  });
}

GaussianModel prior2() {
  Eigen::VectorXd mu(2);
  mu << 0.1, 0.2;
  return GaussianModel(mu, Eigen::MatrixXd::Identity(2, 2));
}

PartialUpdate from_samples(std::int32_t node_id,
                           const std::vector<Eigen::Vector2d>& samples) {
  MomentAccumulator acc(2);
  for (const auto& s : samples) acc.accumulate(s);
  PartialUpdate p;
  p.node_id = node_id;
  p.n_accepted = acc.count();
  p.sum = acc.naive_sum();
  p.outer = acc.naive_outer_sum();
  p.seed_used = 42;
  return p;
}

double rel_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale =
      std::max(1e-300, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("attempt splitting is even with offsets") {
  const auto plan = split_attempts(10, 3);
  REQUIRE(plan.size() == 3);
  CHECK(plan[0] == std::pair<std::int64_t, std::int64_t>{4, 0});
  CHECK(plan[1] == std::pair<std::int64_t, std::int64_t>{3, 4});
  CHECK(plan[2] == std::pair<std::int64_t, std::int64_t>{3, 7});

  // More nodes than attempts: idle nodes drop out.
  const auto tiny = split_attempts(2, 8);
  CHECK(tiny.size() == 2);

  CHECK_THROWS_AS(split_attempts(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(split_attempts(5, 0), std::invalid_argument);
}

TEST_CASE("reject-all nodes pass back the zero triple") {
  const FunctionLikelihood<Unit> zero(
      [](const Unit&, const Eigen::VectorXd&) { return 0.0; });
  const PartialUpdate p = node_update<Unit>(kOneEvidence, prior2(), zero, 100, 7);
  CHECK(p.n_accepted == 0);
  CHECK(p.sum.isZero(0.0));
  CHECK(p.outer.isZero(0.0));
}

TEST_CASE("a single node reproduces the plain update") {
  const auto like = gaussian_bump();
  const GaussianModel prior = prior2();
  RFConfig config;
  config.attempts = 5000;
  config.recovery_factor = 0.02;
  config.rng_seed = 123;
  const auto reference = rf_update<Unit>(kOneEvidence, prior, like, config);

  const auto [model, accepted] =
      run_batched<Unit>(kOneEvidence, prior, like, 5000, 0.02, 123, 1);
  CHECK(accepted == reference.n_accepted);
  CHECK(rel_gap(model.mean(), reference.posterior.mean()) < 1e-9);
  CHECK(rel_gap(model.covariance(), reference.posterior.covariance()) < 1e-9);
}

TEST_CASE("all nodes rejecting triggers the server recovery branch") {
  const FunctionLikelihood<Unit> zero(
      [](const Unit&, const Eigen::VectorXd&) { return 0.0; });
  const GaussianModel prior = prior2();
  const auto [model, accepted] =
      run_batched<Unit>(kOneEvidence, prior, zero, 1000, 0.02, 5, 4);
  CHECK(accepted == 0);
  CHECK(model.mean() == prior.mean());
  CHECK(model.covariance()(0, 0) == doctest::Approx(1.02));
}

TEST_CASE("combine over hand-built partials equals the pooled moments") {
  const PartialUpdate a = from_samples(0, {{1.0, 0.0}});
  const PartialUpdate b = from_samples(1, {{0.0, 1.0}, {2.0, 2.0}});
  CHECK(a.sum[0] == 1.0);
  CHECK(b.sum[1] == 3.0);
  CHECK(b.outer(0, 0) == 4.0);

  const GaussianModel fallback(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
  const std::vector<PartialUpdate> partials{a, b};
  const auto [model, total] = combine(partials, fallback, 0.0);
  CHECK(total == 3);
  CHECK(model.mean()[0] == doctest::Approx(1.0));
  CHECK(model.mean()[1] == doctest::Approx(1.0));
  CHECK(model.covariance()(0, 0) == doctest::Approx(1.0));
  CHECK(model.covariance()(0, 1) == doctest::Approx(0.5));
  CHECK(model.covariance()(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("combine of one partial equals its finalize") {
  RngStream rng(8);
  MomentAccumulator acc(2);
  std::vector<Eigen::Vector2d> samples;
  for (int i = 0; i < 200; ++i) {
    Eigen::Vector2d s(rng.normal(), 2.0 * rng.normal() - 1.0);
    samples.push_back(s);
    acc.accumulate(s);
  }
  const GaussianModel fallback(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
  const GaussianModel direct = finalize(acc, fallback, 0.0);

  const std::vector<PartialUpdate> one{from_samples(0, samples)};
  const auto [via_combine, total] = combine(one, fallback, 0.0);
  CHECK(total == 200);
  CHECK(rel_gap(via_combine.mean(), direct.mean()) < 1e-9);
  CHECK(rel_gap(via_combine.covariance(), direct.covariance()) < 1e-9);
}

TEST_CASE("stream splitting makes 8x125 equal 1x1000") {
  const auto like = gaussian_bump();
  const GaussianModel prior = prior2();
  RFConfig config;
  config.attempts = 1000;
  config.recovery_factor = 0.02;
  config.rng_seed = 2024;
  const auto reference = rf_update<Unit>(kOneEvidence, prior, like, config);

  std::vector<PartialUpdate> partials;
  const auto [model, accepted] =
      run_batched<Unit>(kOneEvidence, prior, like, 1000, 0.02, 2024, 8, &partials);
  CHECK(partials.size() == 8);
  CHECK(accepted == reference.n_accepted);
  CHECK(rel_gap(model.mean(), reference.posterior.mean()) < 1e-9);
  CHECK(rel_gap(model.covariance(), reference.posterior.covariance()) < 1e-9);

  std::int64_t count_sum = 0;
  for (const PartialUpdate& p : partials) count_sum += p.n_accepted;
  CHECK(count_sum == accepted);

  // Permutation invariance of the combine.
  const GaussianModel fallback = prior;
  std::vector<PartialUpdate> shuffled = partials;
  std::reverse(shuffled.begin(), shuffled.end());
  std::swap(shuffled[0], shuffled[3]);
  const auto [permuted, permuted_count] = combine(shuffled, fallback, 0.02);
  CHECK(permuted_count == accepted);
  CHECK(rel_gap(permuted.mean(), model.mean()) < 1e-9);
  CHECK(rel_gap(permuted.covariance(), model.covariance()) < 1e-9);
}

TEST_CASE("binary serialization round-trips bit-exactly") {
  RngStream rng(3);
  std::vector<Eigen::Vector2d> samples;
  for (int i = 0; i < 17; ++i) samples.emplace_back(rng.normal(), rng.normal());
  const PartialUpdate p = from_samples(5, samples);

  const auto bytes = serialize_binary(p);
  CHECK(bytes.size() == 4 + 8 + 8 * (2 + 4) + 8);
  const PartialUpdate back = parse_binary(bytes, 2);
  CHECK(back.node_id == p.node_id);
  CHECK(back.n_accepted == p.n_accepted);
  CHECK(back.seed_used == p.seed_used);
  CHECK(back.sum == p.sum);
  CHECK(back.outer == p.outer);

  const auto truncated = std::span<const std::byte>(bytes).first(bytes.size() - 3);
  CHECK_THROWS_AS(parse_binary(truncated, 2), std::invalid_argument);
}

TEST_CASE("json serialization round-trips") {
  const PartialUpdate p = from_samples(2, {{0.25, -1.5}, {3.0, 0.125}});
  const PartialUpdate back = parse_json(serialize_json(p));
  CHECK(back.node_id == p.node_id);
  CHECK(back.n_accepted == p.n_accepted);
  CHECK(back.sum == p.sum);
  CHECK(back.outer == p.outer);
  CHECK(back.seed_used == p.seed_used);
}

TEST_CASE("combine rejects mismatched dimensions") {
  PartialUpdate p = PartialUpdate::zero(0, 3, 0);
  const GaussianModel fallback(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
  const std::vector<PartialUpdate> partials{p};
  CHECK_THROWS_AS(combine(partials, fallback, 0.0), DimensionMismatchError);
}
