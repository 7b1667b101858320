#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rejfilt/parallel.hpp"
#include "rejfilt/rejection_filter.hpp"

namespace rejfilt {

/// Raw sums one worker node ships back to the server: no finalized moments,
/// just sum(x), sum(x x^T) and the acceptance count over its attempt slice.
struct PartialUpdate {
  std::int32_t node_id = 0;
  std::int64_t n_accepted = 0;
  Eigen::VectorXd sum;    // M^i
  Eigen::MatrixXd outer;  // S^i
  std::uint64_t seed_used = 0;

  static PartialUpdate zero(std::int32_t node_id, Eigen::Index dim, std::uint64_t seed);
};

/// Flat little-endian record: node_id (i32), n_accepted (i64),
/// M (dim f64), S (dim^2 f64 row-major), seed (u64). The dimension is
/// channel state, so parsing needs it back.
std::vector<std::byte> serialize_binary(const PartialUpdate& partial);
PartialUpdate parse_binary(std::span<const std::byte> bytes, Eigen::Index dim);

/// Self-describing JSON form of the same record.
std::string serialize_json(const PartialUpdate& partial);
PartialUpdate parse_json(const std::string& text);

/// Evenly split m attempts over n_batch nodes: the first (m mod n_batch)
/// nodes take one extra. Returns (attempts, offset) per node; offsets index
/// the shared candidate-stream space.
std::vector<std::pair<std::int64_t, std::int64_t>> split_attempts(std::int64_t m,
                                                                  std::int64_t n_batch);

/// Server-side combine: pooled mean M/N and covariance (S - N mu mu^T)/(N-1)
/// over all partials, computed in widened precision. Zero total acceptances
/// returns the fallback with (1+r)-inflated covariance; a single acceptance
/// recenters on it like the single-node update.
std::pair<GaussianModel, std::int64_t> combine(std::span<const PartialUpdate> partials,
                                               const GaussianModel& fallback, double r);

/// The Algorithm-1 inner loop over one attempt slice. Candidate i of this
/// node uses candidate_stream(node_seed, attempt_offset + i): sharding the
/// offsets over nodes replays exactly the candidates a single-node update
/// with the same seed would draw.
template <typename Evidence>
PartialUpdate node_update(std::span<const Evidence> evidence, const GaussianModel& prior,
                          const LikelihoodModel<Evidence>& likelihood, std::int64_t attempts,
                          std::uint64_t node_seed, std::int64_t attempt_offset = 0,
                          std::int32_t node_id = 0) {
  if (attempts < 1) throw std::invalid_argument("node_update: attempts must be >= 1");

  const Eigen::MatrixXd factor = covariance_factor(prior.covariance());
  MomentAccumulator acc(prior.dim());

  for (std::int64_t i = 0; i < attempts; ++i) {
    RngStream stream =
        candidate_stream(node_seed, static_cast<std::uint64_t>(attempt_offset + i));
    const Eigen::VectorXd x = sample_with_factor(prior.mean(), factor, stream);
    const double u = stream.uniform01();
    if (detail::acceptance_probability(x, evidence, likelihood, nullptr) >= u) {
      acc.accumulate(x);
    }
  }

  if (acc.count() == 0) return PartialUpdate::zero(node_id, prior.dim(), node_seed);
  PartialUpdate out;
  out.node_id = node_id;
  out.n_accepted = acc.count();
  out.sum = acc.naive_sum();
  out.outer = acc.naive_outer_sum();
  out.seed_used = node_seed;
  return out;
}

/// One logical rf_update distributed over n_batch in-process workers sharing
/// the master seed's candidate space. Deterministic for a fixed
/// (master_seed, n_batch); the finalized moments match the single-node run
/// up to summation order.
template <typename Evidence>
std::pair<GaussianModel, std::int64_t> run_batched(std::span<const Evidence> evidence,
                                                   const GaussianModel& prior,
                                                   const LikelihoodModel<Evidence>& likelihood,
                                                   std::int64_t attempts, double r,
                                                   std::uint64_t master_seed,
                                                   std::int64_t n_batch,
                                                   std::vector<PartialUpdate>* partials_out =
                                                       nullptr) {
  const auto plan = split_attempts(attempts, n_batch);
  std::vector<PartialUpdate> partials(plan.size());
  parallel_for(static_cast<std::int64_t>(plan.size()), [&](std::int64_t i) {
    const auto [node_attempts, offset] = plan[static_cast<std::size_t>(i)];
    partials[static_cast<std::size_t>(i)] =
        node_update(evidence, prior, likelihood, node_attempts, master_seed, offset,
                    static_cast<std::int32_t>(i));
  });
  auto result = combine(partials, prior, r);
  if (partials_out != nullptr) *partials_out = std::move(partials);
  return result;
}

}  // namespace rejfilt
