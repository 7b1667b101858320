#include "rejfilt/batched.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

#include <json.hpp>

namespace rejfilt {

namespace {

using LongVector = MomentAccumulator::LongVector;
using LongMatrix = MomentAccumulator::LongMatrix;

void put_u64le(std::vector<std::byte>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
}

void put_u32le(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
}

void put_f64le(std::vector<std::byte>& out, double v) {
  put_u64le(out, std::bit_cast<std::uint64_t>(v));
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  std::uint64_t u64le() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(take()) << (8 * i);
    return v;
  }

  std::uint32_t u32le() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(take()) << (8 * i);
    return v;
  }

  double f64le() { return std::bit_cast<double>(u64le()); }

  [[nodiscard]] bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  std::uint8_t take() {
    if (pos_ >= bytes_.size()) {
      throw std::invalid_argument("parse_binary: record truncated");
    }
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }

  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

PartialUpdate PartialUpdate::zero(std::int32_t node_id, Eigen::Index dim, std::uint64_t seed) {
  PartialUpdate out;
  out.node_id = node_id;
  out.n_accepted = 0;
  out.sum = Eigen::VectorXd::Zero(dim);
  out.outer = Eigen::MatrixXd::Zero(dim, dim);
  out.seed_used = seed;
  return out;
}

std::vector<std::byte> serialize_binary(const PartialUpdate& partial) {
  const Eigen::Index d = partial.sum.size();
  std::vector<std::byte> out;
  out.reserve(4 + 8 + 8 * static_cast<std::size_t>(d + d * d) + 8);
  put_u32le(out, static_cast<std::uint32_t>(partial.node_id));
  put_u64le(out, static_cast<std::uint64_t>(partial.n_accepted));
  for (Eigen::Index i = 0; i < d; ++i) put_f64le(out, partial.sum[i]);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) put_f64le(out, partial.outer(r, c));
  }
  put_u64le(out, partial.seed_used);
  return out;
}

PartialUpdate parse_binary(std::span<const std::byte> bytes, Eigen::Index dim) {
  ByteReader reader(bytes);
  PartialUpdate out;
  out.node_id = static_cast<std::int32_t>(reader.u32le());
  out.n_accepted = static_cast<std::int64_t>(reader.u64le());
  out.sum.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i) out.sum[i] = reader.f64le();
  out.outer.resize(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) out.outer(r, c) = reader.f64le();
  }
  out.seed_used = reader.u64le();
  if (!reader.exhausted()) {
    throw std::invalid_argument("parse_binary: trailing bytes");
  }
  return out;
}

std::string serialize_json(const PartialUpdate& partial) {
  const Eigen::Index d = partial.sum.size();
  nlohmann::json j;
  j["node_id"] = partial.node_id;
  j["n_accepted"] = partial.n_accepted;
  j["dim"] = d;
  j["sum"] = std::vector<double>(partial.sum.data(), partial.sum.data() + d);
  std::vector<double> outer;
  outer.reserve(static_cast<std::size_t>(d * d));
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) outer.push_back(partial.outer(r, c));
  }
  j["outer"] = outer;
  j["seed_used"] = partial.seed_used;
  return j.dump();
}

PartialUpdate parse_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  PartialUpdate out;
  out.node_id = j.at("node_id").get<std::int32_t>();
  out.n_accepted = j.at("n_accepted").get<std::int64_t>();
  const auto d = j.at("dim").get<Eigen::Index>();
  const auto sum = j.at("sum").get<std::vector<double>>();
  const auto outer = j.at("outer").get<std::vector<double>>();
  if (sum.size() != static_cast<std::size_t>(d) ||
      outer.size() != static_cast<std::size_t>(d * d)) {
    throw std::invalid_argument("parse_json: field sizes disagree with dim");
  }
  out.sum = Eigen::Map<const Eigen::VectorXd>(sum.data(), d);
  out.outer.resize(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      out.outer(r, c) = outer[static_cast<std::size_t>(r * d + c)];
    }
  }
  out.seed_used = j.at("seed_used").get<std::uint64_t>();
  return out;
}

std::vector<std::pair<std::int64_t, std::int64_t>> split_attempts(std::int64_t m,
                                                                  std::int64_t n_batch) {
  if (m < 1) throw std::invalid_argument("split_attempts: m must be >= 1");
  if (n_batch < 1) throw std::invalid_argument("split_attempts: n_batch must be >= 1");

  const std::int64_t base = m / n_batch;
  const std::int64_t extra = m % n_batch;
  std::vector<std::pair<std::int64_t, std::int64_t>> plan;
  std::int64_t offset = 0;
  for (std::int64_t i = 0; i < n_batch; ++i) {
    const std::int64_t attempts = base + (i < extra ? 1 : 0);
    if (attempts == 0) continue;  // more nodes than attempts
    plan.emplace_back(attempts, offset);
    offset += attempts;
  }
  return plan;
}

std::pair<GaussianModel, std::int64_t> combine(std::span<const PartialUpdate> partials,
                                               const GaussianModel& fallback, double r) {
  const Eigen::Index d = fallback.dim();
  LongVector total_sum = LongVector::Zero(d);
  LongMatrix total_outer = LongMatrix::Zero(d, d);
  std::int64_t total_accepted = 0;

  for (const PartialUpdate& p : partials) {
    if (p.sum.size() != d || p.outer.rows() != d || p.outer.cols() != d) {
      throw DimensionMismatchError("combine: partial dimension mismatch");
    }
    total_sum += p.sum.cast<long double>();
    total_outer += p.outer.cast<long double>();
    total_accepted += p.n_accepted;
  }

  if (total_accepted >= 2) {
    const long double n = static_cast<long double>(total_accepted);
    const LongVector mu = total_sum / n;
    const LongMatrix cov_l = (total_outer - n * (mu * mu.transpose())) / (n - 1.0L);
    Eigen::MatrixXd cov = cov_l.cast<double>();
    cov = 0.5 * (cov + cov.transpose());
    return {GaussianModel(mu.cast<double>(), cov), total_accepted};
  }

  const Eigen::MatrixXd widened = (1.0 + r) * fallback.covariance();
  if (total_accepted == 1) {
    return {GaussianModel(total_sum.cast<double>(), widened), 1};
  }
  return {GaussianModel(fallback.mean(), widened), 0};
}

}  // namespace rejfilt
