#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace rejfilt {

/// IDX image container: magic 0x00000803, big-endian dimension sizes,
/// unsigned-byte pixels. Pixels come back row-flattened and normalized to
/// [0, 1].
Eigen::MatrixXf read_idx_images(const std::filesystem::path& path);

/// IDX label container: magic 0x00000801.
std::vector<std::int32_t> read_idx_labels(const std::filesystem::path& path);

/// Writers for the same containers (fixtures and round-trip tests).
void write_idx_images(const std::filesystem::path& path, const Eigen::MatrixXf& images,
                      std::int32_t rows, std::int32_t cols);
void write_idx_labels(const std::filesystem::path& path,
                      const std::vector<std::int32_t>& labels);

}  // namespace rejfilt
