#include "rejfilt/mnist_idx.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace rejfilt {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_u32be(std::istream& in, const std::string& what) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (!in) throw std::runtime_error("IDX read: truncated " + what);
  return (static_cast<std::uint32_t>(bytes[0]) << 24) |
         (static_cast<std::uint32_t>(bytes[1]) << 16) |
         (static_cast<std::uint32_t>(bytes[2]) << 8) | static_cast<std::uint32_t>(bytes[3]);
}

void write_u32be(std::ostream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>((v >> 24) & 0xFF),
                                  static_cast<unsigned char>((v >> 16) & 0xFF),
                                  static_cast<unsigned char>((v >> 8) & 0xFF),
                                  static_cast<unsigned char>(v & 0xFF)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("IDX read: cannot open " + path.string());
  return in;
}

}  // namespace

Eigen::MatrixXf read_idx_images(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  if (read_u32be(in, "magic") != kImageMagic) {
    throw std::runtime_error("IDX read: bad image magic in " + path.string());
  }
  const std::uint32_t count = read_u32be(in, "count");
  const std::uint32_t rows = read_u32be(in, "rows");
  const std::uint32_t cols = read_u32be(in, "cols");
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;

  Eigen::MatrixXf images(count, pixels);
  std::vector<unsigned char> buffer(pixels);
  for (std::uint32_t i = 0; i < count; ++i) {
    in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(pixels));
    if (!in) throw std::runtime_error("IDX read: truncated pixel data in " + path.string());
    for (std::size_t j = 0; j < pixels; ++j) {
      images(i, static_cast<Eigen::Index>(j)) = static_cast<float>(buffer[j]) / 255.0f;
    }
  }
  return images;
}

std::vector<std::int32_t> read_idx_labels(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  if (read_u32be(in, "magic") != kLabelMagic) {
    throw std::runtime_error("IDX read: bad label magic in " + path.string());
  }
  const std::uint32_t count = read_u32be(in, "count");
  std::vector<std::int32_t> labels(count);
  std::vector<unsigned char> buffer(count);
  in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(count));
  if (!in) throw std::runtime_error("IDX read: truncated label data in " + path.string());
  for (std::uint32_t i = 0; i < count; ++i) labels[i] = buffer[i];
  return labels;
}

void write_idx_images(const std::filesystem::path& path, const Eigen::MatrixXf& images,
                      std::int32_t rows, std::int32_t cols) {
  if (static_cast<Eigen::Index>(rows) * cols != images.cols()) {
    throw std::invalid_argument("IDX write: rows*cols must equal the feature count");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("IDX write: cannot open " + path.string());
  write_u32be(out, kImageMagic);
  write_u32be(out, static_cast<std::uint32_t>(images.rows()));
  write_u32be(out, static_cast<std::uint32_t>(rows));
  write_u32be(out, static_cast<std::uint32_t>(cols));
  for (Eigen::Index i = 0; i < images.rows(); ++i) {
    for (Eigen::Index j = 0; j < images.cols(); ++j) {
      const float clamped = std::min(1.0f, std::max(0.0f, images(i, j)));
      const auto byte = static_cast<unsigned char>(std::lround(clamped * 255.0f));
      out.write(reinterpret_cast<const char*>(&byte), 1);
    }
  }
}

void write_idx_labels(const std::filesystem::path& path,
                      const std::vector<std::int32_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("IDX write: cannot open " + path.string());
  write_u32be(out, kLabelMagic);
  write_u32be(out, static_cast<std::uint32_t>(labels.size()));
  for (const std::int32_t label : labels) {
    const auto byte = static_cast<unsigned char>(label);
    out.write(reinterpret_cast<const char*>(&byte), 1);
  }
}

}  // namespace rejfilt
