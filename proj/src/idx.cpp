#include "fednc/idx.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <vector>

namespace fednc::idx {

namespace {

std::uint32_t read_u32_be(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw IdxFormatError(path + ": truncated header");
  }
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

std::vector<std::uint8_t> read_payload(std::istream& in, std::size_t n,
                                       const std::string& path) {
  std::vector<std::uint8_t> data(n);
  if (!in.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(n))) {
    throw IdxFormatError(path + ": truncated payload");
  }
  return data;
}

}  // namespace

model::Dataset read_idx_dataset(const std::string& images_path,
                                const std::string& labels_path,
                                bool downsample_to_14) {
  std::ifstream images(images_path, std::ios::binary);
  if (!images) throw IdxFormatError(images_path + ": cannot open");
  if (read_u32_be(images, images_path) != 0x00000803) {
    throw IdxFormatError(images_path + ": not an IDX u8 image file");
  }
  const std::uint32_t count = read_u32_be(images, images_path);
  const std::uint32_t rows = read_u32_be(images, images_path);
  const std::uint32_t cols = read_u32_be(images, images_path);

  std::ifstream labels(labels_path, std::ios::binary);
  if (!labels) throw IdxFormatError(labels_path + ": cannot open");
  if (read_u32_be(labels, labels_path) != 0x00000801) {
    throw IdxFormatError(labels_path + ": not an IDX u8 label file");
  }
  if (read_u32_be(labels, labels_path) != count) {
    throw IdxFormatError("image and label counts differ");
  }

  const std::size_t pixels = std::size_t(rows) * cols;
  const auto raw = read_payload(images, std::size_t(count) * pixels,
                                images_path);
  const auto y = read_payload(labels, count, labels_path);

  unsigned factor = 1;
  if (downsample_to_14 && rows == cols && rows % 14 == 0 && rows > 14) {
    factor = rows / 14;
  }
  const unsigned out_rows = rows / factor;
  const unsigned out_cols = cols / factor;

  model::Dataset data;
  data.features.resize(count);
  data.labels.resize(count);
  int max_label = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint8_t* img = raw.data() + std::size_t(i) * pixels;
    auto& row = data.features[i];
    row.resize(std::size_t(out_rows) * out_cols);
    for (unsigned r = 0; r < out_rows; ++r) {
      for (unsigned c = 0; c < out_cols; ++c) {
        double acc = 0.0;
        for (unsigned dr = 0; dr < factor; ++dr) {
          for (unsigned dc = 0; dc < factor; ++dc) {
            acc += img[std::size_t(r * factor + dr) * cols + c * factor + dc];
          }
        }
        row[std::size_t(r) * out_cols + c] =
            static_cast<float>(acc / (255.0 * factor * factor));
      }
    }
    data.labels[i] = y[i];
    max_label = std::max(max_label, int(y[i]));
  }
  data.n_classes = max_label + 1;
  return data;
}

}  // namespace fednc::idx
