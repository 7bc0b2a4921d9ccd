#pragma once

// Minimal reader for IDX image/label files (magic 0x00000803 / 0x00000801,
// unsigned-byte payloads). Optional average-pool downsampling to 14x14 keeps
// the classifier at desk scale.

#include <string>

#include "fednc/model.hpp"

namespace fednc::idx {

struct IdxFormatError : std::runtime_error {
  explicit IdxFormatError(const std::string& what)
      : std::runtime_error(what) {}
};

// Pixel values are scaled to [0, 1]. With downsample_to_14 set and an image
// side divisible by 14, images are average-pooled down to 14x14.
model::Dataset read_idx_dataset(const std::string& images_path,
                                const std::string& labels_path,
                                bool downsample_to_14);

}  // namespace fednc::idx
