// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparray {

class IdxFormatError : public std::runtime_error {
 public:
  IdxFormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Grayscale image set; all images share rows x cols, values 0..255.
struct ImageSet {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<std::uint8_t>> images;

  std::size_t count() const { return images.size(); }
};

/// Parses the IDX image format: big-endian magic 0x00000803, u32 count,
/// rows, cols, then count*rows*cols bytes row-major.
ImageSet read_idx_images(const std::string& path);
ImageSet parse_idx_images(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> serialize_idx_images(const ImageSet& set);
void write_idx_images(const std::string& path, const ImageSet& set);

/// 64 deterministic 28x28 glyph-like patterns, generated with integer
/// arithmetic only so the bytes are identical on every platform. The same
/// generator produced the committed data/mini.idx asset.
ImageSet mini_fixture();

/// Seeded epoch permutation of [0, count).
std::vector<std::size_t> epoch_order(std::size_t count, std::uint64_t seed);

}  // namespace sparray
