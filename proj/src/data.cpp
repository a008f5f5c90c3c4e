// SPDX-License-Identifier: Apache-2.0
#include "sparray/data.hpp"

#include "sparray/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>

namespace sparray {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr int kHeaderBytes = 16;

std::uint32_t read_u32_be(const std::vector<std::uint8_t>& b, std::size_t off) {
  return (static_cast<std::uint32_t>(b[off]) << 24) | (static_cast<std::uint32_t>(b[off + 1]) << 16) |
         (static_cast<std::uint32_t>(b[off + 2]) << 8) | static_cast<std::uint32_t>(b[off + 3]);
}

void write_u32_be(std::vector<std::uint8_t>& b, std::uint32_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 24));
  b.push_back(static_cast<std::uint8_t>(v >> 16));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

ImageSet parse_idx_images(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw IdxFormatError("truncated IDX header", bytes.size());
  const std::uint32_t magic = read_u32_be(bytes, 0);
  if (magic != kImageMagic)
    throw IdxFormatError("expected image magic 0x00000803, got 0x" + [magic] {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%08x", magic);
      return std::string(buf);
    }(), 0);
  if (bytes.size() < kHeaderBytes) throw IdxFormatError("truncated IDX header", bytes.size());
  const std::uint32_t count = read_u32_be(bytes, 4);
  const std::uint32_t rows = read_u32_be(bytes, 8);
  const std::uint32_t cols = read_u32_be(bytes, 12);
  const std::size_t expected = kHeaderBytes + static_cast<std::size_t>(count) * rows * cols;
  if (bytes.size() < expected) throw IdxFormatError("truncated IDX payload", bytes.size());

  ImageSet set;
  set.rows = static_cast<int>(rows);
  set.cols = static_cast<int>(cols);
  set.images.reserve(count);
  std::size_t off = kHeaderBytes;
  const std::size_t stride = static_cast<std::size_t>(rows) * cols;
  for (std::uint32_t i = 0; i < count; ++i, off += stride)
    set.images.emplace_back(bytes.begin() + static_cast<std::ptrdiff_t>(off),
                            bytes.begin() + static_cast<std::ptrdiff_t>(off + stride));
  return set;
}

ImageSet read_idx_images(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxFormatError("cannot open '" + path + "'", 0);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_idx_images(bytes);
}

std::vector<std::uint8_t> serialize_idx_images(const ImageSet& set) {
  std::vector<std::uint8_t> out;
  write_u32_be(out, kImageMagic);
  write_u32_be(out, static_cast<std::uint32_t>(set.count()));
  write_u32_be(out, static_cast<std::uint32_t>(set.rows));
  write_u32_be(out, static_cast<std::uint32_t>(set.cols));
  for (const auto& img : set.images) out.insert(out.end(), img.begin(), img.end());
  return out;
}

void write_idx_images(const std::string& path, const ImageSet& set) {
  std::ofstream out(path, std::ios::binary);
  const auto bytes = serialize_idx_images(set);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write_idx_images: cannot write '" + path + "'");
}

namespace {

// splitmix64: integer-only, platform-independent.
std::uint64_t mix(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

ImageSet mini_fixture() {
  constexpr int n = 28;
  ImageSet set;
  set.rows = n;
  set.cols = n;
  std::uint64_t state = 0x5eedf1c5u;
  for (int img = 0; img < 64; ++img) {
    std::vector<std::uint8_t> px(n * n, 0);
    auto put = [&](int y, int x, std::uint32_t v) {
      if (y >= 0 && y < n && x >= 0 && x < n) {
        const std::uint32_t cur = px[static_cast<std::size_t>(y) * n + x];
        px[static_cast<std::size_t>(y) * n + x] = static_cast<std::uint8_t>(std::min<std::uint32_t>(255, cur + v));
      }
    };
    const int strokes = 2 + static_cast<int>(mix(state) % 3);
    for (int s = 0; s < strokes; ++s) {
      const std::uint32_t intensity = 120 + static_cast<std::uint32_t>(mix(state) % 136);
      switch (mix(state) % 3) {
        case 0: {  // filled disk
          const int cy = 6 + static_cast<int>(mix(state) % 16);
          const int cx = 6 + static_cast<int>(mix(state) % 16);
          const int r = 2 + static_cast<int>(mix(state) % 4);
          for (int y = cy - r; y <= cy + r; ++y)
            for (int x = cx - r; x <= cx + r; ++x)
              if ((y - cy) * (y - cy) + (x - cx) * (x - cx) <= r * r) put(y, x, intensity);
          break;
        }
        case 1: {  // horizontal bar
          const int cy = 4 + static_cast<int>(mix(state) % 20);
          const int x0 = 2 + static_cast<int>(mix(state) % 10);
          const int len = 6 + static_cast<int>(mix(state) % 14);
          const int thick = 1 + static_cast<int>(mix(state) % 3);
          for (int y = cy; y < cy + thick; ++y)
            for (int x = x0; x < x0 + len; ++x) put(y, x, intensity);
          break;
        }
        default: {  // vertical bar
          const int cx = 4 + static_cast<int>(mix(state) % 20);
          const int y0 = 2 + static_cast<int>(mix(state) % 10);
          const int len = 6 + static_cast<int>(mix(state) % 14);
          const int thick = 1 + static_cast<int>(mix(state) % 3);
          for (int x = cx; x < cx + thick; ++x)
            for (int y = y0; y < y0 + len; ++y) put(y, x, intensity);
          break;
        }
      }
    }
    set.images.push_back(std::move(px));
  }
  return set;
}

std::vector<std::size_t> epoch_order(std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = count; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace sparray
