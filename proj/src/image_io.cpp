// SPDX-License-Identifier: Apache-2.0
#include "sparray/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace sparray {

void write_png_gray(const std::string& path, int width, int height,
                    const std::vector<std::uint8_t>& pixels) {
  if (pixels.size() != static_cast<std::size_t>(width) * height)
    throw ContractViolation("write_png_gray: pixel buffer size mismatch");
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("write_png_gray: cannot open '" + path + "'");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("write_png_gray: libpng failure for '" + path + "'");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y)
    png_write_row(png, const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * width));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

std::vector<std::uint8_t> db_render(const CTensor& kappa, double range_db) {
  const std::int64_t n = kappa.size();
  double peak = 0.0;
  std::vector<double> mag(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    mag[static_cast<std::size_t>(i)] = std::hypot(kappa.re[i], kappa.im[i]);
    peak = std::max(peak, mag[static_cast<std::size_t>(i)]);
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(n), 0);
  if (peak <= 0.0) return out;
  for (std::int64_t i = 0; i < n; ++i) {
    const double db = 20.0 * std::log10(std::max(mag[static_cast<std::size_t>(i)] / peak, 1e-30));
    const double clipped = std::max(db, -range_db);
    out[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>(std::lround(255.0 * (clipped + range_db) / range_db));
  }
  return out;
}

std::vector<std::uint8_t> linear_render(const Tensor& image) {
  double lo = 1e300, hi = -1e300;
  for (std::int64_t i = 0; i < image.size(); ++i) {
    lo = std::min(lo, image[i]);
    hi = std::max(hi, image[i]);
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(image.size()), 0);
  const double span = hi - lo;
  if (span <= 0.0) return out;
  for (std::int64_t i = 0; i < image.size(); ++i)
    out[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>(std::lround(255.0 * (image[i] - lo) / span));
  return out;
}

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "'");
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

}  // namespace sparray
