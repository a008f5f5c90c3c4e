// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sparray/ctensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sparray {

void write_png_gray(const std::string& path, int width, int height,
                    const std::vector<std::uint8_t>& pixels);

/// 20*log10(|k| / max|k|), clipped at -range_db, mapped to linear grayscale
/// (0 = -range_db, 255 = 0 dB).
std::vector<std::uint8_t> db_render(const CTensor& kappa, double range_db = 40.0);

/// Min-max grayscale of a real image.
std::vector<std::uint8_t> linear_render(const Tensor& image);

/// Deterministic numeric formatting shared by every CSV writer ("%.10g").
std::string fmt_num(double v);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace sparray
