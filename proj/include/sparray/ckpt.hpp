// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sparray/tensor.hpp"

#include <string>
#include <utility>
#include <vector>

namespace sparray {

class CheckpointError : public std::runtime_error {
 public:
  explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr int kCheckpointVersion = 1;

/// Writes manifest.json ({format_version, config_hash, tensors: [{name,
/// shape, offset}]}) plus payload.bin, raw little-endian float32 values
/// concatenated in manifest order.
void save_checkpoint(const std::string& dir,
                     const std::vector<std::pair<std::string, Tensor>>& params,
                     const std::string& config_hash);

/// Restores every named tensor in place. The manifest must match the given
/// parameter list (same names, same shapes); a wrong format version raises a
/// migration error, a short payload an integrity error naming the first bad
/// tensor.
void load_checkpoint(const std::string& dir,
                     std::vector<std::pair<std::string, Tensor>>& params);

std::string checkpoint_config_hash(const std::string& dir);

}  // namespace sparray
