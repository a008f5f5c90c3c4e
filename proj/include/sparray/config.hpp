// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sparray/losses.hpp"
#include "sparray/probe.hpp"
#include "sparray/psf.hpp"

#include <cstdint>
#include <string>

namespace sparray {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Full run configuration. Field defaults are the paper-scale settings; the
/// desk profile overrides size-related fields only, never the acoustics.
struct RunConfig {
  std::string profile = "paper";  // "paper" or "desk"

  ProbeSpec probe;
  GridSpec grid;
  AngleSet angles;
  PulseModel pulse;
  LossWeights loss;

  int k = 32;
  int epochs = 100;
  int batch_size = 64;
  int n_ista = 8;
  std::uint64_t seed = 1;
  double lr_mask = 1e-4;
  double lr_ista = 5e-4;
  double lr_head = 1e-4;
  double tau0 = 6.0;
  double tau_end = 1.2;
  int t_warm = 1500;
  double mask_init_std = 0.01;
  double grad_clip = 0.0;  // 0 disables clipping
  double slr_quantile = 0.95;
  std::string precision = "f32";  // "f32" or "f64"
  std::string data_path;          // empty -> bundled mini fixture
  std::string out_dir = "out";

  Precision precision_mode() const;
};

RunConfig default_config(const std::string& profile);

/// Strict JSON parsing: unknown keys are rejected, missing keys keep the
/// profile defaults. The profile key is applied first so overrides win.
RunConfig config_from_json_text(const std::string& text);
RunConfig load_config(const std::string& path);

std::string config_to_json_text(const RunConfig& cfg);
void save_config(const RunConfig& cfg, const std::string& path);

/// FNV-1a hash of the canonical JSON dump, hex encoded.
std::string config_hash(const RunConfig& cfg);

}  // namespace sparray
