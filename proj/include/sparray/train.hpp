// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sparray/config.hpp"
#include "sparray/data.hpp"
#include "sparray/gradcheck.hpp"
#include "sparray/losses.hpp"
#include "sparray/mask.hpp"
#include "sparray/recon.hpp"

#include <string>
#include <utility>
#include <vector>

namespace sparray {

/// Adam accumulators; one shared step count across all groups, per-group
/// learning rates. beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
struct AdamState {
  struct Slot {
    std::vector<double> m, v;
  };
  std::vector<Slot> slots;
  int step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct ParamGroup {
  std::string name;
  double lr = 0.0;
  std::vector<std::pair<std::string, Tensor>> params;
};

class NonFiniteGradient : public std::runtime_error {
 public:
  explicit NonFiniteGradient(const std::string& param)
      : std::runtime_error("non-finite gradient for parameter '" + param + "'") {}
};

/// Bias-corrected Adam update from the tensors' accumulated gradients.
/// grad_clip > 0 applies a global max-norm clip across all groups first.
void adam_step(std::vector<ParamGroup>& groups, AdamState& state, double grad_clip = 0.0);

struct CurveRow {
  int step = 0;
  double tau = 0.0;
  int n_active = 0;
  LossReport loss;
};

struct TrainResult {
  SelectionMask mask;
  IstaParams ista;
  CnnHead head;
  std::vector<CurveRow> curve;
  std::vector<int> final_selection;  // sorted element indices
};

/// All trainable tensors in checkpoint order.
std::vector<std::pair<std::string, Tensor>> named_params(SelectionMask& mask, IstaParams& ista,
                                                         CnnHead& head);

/// End-to-end loop: per step, anneal tau, build the STE mask, synthesize the
/// PSF once per batch, run the forward/recon pipeline per item, backprop and
/// apply Adam. Writes curve.csv, mask.csv, mask.png, resolved_config.json
/// and a checkpoint under cfg.out_dir (pass write_outputs = false to skip).
TrainResult train_loop(const RunConfig& cfg, const ImageSet& data, bool write_outputs = true,
                       bool finetune_head = false, const std::string& init_checkpoint = "");

/// Finite-difference check of the whole training objective against the
/// reverse-mode gradients, per parameter, at 64-bit. The mask contributes
/// through its soft path (element weights from p_soft); the hard selection
/// is piecewise constant and has no meaningful finite difference.
GradCheckReport pipeline_grad_check(const RunConfig& cfg, const ImageSet& data, int n_items,
                                    int samples_per_tensor, std::uint64_t seed);

void write_curve_csv(const std::string& path, const std::vector<CurveRow>& curve);
void write_mask_csv(const std::string& path, const std::vector<int>& selection);

}  // namespace sparray
