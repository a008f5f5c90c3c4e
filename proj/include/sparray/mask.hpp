// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sparray/tensor.hpp"

#include <cstdint>
#include <vector>

namespace sparray {

/// Learnable element selection: logits {N_e, k}, one column per active slot.
struct SelectionMask {
  Tensor logits;
  int n_elements = 0;
  int k = 0;
};

SelectionMask init_mask(int n_elements, int k, std::uint64_t seed, double init_std = 0.01);

/// One forward evaluation of the mask at temperature tau.
struct MaskForward {
  Tensor p_soft;   // column-stochastic, sequential without-replacement softmax
  Tensor p_hard;   // one-hot columns on k distinct rows (constant, no grad)
  Tensor p_ste;    // forward == p_hard, pullback == p_soft's pullback
  Tensor w;        // element weights, row sums of p_ste
  std::vector<int> selected;  // hard row index per column
};

/// Column softmax(l_j / tau) with sequential exclusion: rows claimed by the
/// hard argmax of earlier columns are forced to probability zero. Exclusion
/// structure is treated as constant in the backward pass.
Tensor soft_columns(const Tensor& logits, double tau);

/// Column-wise argmax one-hot; ties break to the lowest row index. Returns a
/// constant tensor (no gradient path).
Tensor harden(const Tensor& p_soft);

/// Straight-through combination: value of p_hard, gradient of p_soft.
Tensor ste_combine(const Tensor& p_hard, const Tensor& p_soft);

/// w = P * 1_k (row sums).
Tensor element_weights(const Tensor& p);

MaskForward mask_forward(const SelectionMask& mask, double tau);

/// Mean column entropy, -sum p log(p + 1e-12) averaged over columns.
Tensor mask_entropy(const Tensor& p_soft);

/// Squared hinge on row sums: sum_e max(0, s_e - 1)^2.
Tensor row_diversity(const Tensor& p_soft);

std::vector<int> hard_rows(const Tensor& p_hard);

/// Cosine temperature decay from tau0 to tau_end over t_warm steps, constant
/// tau_end afterwards.
double temperature(int step, double tau0 = 6.0, double tau_end = 1.2, int t_warm = 1500);

}  // namespace sparray
