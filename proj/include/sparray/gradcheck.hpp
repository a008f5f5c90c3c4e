// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sparray/tensor.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace sparray {

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  bool finite = true;
  int checked = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_err = 0.0;
  bool pass = false;
  std::string failure;  // non-empty when a non-finite value was hit
};

/// Compares reverse-mode gradients of a deterministic scalar map against
/// central finite differences (f(x+eps) - f(x-eps)) / (2 eps), at 64-bit.
/// f must rebuild its graph from the current parameter values on every call.
/// samples_per_tensor < 0 checks every coordinate; otherwise a seeded random
/// subset per tensor keeps large parameter groups tractable.
GradCheckReport grad_check(const std::function<Tensor()>& f,
                           const std::vector<std::pair<std::string, Tensor>>& params,
                           double eps, double tol, int samples_per_tensor = -1,
                           std::uint64_t seed = 0);

}  // namespace sparray
