// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sparray/ctensor.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sparray {

/// Per-layer ISTA parameters. Raw values are mapped through softplus so the
/// optimizer can step freely: alpha_t > 0, lambda_t >= 0.
struct IstaParams {
  Tensor raw_alpha;   // {n_layers}
  Tensor raw_lambda;  // {n_layers}
  int n_layers = 0;

  Tensor alpha(int t) const;
  Tensor lambda(int t) const;
};

/// alpha_t initialized to alpha0 (typically 1/L with L = max |F(kappa_ref)|^2),
/// lambda_t to lambda0.
IstaParams init_ista(int n_layers, double alpha0, double lambda0 = 1e-3);

/// Complex soft-thresholding, prox_lambda(Z) = Z/(|Z|+eps) * max(|Z|-lambda, 0).
CTensor prox(const CTensor& z, const Tensor& lambda, double eps = 1e-8);

class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(int layer)
      : std::runtime_error("ista_unroll: non-finite iterate at layer " + std::to_string(layer)) {}
};

/// Unrolled proximal-gradient iterations from X0 = 0 against the operator
/// with the given corner-origin spectrum.
CTensor ista_unroll(const CTensor& measurement, const CTensor& spectrum, const IstaParams& params);

/// Five real channels: Re, Im, |X|, Re/(|X|+eps), Im/(|X|+eps).
Tensor features(const CTensor& x, double eps = 1e-8);

/// Residual CNN head: four 3x3 encoder convs (5->32->64->128->64), a 1x1
/// projection of the 128-channel stage into the 64-channel sum, a 3x3 fuse
/// back to 32 channels added to the first stage, a 3x3 head to one channel,
/// and a 1x1 base projection of the input features. Output is b + eta * r.
struct CnnHead {
  Tensor w1, b1;      // 3x3, 5 -> 32
  Tensor w2, b2;      // 3x3, 32 -> 64
  Tensor w3, b3;      // 3x3, 64 -> 128
  Tensor w4, b4;      // 3x3, 128 -> 64
  Tensor wproj, bproj;  // 1x1, 128 -> 64
  Tensor w5, b5;      // 3x3, 64 -> 32
  Tensor whead, bhead;  // 3x3, 32 -> 1
  Tensor wbase, bbase;  // 1x1, 5 -> 1
  Tensor eta;         // learnable residual scale, scalar
  double slope = 0.1;

  std::vector<std::pair<std::string, Tensor>> params();
};

CnnHead init_cnn_head(std::uint64_t seed, double eta0 = 0.1);

Tensor cnn_head(const Tensor& feat, const CnnHead& head);

}  // namespace sparray
