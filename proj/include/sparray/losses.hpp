// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sparray/ctensor.hpp"
#include "sparray/psf.hpp"

#include <vector>

namespace sparray {

struct LossWeights {
  double w_psf = 10.0;
  double w_conv = 1.0;
  double w_rec = 10.0;
  double lambda_contrast = 10.0;
  double lambda_slr = 10.0;
  double lambda_ent = 1.0;
  double lambda_row = 10.0;
};

/// Scale-invariant MSE: ||a* Yhat - Y||^2 / ||Y||^2 with the closed-form
/// complex a* = <Yhat, Y> / <Yhat, Yhat>. Returns 1 when Yhat is all-zero;
/// an all-zero reference Y is a contract violation.
Tensor si_mse(const CTensor& yhat, const CTensor& y);

/// ||Yc - Yref||^2 (complex squared norm, summed).
Tensor conv_loss(const CTensor& yc, const CTensor& yref);

/// Mean squared error over pixels (mean keeps w_rec meaningful across sizes).
Tensor rec_loss(const Tensor& ihat, const Tensor& iref);

/// Concentric disk regions around the kernel center, in physical units:
/// inner r <= 1.5 lambda0, outer r >= 2.5 lambda0; the guard band between
/// them belongs to neither.
struct RegionMasks {
  std::vector<std::int64_t> inner;
  std::vector<std::int64_t> outer;
};
RegionMasks make_regions(int crop, double pixel_pitch_m, double lambda0_m);

/// mean(|k|^2 over outer) / (mean(|k|^2 over inner) + 1e-12).
Tensor contrast_loss(const CTensor& kappa, const RegionMasks& regions);

struct SlrResult {
  Tensor q;         // quantile-amplitude sidelobe ratio
  Tensor integral;  // integrated-energy sidelobe ratio
  Tensor combined;  // mean of the two
};
SlrResult slr_losses(const CTensor& kappa, const RegionMasks& regions, double quantile_q = 0.95);

/// Per-term values of one training step, plus the Table-1 metric quadruple.
struct LossReport {
  double psf = 0, conv = 0, rec = 0, contrast = 0, slr_q = 0, slr_i = 0, slr = 0;
  double ent = 0, row = 0;
  double total = 0;
  double composite() const { return (psf + contrast + slr_q + slr_i) / 4.0; }
};

/// Weighted total on the tape; also fills the numeric report.
Tensor total_loss(const Tensor& psf, const Tensor& conv, const Tensor& rec,
                  const Tensor& contrast, const Tensor& slr, const Tensor& ent,
                  const Tensor& row, const LossWeights& w);

}  // namespace sparray
