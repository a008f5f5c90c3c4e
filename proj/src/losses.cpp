// SPDX-License-Identifier: Apache-2.0
#include "sparray/losses.hpp"

#include <cmath>

namespace sparray {

Tensor si_mse(const CTensor& yhat, const CTensor& y) {
  if (yhat.shape() != y.shape()) throw ContractViolation("si_mse: shape mismatch");
  Tensor y_energy = csumsq(y);
  if (y_energy.item() <= 0.0)
    throw ContractViolation("si_mse: reference is all-zero");
  Tensor yhat_energy = csumsq(yhat);
  if (yhat_energy.item() <= 0.0) return Tensor::scalar(1.0);
  // a* = <Yhat, Y> / <Yhat, Yhat>; the denominator is real.
  Tensor ar = cinner_re(yhat, y) / yhat_energy;
  Tensor ai = cinner_im(yhat, y) / yhat_energy;
  CTensor scaled(yhat.re * ar - yhat.im * ai, yhat.re * ai + yhat.im * ar);
  return csumsq(scaled - y) / y_energy;
}

Tensor conv_loss(const CTensor& yc, const CTensor& yref) {
  if (yc.shape() != yref.shape()) throw ContractViolation("conv_loss: shape mismatch");
  return csumsq(yc - yref);
}

Tensor rec_loss(const Tensor& ihat, const Tensor& iref) {
  if (ihat.shape() != iref.shape()) throw ContractViolation("rec_loss: shape mismatch");
  Tensor d = ihat - iref;
  return mean(d * d);
}

RegionMasks make_regions(int crop, double pixel_pitch_m, double lambda0_m) {
  RegionMasks m;
  const double r_main = 1.5 * lambda0_m;
  const double r_guard = 2.5 * lambda0_m;
  const int c = crop / 2;
  for (int iz = 0; iz < crop; ++iz)
    for (int ix = 0; ix < crop; ++ix) {
      const double r = pixel_pitch_m * std::hypot(ix - c, iz - c);
      const std::int64_t idx = static_cast<std::int64_t>(iz) * crop + ix;
      if (r <= r_main)
        m.inner.push_back(idx);
      else if (r >= r_guard)
        m.outer.push_back(idx);
    }
  if (m.inner.empty() || m.outer.empty())
    throw ContractViolation("make_regions: empty region (crop too small for lambda0)");
  return m;
}

Tensor contrast_loss(const CTensor& kappa, const RegionMasks& regions) {
  Tensor mag2 = kappa.re * kappa.re + kappa.im * kappa.im;
  Tensor flat = reshape(mag2, {static_cast<int>(mag2.size())});
  Tensor out_mean = mean(gather(flat, regions.outer));
  Tensor in_mean = mean(gather(flat, regions.inner));
  return out_mean / (in_mean + 1e-12);
}

SlrResult slr_losses(const CTensor& kappa, const RegionMasks& regions, double quantile_q) {
  Tensor mag = cabs(kappa);
  Tensor flat = reshape(mag, {static_cast<int>(mag.size())});
  Tensor main_amps = gather(flat, regions.inner);
  Tensor side_amps = gather(flat, regions.outer);
  Tensor a_main = max_all(main_amps);
  if (a_main.item() <= 0.0)
    throw ContractViolation("slr_losses: degenerate kernel, zero main-lobe amplitude");
  Tensor a_side = quantile(side_amps, quantile_q);

  Tensor mag2 = kappa.re * kappa.re + kappa.im * kappa.im;
  Tensor flat2 = reshape(mag2, {static_cast<int>(mag2.size())});
  Tensor e_main = sum(gather(flat2, regions.inner));
  Tensor e_side = sum(gather(flat2, regions.outer));

  SlrResult r;
  r.q = a_side / a_main;
  r.integral = e_side / e_main;
  r.combined = (r.q + r.integral) * 0.5;
  return r;
}

Tensor total_loss(const Tensor& psf, const Tensor& conv, const Tensor& rec,
                  const Tensor& contrast, const Tensor& slr, const Tensor& ent,
                  const Tensor& row, const LossWeights& w) {
  return psf * w.w_psf + conv * w.w_conv + rec * w.w_rec + contrast * w.lambda_contrast +
         slr * w.lambda_slr + ent * w.lambda_ent + row * w.lambda_row;
}

}  // namespace sparray
