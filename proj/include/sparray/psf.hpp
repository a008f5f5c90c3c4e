// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sparray/ctensor.hpp"
#include "sparray/probe.hpp"

#include <cmath>

namespace sparray {

/// Gaussian pulse envelope. sigma_t = sqrt(2 ln 2) / (pi * B_frac * f_c),
/// which puts the -6 dB fractional bandwidth of the modulated pulse at B_frac.
struct PulseModel {
  double fc_hz = 3.5e6;
  double frac_bandwidth = 0.6;  // in (0, 2)

  double sigma_t() const { return pulse_sigma(fc_hz, frac_bandwidth); }
  static double pulse_sigma(double fc_hz, double frac_bandwidth);
};

/// Energy-normalized complex PSF kernel on a crop x crop grid.
struct PSFKernel {
  CTensor values;            // crop x crop, sum |k|^2 == 1
  int crop = 0;
  double pixel_pitch_m = 0;  // grid metadata
  double z0_m = 0;           // centered scatterer depth
};

/// Narrowband plane-wave PSF model: per-angle transmit factor from centered
/// transmit residuals, per-element receive phasors from delay mismatches
/// against the centered scatterer, summed coherently and quadratic in w.
/// Only the crop window around the scatterer pixel is evaluated. The raw
/// kernel is differentiable in w; energy normalization happens on the tape.
CTensor synth_psf_raw(const Tensor& w, const ProbeSpec& probe, const GridSpec& grid,
                      const AngleSet& angles, const PulseModel& pulse);

PSFKernel synth_psf(const Tensor& w, const ProbeSpec& probe, const GridSpec& grid,
                    const AngleSet& angles, const PulseModel& pulse);

/// Full-aperture reference kernel (w = apodization vector), no gradient.
PSFKernel reference_psf(const ProbeSpec& probe, const GridSpec& grid, const AngleSet& angles,
                        const PulseModel& pulse);

class DegenerateApertureError : public ContractViolation {
 public:
  DegenerateApertureError() : ContractViolation("degenerate aperture: kernel energy is zero") {}
};

}  // namespace sparray
