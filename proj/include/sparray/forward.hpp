// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sparray/ctensor.hpp"
#include "sparray/psf.hpp"

#include <cstdint>
#include <vector>

namespace sparray {

/// Bilinear-resize a grayscale image to n x n and scale to [0, 1] by its max
/// (an all-zero image stays zero). Each pixel is a point scatterer.
Tensor genscat(const std::vector<std::uint8_t>& image, int h, int w, int n);
Tensor genscat(const Tensor& image, int n);

/// Spectrum of the kernel after shifting its center peak to index (0,0);
/// this is the transfer function of the circular-convolution operator A.
CTensor kernel_spectrum(const PSFKernel& kernel);

/// Eq-style measurement: Y = ifft2(fft2(kappa_shifted) .* fft2(I)).
CTensor convolve(const PSFKernel& kernel, const Tensor& scatterers);

/// A and its adjoint as spectral products against a precomputed spectrum.
CTensor apply_operator(const CTensor& spectrum, const CTensor& x);
CTensor apply_adjoint(const CTensor& spectrum, const CTensor& y);

}  // namespace sparray
