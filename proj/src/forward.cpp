// SPDX-License-Identifier: Apache-2.0
#include "sparray/forward.hpp"

#include <algorithm>
#include <cmath>

namespace sparray {

Tensor genscat(const std::vector<std::uint8_t>& image, int h, int w, int n) {
  if (h <= 0 || w <= 0 || image.size() != static_cast<std::size_t>(h) * w)
    throw ContractViolation("genscat: bad image dimensions");
  std::vector<double> img(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) img[i] = static_cast<double>(image[i]);
  return genscat(Tensor({h, w}, std::move(img), false), n);
}

Tensor genscat(const Tensor& image, int n) {
  if (image.ndim() != 2) throw ContractViolation("genscat: expects a 2-D image");
  const int h = image.dim(0), w = image.dim(1);
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  // Bilinear resize with pixel-center alignment.
  for (int y = 0; y < n; ++y) {
    const double sy = (y + 0.5) * h / n - 0.5;
    const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, h - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fy = std::clamp(sy - y0, 0.0, 1.0);
    for (int x = 0; x < n; ++x) {
      const double sx = (x + 0.5) * w / n - 0.5;
      const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, w - 1);
      const int x1 = std::min(x0 + 1, w - 1);
      const double fx = std::clamp(sx - x0, 0.0, 1.0);
      const double v00 = image[static_cast<std::int64_t>(y0) * w + x0];
      const double v01 = image[static_cast<std::int64_t>(y0) * w + x1];
      const double v10 = image[static_cast<std::int64_t>(y1) * w + x0];
      const double v11 = image[static_cast<std::int64_t>(y1) * w + x1];
      out[static_cast<std::size_t>(y) * n + x] =
          (1 - fy) * ((1 - fx) * v00 + fx * v01) + fy * ((1 - fx) * v10 + fx * v11);
    }
  }
  double mx = 0.0;
  for (double v : out) mx = std::max(mx, v);
  if (mx > 0.0)
    for (double& v : out) v /= mx;
  return Tensor({n, n}, std::move(out), false);
}

CTensor kernel_spectrum(const PSFKernel& kernel) {
  const int c = kernel.crop;
  // Peak lives at the matrix center pixel; move it to the corner so a delta
  // kernel becomes the identity operator.
  return fft2(circshift2(kernel.values, -c / 2, -c / 2));
}

CTensor convolve(const PSFKernel& kernel, const Tensor& scatterers) {
  if (scatterers.ndim() != 2 || scatterers.dim(0) != kernel.crop ||
      scatterers.dim(1) != kernel.crop)
    throw ContractViolation("convolve: kernel and scatterer map sizes differ");
  CTensor spectrum = kernel_spectrum(kernel);
  return apply_operator(spectrum, CTensor::from_real(scatterers));
}

CTensor apply_operator(const CTensor& spectrum, const CTensor& x) {
  if (spectrum.shape() != x.shape())
    throw ContractViolation("apply_operator: size mismatch");
  return ifft2(cmul(spectrum, fft2(x)));
}

CTensor apply_adjoint(const CTensor& spectrum, const CTensor& y) {
  if (spectrum.shape() != y.shape())
    throw ContractViolation("apply_adjoint: size mismatch");
  return ifft2(cmul(conj(spectrum), fft2(y)));
}

}  // namespace sparray
