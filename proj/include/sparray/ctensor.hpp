// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sparray/tensor.hpp"

namespace sparray {

/// Complex tensor as a real/imaginary pair; re and im always share shape.
struct CTensor {
  Tensor re;
  Tensor im;

  CTensor() = default;
  CTensor(Tensor re_, Tensor im_);

  static CTensor zeros(std::vector<int> shape, bool requires_grad = false);
  static CTensor from_real(const Tensor& r);

  const std::vector<int>& shape() const { return re.shape(); }
  std::int64_t size() const { return re.size(); }
  bool requires_grad() const { return re.requires_grad() || im.requires_grad(); }
};

CTensor operator+(const CTensor& a, const CTensor& b);
CTensor operator-(const CTensor& a, const CTensor& b);
CTensor cmul(const CTensor& a, const CTensor& b);
CTensor conj(const CTensor& a);
CTensor cscale(const CTensor& a, const Tensor& s);  // real scalar or same-shape factor
CTensor cneg(const CTensor& a);

/// |Z| elementwise; subgradient 0 at the origin.
Tensor cabs(const CTensor& a);

/// Z / (|Z| + eps): unit-magnitude direction, safe at zero.
CTensor cnormalize(const CTensor& a, double eps);

/// Total energy sum(re^2 + im^2).
Tensor csumsq(const CTensor& a);

/// Real part of the inner product <a, b> = sum conj(a) .* b, and its
/// imaginary part. Conjugate-linear in the first argument.
Tensor cinner_re(const CTensor& a, const CTensor& b);
Tensor cinner_im(const CTensor& a, const CTensor& b);

CTensor circshift2(const CTensor& a, int dy, int dx);

/// 2-D DFT pair on a 2-D CTensor. Convention declared once for the whole
/// project: fft2 is unnormalized, ifft2 carries the 1/(H*W) factor. The
/// adjoint of fft2 is the unnormalized inverse transform (N * ifft2) and the
/// adjoint of ifft2 is fft2 / N; both fall out of that single convention.
CTensor fft2(const CTensor& a);
CTensor ifft2(const CTensor& a);

}  // namespace sparray
