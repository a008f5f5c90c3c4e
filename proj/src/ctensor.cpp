// SPDX-License-Identifier: Apache-2.0
#include "sparray/ctensor.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <tuple>

namespace sparray {

CTensor::CTensor(Tensor re_, Tensor im_) : re(std::move(re_)), im(std::move(im_)) {
  if (re.shape() != im.shape())
    throw ContractViolation("CTensor: re/im shape mismatch " + shape_str(re.shape()) + " vs " +
                            shape_str(im.shape()));
}

CTensor CTensor::zeros(std::vector<int> shape, bool requires_grad) {
  return CTensor(Tensor::zeros(shape, requires_grad), Tensor::zeros(shape, requires_grad));
}

CTensor CTensor::from_real(const Tensor& r) {
  return CTensor(r, Tensor::zeros(r.shape(), false));
}

CTensor operator+(const CTensor& a, const CTensor& b) {
  return CTensor(a.re + b.re, a.im + b.im);
}

CTensor operator-(const CTensor& a, const CTensor& b) {
  return CTensor(a.re - b.re, a.im - b.im);
}

CTensor cmul(const CTensor& a, const CTensor& b) {
  return CTensor(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
}

CTensor conj(const CTensor& a) { return CTensor(a.re, -a.im); }

CTensor cscale(const CTensor& a, const Tensor& s) { return CTensor(a.re * s, a.im * s); }

CTensor cneg(const CTensor& a) { return CTensor(-a.re, -a.im); }

Tensor cabs(const CTensor& a) {
  const std::int64_t n = a.size();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::hypot(a.re[i], a.im[i]);
  const bool rg = a.requires_grad();
  Tensor y(a.shape(), std::move(out), rg);
  if (rg && Tape::active()) {
    CTensor ac = a;
    Tensor yc = y;
    Tape::active()->record([ac, yc]() mutable {
      if (!yc.has_grad()) return;
      const auto& g = yc.grad();
      auto* gre = ac.re.requires_grad() ? &ac.re.grad() : nullptr;
      auto* gim = ac.im.requires_grad() ? &ac.im.grad() : nullptr;
      for (std::int64_t i = 0; i < yc.size(); ++i) {
        const double m = yc[i];
        if (m <= 0.0) continue;  // subgradient 0 at the origin
        const double gi = g[static_cast<std::size_t>(i)] / m;
        if (gre) (*gre)[static_cast<std::size_t>(i)] += gi * ac.re[i];
        if (gim) (*gim)[static_cast<std::size_t>(i)] += gi * ac.im[i];
      }
    });
  }
  return y;
}

CTensor cnormalize(const CTensor& a, double eps) {
  Tensor denom = cabs(a) + eps;
  return CTensor(a.re / denom, a.im / denom);
}

Tensor csumsq(const CTensor& a) { return sum(a.re * a.re) + sum(a.im * a.im); }

Tensor cinner_re(const CTensor& a, const CTensor& b) {
  return sum(a.re * b.re) + sum(a.im * b.im);
}

Tensor cinner_im(const CTensor& a, const CTensor& b) {
  return sum(a.re * b.im) - sum(a.im * b.re);
}

CTensor circshift2(const CTensor& a, int dy, int dx) {
  return CTensor(circshift2(a.re, dy, dx), circshift2(a.im, dy, dx));
}

namespace {

// Plans are cached per (H, W, sign); created with FFTW_ESTIMATE so planning
// is deterministic, and FFTW_UNALIGNED so they can run on any buffer.
fftw_plan plan_for(int h, int w, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  const auto key = std::make_tuple(h, w, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<fftw_complex> buf(static_cast<std::size_t>(h) * w);
  fftw_plan p = fftw_plan_dft_2d(h, w, buf.data(), buf.data(), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, p);
  return p;
}

// In-place raw transform of interleaved data; unnormalized in both
// directions (callers apply 1/N where the convention requires it).
void raw_dft2(int h, int w, std::vector<double>& re, std::vector<double>& im, int sign) {
  const std::size_t n = static_cast<std::size_t>(h) * w;
  std::vector<fftw_complex> buf(n);
  for (std::size_t i = 0; i < n; ++i) {
    buf[i][0] = re[i];
    buf[i][1] = im[i];
  }
  fftw_execute_dft(plan_for(h, w, sign), buf.data(), buf.data());
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = buf[i][0];
    im[i] = buf[i][1];
  }
}

CTensor dft_op(const CTensor& a, bool inverse) {
  if (a.re.ndim() != 2) throw ContractViolation("fft2: expects a 2-D CTensor");
  const int h = a.re.dim(0), w = a.re.dim(1);
  const double n = static_cast<double>(h) * w;
  std::vector<double> re = a.re.data(), im = a.im.data();
  raw_dft2(h, w, re, im, inverse ? FFTW_BACKWARD : FFTW_FORWARD);
  if (inverse)
    for (std::size_t i = 0; i < re.size(); ++i) {
      re[i] /= n;
      im[i] /= n;
    }
  const bool rg = a.requires_grad();
  CTensor y(Tensor({h, w}, std::move(re), rg), Tensor({h, w}, std::move(im), rg));
  if (rg && Tape::active()) {
    CTensor ac = a;
    CTensor yc = y;
    Tape::active()->record([ac, yc, h, w, inverse]() mutable {
      if (!yc.re.has_grad() && !yc.im.has_grad()) return;
      const double n = static_cast<double>(h) * w;
      std::vector<double> gre = yc.re.grad_or_zeros();
      std::vector<double> gim = yc.im.grad_or_zeros();
      // Adjoint of the unnormalized forward DFT is the unnormalized inverse
      // DFT; the 1/N of ifft2 turns its adjoint into fft2 / N.
      raw_dft2(h, w, gre, gim, inverse ? FFTW_FORWARD : FFTW_BACKWARD);
      const double scale = inverse ? 1.0 / n : 1.0;
      if (ac.re.requires_grad()) {
        auto& g = ac.re.grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * gre[i];
      }
      if (ac.im.requires_grad()) {
        auto& g = ac.im.grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * gim[i];
      }
    });
  }
  return y;
}

}  // namespace

CTensor fft2(const CTensor& a) { return dft_op(a, false); }
CTensor ifft2(const CTensor& a) { return dft_op(a, true); }

}  // namespace sparray
