// SPDX-License-Identifier: Apache-2.0
#include "sparray/recon.hpp"

#include "sparray/forward.hpp"
#include "sparray/rng.hpp"

#include <cmath>

namespace sparray {

namespace {

// Inverse of softplus for initialization: raw = log(e^y - 1).
double softplus_inv(double y) {
  if (y > 30.0) return y;
  return std::log(std::expm1(y));
}

std::vector<std::int64_t> single_index(int t) { return {static_cast<std::int64_t>(t)}; }

}  // namespace

Tensor IstaParams::alpha(int t) const { return softplus(gather(raw_alpha, single_index(t))); }
Tensor IstaParams::lambda(int t) const { return softplus(gather(raw_lambda, single_index(t))); }

IstaParams init_ista(int n_layers, double alpha0, double lambda0) {
  IstaParams p;
  p.n_layers = n_layers;
  p.raw_alpha = Tensor::full({n_layers}, softplus_inv(alpha0), true);
  p.raw_lambda = Tensor::full({n_layers}, softplus_inv(lambda0), true);
  return p;
}

CTensor prox(const CTensor& z, const Tensor& lambda, double eps) {
  Tensor mag = cabs(z);
  Tensor shrink = relu(mag - lambda);
  Tensor dir = 1.0 / (mag + eps);
  return CTensor(z.re * dir * shrink, z.im * dir * shrink);
}

CTensor ista_unroll(const CTensor& measurement, const CTensor& spectrum,
                    const IstaParams& params) {
  CTensor x = CTensor::zeros(measurement.shape(), false);
  for (int t = 0; t < params.n_layers; ++t) {
    CTensor residual = apply_operator(spectrum, x) - measurement;
    CTensor grad_step = apply_adjoint(spectrum, residual);
    Tensor alpha = params.alpha(t);
    CTensor z = x - cscale(grad_step, alpha);
    x = prox(z, params.lambda(t));
    for (std::int64_t i = 0; i < x.size(); ++i)
      if (!std::isfinite(x.re[i]) || !std::isfinite(x.im[i])) throw DivergenceError(t);
  }
  return x;
}

Tensor features(const CTensor& x, double eps) {
  Tensor mag = cabs(x);
  Tensor inv = 1.0 / (mag + eps);
  return concat0({x.re, x.im, mag, x.re * inv, x.im * inv});
}

std::vector<std::pair<std::string, Tensor>> CnnHead::params() {
  return {{"cnn.w1", w1},       {"cnn.b1", b1},       {"cnn.w2", w2},     {"cnn.b2", b2},
          {"cnn.w3", w3},       {"cnn.b3", b3},       {"cnn.w4", w4},     {"cnn.b4", b4},
          {"cnn.wproj", wproj}, {"cnn.bproj", bproj}, {"cnn.w5", w5},     {"cnn.b5", b5},
          {"cnn.whead", whead}, {"cnn.bhead", bhead}, {"cnn.wbase", wbase},
          {"cnn.bbase", bbase}, {"cnn.eta", eta}};
}

namespace {

Tensor he_conv(Rng& rng, int co, int ci, int k) {
  // He-style scaled normal for LeakyReLU stacks.
  const double std = std::sqrt(2.0 / (ci * k * k));
  std::vector<double> w(static_cast<std::size_t>(co) * ci * k * k);
  for (double& v : w) v = std * rng.normal();
  return Tensor({co, ci, k, k}, std::move(w), true);
}

}  // namespace

CnnHead init_cnn_head(std::uint64_t seed, double eta0) {
  Rng rng(seed);
  CnnHead h;
  h.w1 = he_conv(rng, 32, 5, 3);
  h.b1 = Tensor::full({32}, 0.01, true);
  h.w2 = he_conv(rng, 64, 32, 3);
  h.b2 = Tensor::full({64}, 0.01, true);
  h.w3 = he_conv(rng, 128, 64, 3);
  h.b3 = Tensor::full({128}, 0.01, true);
  h.w4 = he_conv(rng, 64, 128, 3);
  h.b4 = Tensor::full({64}, 0.01, true);
  h.wproj = he_conv(rng, 64, 128, 1);
  h.bproj = Tensor::full({64}, 0.01, true);
  h.w5 = he_conv(rng, 32, 64, 3);
  h.b5 = Tensor::full({32}, 0.01, true);
  h.whead = he_conv(rng, 1, 32, 3);
  h.bhead = Tensor::full({1}, 0.01, true);
  h.wbase = he_conv(rng, 1, 5, 1);
  h.bbase = Tensor::full({1}, 0.01, true);
  h.eta = Tensor::scalar(eta0, true);
  return h;
}

Tensor cnn_head(const Tensor& feat, const CnnHead& head) {
  if (feat.ndim() != 3 || feat.dim(0) != 5)
    throw ContractViolation("cnn_head: expects a {5,H,W} feature stack");
  const int hh = feat.dim(1), ww = feat.dim(2);
  Tensor x1 = leaky_relu(conv2d(feat, head.w1, head.b1), head.slope);
  Tensor x2 = leaky_relu(conv2d(x1, head.w2, head.b2), head.slope);
  Tensor x3 = leaky_relu(conv2d(x2, head.w3, head.b3), head.slope);
  Tensor x4 = leaky_relu(conv2d(x3, head.w4, head.b4), head.slope);
  Tensor fused = x4 + x2 + conv2d(x3, head.wproj, head.bproj);
  Tensor x5 = leaky_relu(conv2d(fused, head.w5, head.b5), head.slope);
  Tensor r = conv2d(x5 + x1, head.whead, head.bhead);
  Tensor b = conv2d(feat, head.wbase, head.bbase);
  Tensor out = b + r * head.eta;
  return reshape(out, {hh, ww});
}

}  // namespace sparray
