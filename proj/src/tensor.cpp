// SPDX-License-Identifier: Apache-2.0
#include "sparray/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sparray {

namespace {

Precision g_precision = Precision::f64;
Tape* g_active_tape = nullptr;

void apply_precision(std::vector<double>& v) {
  if (g_precision == Precision::f32) {
    for (double& x : v) x = static_cast<double>(static_cast<float>(x));
  }
}

using MatX = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatX>;
using CMapM = Eigen::Map<const MatX>;

}  // namespace

Precision precision() { return g_precision; }
void set_precision(Precision p) { g_precision = p; }

std::int64_t shape_numel(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << "}";
  return os.str();
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data, bool requires_grad) {
  if (shape_numel(shape) != static_cast<std::int64_t>(data.size()))
    throw ContractViolation("tensor data length " + std::to_string(data.size()) +
                            " does not match shape " + shape_str(shape));
  n_ = std::make_shared<Node>();
  n_->shape = std::move(shape);
  n_->value = std::move(data);
  n_->requires_grad = requires_grad;
  apply_precision(n_->value);
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  std::vector<double> d(static_cast<std::size_t>(shape_numel(shape)), 0.0);
  return Tensor(std::move(shape), std::move(d), requires_grad);
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
  std::vector<double> d(static_cast<std::size_t>(shape_numel(shape)), value);
  return Tensor(std::move(shape), std::move(d), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

double Tensor::item() const {
  if (size() != 1) throw ContractViolation("item() on non-scalar tensor " + shape_str(shape()));
  return n_->value[0];
}

std::vector<double>& Tensor::grad() {
  if (n_->grad.empty()) n_->grad.assign(n_->value.size(), 0.0);
  return n_->grad;
}

const std::vector<double>& Tensor::grad_or_zeros() const {
  if (n_->grad.empty()) n_->grad.assign(n_->value.size(), 0.0);
  return n_->grad;
}

void Tensor::zero_grad() { n_->grad.assign(n_->value.size(), 0.0); }

void Tape::backward(Tensor& loss) {
  if (loss.size() != 1) throw ContractViolation("backward() needs a scalar loss");
  loss.grad()[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
}

Tape* Tape::active() { return g_active_tape; }

Tape::Scope::Scope(Tape& t) : prev_(g_active_tape) { g_active_tape = &t; }
Tape::Scope::~Scope() { g_active_tape = prev_; }

namespace {

bool should_record(bool any_rg) { return any_rg && g_active_tape != nullptr; }

Tensor make_result(std::vector<int> shape, std::vector<double> data, bool rg) {
  return Tensor(std::move(shape), std::move(data), rg);
}

// Shared skeleton for elementwise binary ops with scalar broadcast.
// fwd(a, b) -> value; bwd(a, b, y, g) -> {da, db} contributions per element.
template <class Fwd, class Bwd>
Tensor binary_op(const Tensor& a, const Tensor& b, const char* name, Fwd fwd, Bwd bwd) {
  const bool a_scalar = a.size() == 1;
  const bool b_scalar = b.size() == 1;
  if (!a_scalar && !b_scalar && a.shape() != b.shape())
    throw ContractViolation(std::string(name) + ": shape mismatch " + shape_str(a.shape()) +
                            " vs " + shape_str(b.shape()));
  const Tensor& big = a_scalar ? b : a;
  const std::int64_t n = big.size();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const double av = a_scalar ? a[0] : a[i];
    const double bv = b_scalar ? b[0] : b[i];
    out[static_cast<std::size_t>(i)] = fwd(av, bv);
  }
  const bool rg = a.requires_grad() || b.requires_grad();
  Tensor y = make_result(big.shape(), std::move(out), rg);
  if (should_record(rg)) {
    Tensor ac = a, bc = b, yc = y;
    Tape::active()->record([ac, bc, yc, a_scalar, b_scalar, bwd]() mutable {
      if (!yc.has_grad()) return;
      const auto& g = yc.grad();
      auto* ga = ac.requires_grad() ? &ac.grad() : nullptr;
      auto* gb = bc.requires_grad() ? &bc.grad() : nullptr;
      const std::int64_t n = yc.size();
      for (std::int64_t i = 0; i < n; ++i) {
        const double av = a_scalar ? ac[0] : ac[i];
        const double bv = b_scalar ? bc[0] : bc[i];
        double da = 0.0, db = 0.0;
        bwd(av, bv, yc[i], g[static_cast<std::size_t>(i)], da, db);
        if (ga) (*ga)[a_scalar ? 0 : static_cast<std::size_t>(i)] += da;
        if (gb) (*gb)[b_scalar ? 0 : static_cast<std::size_t>(i)] += db;
      }
    });
  }
  return y;
}

template <class Fwd, class Bwd>
Tensor unary_op(const Tensor& a, Fwd fwd, Bwd bwd) {
  const std::int64_t n = a.size();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fwd(a[i]);
  const bool rg = a.requires_grad();
  Tensor y = make_result(a.shape(), std::move(out), rg);
  if (should_record(rg)) {
    Tensor ac = a, yc = y;
    Tape::active()->record([ac, yc, bwd]() mutable {
      if (!yc.has_grad()) return;
      const auto& g = yc.grad();
      auto& ga = ac.grad();
      const std::int64_t n = yc.size();
      for (std::int64_t i = 0; i < n; ++i)
        ga[static_cast<std::size_t>(i)] += bwd(ac[i], yc[i]) * g[static_cast<std::size_t>(i)];
    });
  }
  return y;
}

}  // namespace

Tensor operator+(const Tensor& a, const Tensor& b) {
  return binary_op(a, b, "add", [](double x, double y) { return x + y; },
                   [](double, double, double, double g, double& da, double& db) {
                     da = g;
                     db = g;
                   });
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  return binary_op(a, b, "sub", [](double x, double y) { return x - y; },
                   [](double, double, double, double g, double& da, double& db) {
                     da = g;
                     db = -g;
                   });
}

Tensor operator*(const Tensor& a, const Tensor& b) {
  return binary_op(a, b, "mul", [](double x, double y) { return x * y; },
                   [](double x, double y, double, double g, double& da, double& db) {
                     da = g * y;
                     db = g * x;
                   });
}

Tensor operator/(const Tensor& a, const Tensor& b) {
  return binary_op(a, b, "div", [](double x, double y) { return x / y; },
                   [](double x, double y, double, double g, double& da, double& db) {
                     da = g / y;
                     db = -g * x / (y * y);
                   });
}

Tensor operator+(const Tensor& a, double c) { return a + Tensor::scalar(c); }
Tensor operator+(double c, const Tensor& a) { return a + c; }
Tensor operator-(const Tensor& a, double c) { return a - Tensor::scalar(c); }
Tensor operator-(double c, const Tensor& a) { return Tensor::scalar(c) - a; }
Tensor operator*(const Tensor& a, double c) { return a * Tensor::scalar(c); }
Tensor operator*(double c, const Tensor& a) { return a * c; }
Tensor operator/(const Tensor& a, double c) { return a / Tensor::scalar(c); }
Tensor operator/(double c, const Tensor& a) { return Tensor::scalar(c) / a; }
Tensor operator-(const Tensor& a) { return a * -1.0; }

Tensor exp(const Tensor& a) {
  return unary_op(a, [](double x) { return std::exp(x); },
                  [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary_op(a, [](double x) { return std::log(x); },
                  [](double x, double) { return 1.0 / x; });
}

Tensor sqrt(const Tensor& a) {
  return unary_op(a, [](double x) { return std::sqrt(x); },
                  [](double, double y) { return 0.5 / y; });
}

Tensor abs(const Tensor& a) {
  // Subgradient 0 at the kink.
  return unary_op(a, [](double x) { return std::abs(x); },
                  [](double x, double) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Tensor relu(const Tensor& a) {
  return unary_op(a, [](double x) { return x > 0 ? x : 0.0; },
                  [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary_op(a, [slope](double x) { return x > 0 ? x : slope * x; },
                  [slope](double x, double) { return x > 0 ? 1.0 : slope; });
}

Tensor softplus(const Tensor& a) {
  return unary_op(a,
                  [](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); },
                  [](double x, double) { return 1.0 / (1.0 + std::exp(-x)); });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) s += a[i];
  const bool rg = a.requires_grad();
  Tensor y = make_result({1}, {s}, rg);
  if (should_record(rg)) {
    Tensor ac = a, yc = y;
    Tape::active()->record([ac, yc]() mutable {
      if (!yc.has_grad()) return;
      const double g = yc.grad()[0];
      auto& ga = ac.grad();
      for (double& x : ga) x += g;
    });
  }
  return y;
}

Tensor mean(const Tensor& a) { return sum(a) / static_cast<double>(a.size()); }

Tensor sum_dim(const Tensor& a, int dim) {
  if (a.ndim() != 2 || (dim != 0 && dim != 1))
    throw ContractViolation("sum_dim: expects a 2-D tensor and dim in {0,1}");
  const int rows = a.dim(0), cols = a.dim(1);
  const int out_n = dim == 0 ? cols : rows;
  std::vector<double> out(static_cast<std::size_t>(out_n), 0.0);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out[static_cast<std::size_t>(dim == 0 ? c : r)] += a[static_cast<std::int64_t>(r) * cols + c];
  const bool rg = a.requires_grad();
  Tensor y = make_result({out_n}, std::move(out), rg);
  if (should_record(rg)) {
    Tensor ac = a, yc = y;
    Tape::active()->record([ac, yc, rows, cols, dim]() mutable {
      if (!yc.has_grad()) return;
      const auto& g = yc.grad();
      auto& ga = ac.grad();
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
          ga[static_cast<std::size_t>(r) * cols + c] += g[static_cast<std::size_t>(dim == 0 ? c : r)];
    });
  }
  return y;
}

std::int64_t argmax(const Tensor& a) {
  std::int64_t best = 0;
  for (std::int64_t i = 1; i < a.size(); ++i)
    if (a[i] > a[best]) best = i;
  return best;
}

Tensor max_all(const Tensor& a) {
  const std::int64_t idx = argmax(a);
  const bool rg = a.requires_grad();
  Tensor y = make_result({1}, {a[idx]}, rg);
  if (should_record(rg)) {
    Tensor ac = a, yc = y;
    Tape::active()->record([ac, yc, idx]() mutable {
      if (!yc.has_grad()) return;
      ac.grad()[static_cast<std::size_t>(idx)] += yc.grad()[0];
    });
  }
  return y;
}

Tensor quantile(const Tensor& a, double q) {
  if (q < 0.0 || q > 1.0) throw ContractViolation("quantile: q outside [0,1]");
  const std::int64_t n = a.size();
  if (n == 0) throw ContractViolation("quantile: empty tensor");
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&a](std::int64_t i, std::int64_t j) { return a[i] < a[j]; });
  const double pos = q * static_cast<double>(n - 1);
  const std::int64_t lo = static_cast<std::int64_t>(std::floor(pos));
  const std::int64_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  const std::int64_t ilo = order[static_cast<std::size_t>(lo)];
  const std::int64_t ihi = order[static_cast<std::size_t>(hi)];
  const double v = (1.0 - frac) * a[ilo] + frac * a[ihi];
  const bool rg = a.requires_grad();
  Tensor y = make_result({1}, {v}, rg);
  if (should_record(rg)) {
    Tensor ac = a, yc = y;
    Tape::active()->record([ac, yc, ilo, ihi, frac]() mutable {
      if (!yc.has_grad()) return;
      const double g = yc.grad()[0];
      ac.grad()[static_cast<std::size_t>(ilo)] += (1.0 - frac) * g;
      if (frac > 0.0) ac.grad()[static_cast<std::size_t>(ihi)] += frac * g;
    });
  }
  return y;
}

Tensor reshape(const Tensor& a, std::vector<int> shape) {
  if (shape_numel(shape) != a.size())
    throw ContractViolation("reshape: numel mismatch " + shape_str(a.shape()) + " -> " +
                            shape_str(shape));
  const bool rg = a.requires_grad();
  Tensor y = make_result(std::move(shape), a.data(), rg);
  if (should_record(rg)) {
    Tensor ac = a, yc = y;
    Tape::active()->record([ac, yc]() mutable {
      if (!yc.has_grad()) return;
      const auto& g = yc.grad();
      auto& ga = ac.grad();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
    });
  }
  return y;
}

Tensor gather(const Tensor& a, const std::vector<std::int64_t>& idx) {
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= a.size()) throw ContractViolation("gather: index out of range");
    out[i] = a[idx[i]];
  }
  const bool rg = a.requires_grad();
  Tensor y = make_result({static_cast<int>(idx.size())}, std::move(out), rg);
  if (should_record(rg)) {
    Tensor ac = a, yc = y;
    std::vector<std::int64_t> ic = idx;
    Tape::active()->record([ac, yc, ic]() mutable {
      if (!yc.has_grad()) return;
      const auto& g = yc.grad();
      auto& ga = ac.grad();
      for (std::size_t i = 0; i < ic.size(); ++i)
        ga[static_cast<std::size_t>(ic[i])] += g[i];
    });
  }
  return y;
}

Tensor concat0(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractViolation("concat0: no parts");
  const auto base = parts[0].shape();
  std::vector<double> out;
  bool rg = false;
  for (const Tensor& p : parts) {
    if (p.shape() != base)
      throw ContractViolation("concat0: shape mismatch " + shape_str(p.shape()));
    out.insert(out.end(), p.data().begin(), p.data().end());
    rg = rg || p.requires_grad();
  }
  std::vector<int> shape;
  shape.push_back(static_cast<int>(parts.size()));
  shape.insert(shape.end(), base.begin(), base.end());
  Tensor y = make_result(std::move(shape), std::move(out), rg);
  if (should_record(rg)) {
    std::vector<Tensor> pc = parts;
    Tensor yc = y;
    Tape::active()->record([pc, yc]() mutable {
      if (!yc.has_grad()) return;
      const auto& g = yc.grad();
      std::size_t off = 0;
      for (Tensor& p : pc) {
        const std::size_t n = p.data().size();
        if (p.requires_grad()) {
          auto& gp = p.grad();
          for (std::size_t i = 0; i < n; ++i) gp[i] += g[off + i];
        }
        off += n;
      }
    });
  }
  return y;
}

Tensor circshift2(const Tensor& a, int dy, int dx) {
  if (a.ndim() != 2) throw ContractViolation("circshift2: expects a 2-D tensor");
  const int h = a.dim(0), w = a.dim(1);
  auto wrap = [](int v, int n) { return ((v % n) + n) % n; };
  std::vector<std::int64_t> idx(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      idx[static_cast<std::size_t>(y) * w + x] =
          static_cast<std::int64_t>(wrap(y - dy, h)) * w + wrap(x - dx, w);
  return reshape(gather(reshape(a, {h * w}), idx), {h, w});
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0))
    throw ContractViolation("matmul: bad shapes " + shape_str(a.shape()) + " x " +
                            shape_str(b.shape()));
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(static_cast<std::size_t>(m) * n);
  {
    CMapM ma(a.data().data(), m, k);
    CMapM mb(b.data().data(), k, n);
    MapM mo(out.data(), m, n);
    mo.noalias() = ma * mb;
  }
  const bool rg = a.requires_grad() || b.requires_grad();
  Tensor y = make_result({m, n}, std::move(out), rg);
  if (should_record(rg)) {
    Tensor ac = a, bc = b, yc = y;
    Tape::active()->record([ac, bc, yc, m, k, n]() mutable {
      if (!yc.has_grad()) return;
      CMapM mg(yc.grad().data(), m, n);
      if (ac.requires_grad()) {
        CMapM mb(bc.data().data(), k, n);
        MapM ga(ac.grad().data(), m, k);
        ga.noalias() += mg * mb.transpose();
      }
      if (bc.requires_grad()) {
        CMapM ma(ac.data().data(), m, k);
        MapM gb(bc.grad().data(), k, n);
        gb.noalias() += ma.transpose() * mg;
      }
    });
  }
  return y;
}

Tensor softmax(const Tensor& a, int dim, double tau) {
  if (a.ndim() != 2 || (dim != 0 && dim != 1))
    throw ContractViolation("softmax: expects a 2-D tensor and dim in {0,1}");
  if (!(tau > 0.0)) throw ContractViolation("softmax: temperature must be positive");
  const int rows = a.dim(0), cols = a.dim(1);
  std::vector<double> out(static_cast<std::size_t>(rows) * cols);
  const int n_lanes = dim == 0 ? cols : rows;
  const int lane_len = dim == 0 ? rows : cols;
  auto at = [&](int lane, int i) -> std::size_t {
    return dim == 0 ? static_cast<std::size_t>(i) * cols + lane
                    : static_cast<std::size_t>(lane) * cols + i;
  };
  for (int lane = 0; lane < n_lanes; ++lane) {
    double mx = -1e300;
    for (int i = 0; i < lane_len; ++i) mx = std::max(mx, a[static_cast<std::int64_t>(at(lane, i))]);
    double denom = 0.0;
    for (int i = 0; i < lane_len; ++i) {
      const double e = std::exp((a[static_cast<std::int64_t>(at(lane, i))] - mx) / tau);
      out[at(lane, i)] = e;
      denom += e;
    }
    for (int i = 0; i < lane_len; ++i) out[at(lane, i)] /= denom;
  }
  const bool rg = a.requires_grad();
  Tensor y = make_result({rows, cols}, std::move(out), rg);
  if (should_record(rg)) {
    Tensor ac = a, yc = y;
    Tape::active()->record([ac, yc, cols, dim, tau, n_lanes, lane_len]() mutable {
      if (!yc.has_grad()) return;
      auto at = [cols, dim](int lane, int i) -> std::size_t {
        return dim == 0 ? static_cast<std::size_t>(i) * cols + lane
                        : static_cast<std::size_t>(lane) * cols + i;
      };
      const auto& g = yc.grad();
      auto& ga = ac.grad();
      for (int lane = 0; lane < n_lanes; ++lane) {
        double dot = 0.0;
        for (int i = 0; i < lane_len; ++i) dot += yc[static_cast<std::int64_t>(at(lane, i))] * g[at(lane, i)];
        for (int i = 0; i < lane_len; ++i) {
          const double p = yc[static_cast<std::int64_t>(at(lane, i))];
          ga[at(lane, i)] += p * (g[at(lane, i)] - dot) / tau;
        }
      }
    });
  }
  return y;
}

namespace {

// im2col for same-padded k x k convolution: {Ci,H,W} -> (Ci*k*k) x (H*W).
void im2col(const std::vector<double>& in, int ci, int h, int w, int k, MatX& cols) {
  const int pad = k / 2;
  cols.resize(ci * k * k, h * w);
  for (int c = 0; c < ci; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const int row = (c * k + ky) * k + kx;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - pad;
          for (int x = 0; x < w; ++x) {
            const int sx = x + kx - pad;
            double v = 0.0;
            if (sy >= 0 && sy < h && sx >= 0 && sx < w)
              v = in[(static_cast<std::size_t>(c) * h + sy) * w + sx];
            cols(row, y * w + x) = v;
          }
        }
      }
}

// Scatter-add transpose of im2col.
void col2im_add(const MatX& cols, int ci, int h, int w, int k, std::vector<double>& out) {
  const int pad = k / 2;
  for (int c = 0; c < ci; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const int row = (c * k + ky) * k + kx;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h) continue;
          for (int x = 0; x < w; ++x) {
            const int sx = x + kx - pad;
            if (sx < 0 || sx >= w) continue;
            out[(static_cast<std::size_t>(c) * h + sy) * w + sx] += cols(row, y * w + x);
          }
        }
      }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  if (input.ndim() != 3 || weight.ndim() != 4)
    throw ContractViolation("conv2d: input must be {Ci,H,W}, weight {Co,Ci,k,k}");
  const int ci = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int co = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != ci || weight.dim(3) != k || k % 2 == 0)
    throw ContractViolation("conv2d: weight " + shape_str(weight.shape()) +
                            " incompatible with input " + shape_str(input.shape()));
  if (bias.defined() && bias.size() != co)
    throw ContractViolation("conv2d: bias length must equal output channels");

  MatX cols;
  im2col(input.data(), ci, h, w, k, cols);
  std::vector<double> out(static_cast<std::size_t>(co) * h * w);
  {
    CMapM mw(weight.data().data(), co, ci * k * k);
    MapM mo(out.data(), co, h * w);
    mo.noalias() = mw * cols;
  }
  if (bias.defined())
    for (int c = 0; c < co; ++c)
      for (int i = 0; i < h * w; ++i) out[static_cast<std::size_t>(c) * h * w + i] += bias[c];

  const bool rg = input.requires_grad() || weight.requires_grad() ||
                  (bias.defined() && bias.requires_grad());
  Tensor y = make_result({co, h, w}, std::move(out), rg);
  if (should_record(rg)) {
    // cols is recomputed in backward; caching it for deep stacks costs too
    // much memory at 64x64 with 128 channels.
    Tensor ic = input, wc = weight, bc = bias, yc = y;
    Tape::active()->record([ic, wc, bc, yc, ci, h, w, k, co]() mutable {
      if (!yc.has_grad()) return;
      CMapM mg(yc.grad().data(), co, h * w);
      if (wc.requires_grad() || ic.requires_grad()) {
        MatX cols;
        im2col(ic.data(), ci, h, w, k, cols);
        if (wc.requires_grad()) {
          MapM gw(wc.grad().data(), co, ci * k * k);
          gw.noalias() += mg * cols.transpose();
        }
        if (ic.requires_grad()) {
          CMapM mw(wc.data().data(), co, ci * k * k);
          MatX gcols = mw.transpose() * mg;
          col2im_add(gcols, ci, h, w, k, ic.grad());
        }
      }
      if (bc.defined() && bc.requires_grad()) {
        auto& gb = bc.grad();
        for (int c = 0; c < co; ++c) {
          double s = 0.0;
          for (int i = 0; i < h * w; ++i) s += mg(c, i);
          gb[static_cast<std::size_t>(c)] += s;
        }
      }
    });
  }
  return y;
}

Tensor detach(const Tensor& a) {
  return Tensor(a.shape(), a.data(), false);
}

}  // namespace sparray
