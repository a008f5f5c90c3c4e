// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparray {

/// Numeric mode for op results. f64 is used by gradient checks and oracle
/// tests; f32 rounds every op result through float, emulating single
/// precision for training while keeping one code path.
enum class Precision { f64, f32 };

Precision precision();
void set_precision(Precision p);

/// RAII guard that restores the previous precision mode.
class PrecisionScope {
 public:
  explicit PrecisionScope(Precision p) : prev_(precision()) { set_precision(p); }
  ~PrecisionScope() { set_precision(prev_); }

 private:
  Precision prev_;
};

class ContractViolation : public std::runtime_error {
 public:
  explicit ContractViolation(const std::string& msg) : std::runtime_error(msg) {}
};

/// Dense real tensor with value semantics over a shared node. Exact-shape
/// elementwise ops only, except broadcasting against a 1-element tensor.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<int> shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return n_ != nullptr; }
  const std::vector<int>& shape() const { return n_->shape; }
  std::int64_t size() const { return static_cast<std::int64_t>(n_->value.size()); }
  int dim(int i) const { return n_->shape[static_cast<std::size_t>(i)]; }
  int ndim() const { return static_cast<int>(n_->shape.size()); }

  std::vector<double>& data() { return n_->value; }
  const std::vector<double>& data() const { return n_->value; }
  double operator[](std::int64_t i) const { return n_->value[static_cast<std::size_t>(i)]; }
  double& operator[](std::int64_t i) { return n_->value[static_cast<std::size_t>(i)]; }
  double item() const;

  bool requires_grad() const { return n_->requires_grad; }
  void set_requires_grad(bool rg) { n_->requires_grad = rg; }

  bool has_grad() const { return !n_->grad.empty(); }
  std::vector<double>& grad();  // allocates zeros on first access
  const std::vector<double>& grad_or_zeros() const;
  void zero_grad();

  /// Identity of the underlying storage (aliasing test).
  bool same_node(const Tensor& other) const { return n_ == other.n_; }

 private:
  struct Node {
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Node> n_;

  friend class Tape;
};

/// Ordered record of primitive ops; replaying backward in reverse accumulates
/// gradients into every requires_grad leaf.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::function<void()> backward) { entries_.push_back(std::move(backward)); }
  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

  /// Seeds d(loss)/d(loss) = 1 and replays all closures in reverse order.
  void backward(Tensor& loss);

  static Tape* active();

  class Scope {
   public:
    explicit Scope(Tape& t);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* prev_;
  };

 private:
  std::vector<std::function<void()>> entries_;
};

std::int64_t shape_numel(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

// ---- elementwise binary (exact shape, or one side a 1-element scalar) ----
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(const Tensor& a, const Tensor& b);
Tensor operator/(const Tensor& a, const Tensor& b);
Tensor operator+(const Tensor& a, double c);
Tensor operator+(double c, const Tensor& a);
Tensor operator-(const Tensor& a, double c);
Tensor operator-(double c, const Tensor& a);
Tensor operator*(const Tensor& a, double c);
Tensor operator*(double c, const Tensor& a);
Tensor operator/(const Tensor& a, double c);
Tensor operator/(double c, const Tensor& a);
Tensor operator-(const Tensor& a);

// ---- elementwise unary ----
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor abs(const Tensor& a);
Tensor relu(const Tensor& a);                       // max(x, 0), subgradient 0 at 0
Tensor leaky_relu(const Tensor& a, double slope);   // max(x,0) + slope*min(x,0)
Tensor softplus(const Tensor& a);                   // log(1 + e^x), overflow-safe

// ---- reductions ----
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor sum_dim(const Tensor& a, int dim);  // 2-D only; dim 0 -> cols, dim 1 -> rows
Tensor max_all(const Tensor& a);           // subgradient to first flat argmax
std::int64_t argmax(const Tensor& a);      // non-differentiable, first max wins

/// Linear-interpolation quantile of the flattened tensor; gradient follows
/// the interpolation weights on the two selected order statistics.
Tensor quantile(const Tensor& a, double q);

// ---- structure ----
Tensor reshape(const Tensor& a, std::vector<int> shape);
Tensor gather(const Tensor& a, const std::vector<std::int64_t>& idx);
Tensor concat0(const std::vector<Tensor>& parts);        // stack {H,W} -> {N,H,W}
Tensor circshift2(const Tensor& a, int dy, int dx);      // circular shift of a 2-D tensor
Tensor matmul(const Tensor& a, const Tensor& b);

/// Softmax over one dim of a 2-D tensor, with temperature tau > 0.
Tensor softmax(const Tensor& a, int dim, double tau);

/// 2-D convolution, same padding, odd square kernels. input {Ci,H,W},
/// weight {Co,Ci,k,k}, bias {Co} (optional, pass undefined Tensor to skip).
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias);

/// Detach from the graph: same values, requires_grad = false.
Tensor detach(const Tensor& a);

}  // namespace sparray
