// SPDX-License-Identifier: Apache-2.0
#include "sparray/mask.hpp"

#include "sparray/rng.hpp"

#include <cmath>

namespace sparray {

SelectionMask init_mask(int n_elements, int k, std::uint64_t seed, double init_std) {
  if (k > n_elements)
    throw ContractViolation("init_mask: k exceeds the number of elements");
  Rng rng(seed);
  std::vector<double> logits(static_cast<std::size_t>(n_elements) * k);
  for (double& v : logits) v = init_std * rng.normal();
  SelectionMask m;
  m.logits = Tensor({n_elements, k}, std::move(logits), true);
  m.n_elements = n_elements;
  m.k = k;
  return m;
}

Tensor soft_columns(const Tensor& logits, double tau) {
  if (logits.ndim() != 2) throw ContractViolation("soft_columns: logits must be 2-D");
  if (!(tau > 0.0)) throw ContractViolation("soft_columns: temperature must be positive");
  const int ne = logits.dim(0), k = logits.dim(1);
  if (k > ne)
    throw ContractViolation("soft_columns: more columns than selectable rows (k > N_e)");

  std::vector<double> p(static_cast<std::size_t>(ne) * k, 0.0);
  std::vector<char> excluded(static_cast<std::size_t>(ne), 0);
  for (int j = 0; j < k; ++j) {
    double mx = -1e300;
    for (int i = 0; i < ne; ++i)
      if (!excluded[static_cast<std::size_t>(i)])
        mx = std::max(mx, logits[static_cast<std::int64_t>(i) * k + j]);
    double denom = 0.0;
    for (int i = 0; i < ne; ++i) {
      if (excluded[static_cast<std::size_t>(i)]) continue;
      const double e = std::exp((logits[static_cast<std::int64_t>(i) * k + j] - mx) / tau);
      p[static_cast<std::size_t>(i) * k + j] = e;
      denom += e;
    }
    int best = -1;
    for (int i = 0; i < ne; ++i) {
      if (excluded[static_cast<std::size_t>(i)]) continue;
      p[static_cast<std::size_t>(i) * k + j] /= denom;
      if (best < 0 || p[static_cast<std::size_t>(i) * k + j] > p[static_cast<std::size_t>(best) * k + j])
        best = i;
    }
    excluded[static_cast<std::size_t>(best)] = 1;
  }

  const bool rg = logits.requires_grad();
  Tensor y({ne, k}, std::move(p), rg);
  if (rg && Tape::active()) {
    Tensor lc = logits, yc = y;
    Tape::active()->record([lc, yc, ne, k, tau]() mutable {
      if (!yc.has_grad()) return;
      const auto& g = yc.grad();
      auto& gl = lc.grad();
      for (int j = 0; j < k; ++j) {
        double dot = 0.0;
        for (int i = 0; i < ne; ++i)
          dot += yc[static_cast<std::int64_t>(i) * k + j] * g[static_cast<std::size_t>(i) * k + j];
        for (int i = 0; i < ne; ++i) {
          const double pij = yc[static_cast<std::int64_t>(i) * k + j];
          if (pij == 0.0) continue;  // excluded row, no gradient
          gl[static_cast<std::size_t>(i) * k + j] += pij * (g[static_cast<std::size_t>(i) * k + j] - dot) / tau;
        }
      }
    });
  }
  return y;
}

Tensor harden(const Tensor& p_soft) {
  const int ne = p_soft.dim(0), k = p_soft.dim(1);
  std::vector<double> h(static_cast<std::size_t>(ne) * k, 0.0);
  for (int j = 0; j < k; ++j) {
    int best = 0;
    for (int i = 1; i < ne; ++i)
      if (p_soft[static_cast<std::int64_t>(i) * k + j] > p_soft[static_cast<std::int64_t>(best) * k + j])
        best = i;
    h[static_cast<std::size_t>(best) * k + j] = 1.0;
  }
  return Tensor({ne, k}, std::move(h), false);
}

Tensor ste_combine(const Tensor& p_hard, const Tensor& p_soft) {
  if (p_hard.shape() != p_soft.shape())
    throw ContractViolation("ste_combine: shape mismatch");
  const bool rg = p_soft.requires_grad();
  Tensor y(p_hard.shape(), p_hard.data(), rg);
  if (rg && Tape::active()) {
    Tensor sc = p_soft, yc = y;
    Tape::active()->record([sc, yc]() mutable {
      if (!yc.has_grad()) return;
      const auto& g = yc.grad();
      auto& gs = sc.grad();
      for (std::size_t i = 0; i < gs.size(); ++i) gs[i] += g[i];
    });
  }
  return y;
}

Tensor element_weights(const Tensor& p) { return sum_dim(p, 1); }

MaskForward mask_forward(const SelectionMask& mask, double tau) {
  MaskForward fwd;
  fwd.p_soft = soft_columns(mask.logits, tau);
  fwd.p_hard = harden(fwd.p_soft);
  fwd.p_ste = ste_combine(fwd.p_hard, fwd.p_soft);
  fwd.w = element_weights(fwd.p_ste);
  fwd.selected = hard_rows(fwd.p_hard);
  return fwd;
}

Tensor mask_entropy(const Tensor& p_soft) {
  const int k = p_soft.dim(1);
  Tensor plogp = p_soft * log(p_soft + 1e-12);
  return sum(plogp) * (-1.0 / k);
}

Tensor row_diversity(const Tensor& p_soft) {
  Tensor excess = relu(sum_dim(p_soft, 1) - 1.0);
  return sum(excess * excess);
}

std::vector<int> hard_rows(const Tensor& p_hard) {
  const int ne = p_hard.dim(0), k = p_hard.dim(1);
  std::vector<int> rows(static_cast<std::size_t>(k), -1);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < ne; ++i)
      if (p_hard[static_cast<std::int64_t>(i) * k + j] == 1.0) {
        rows[static_cast<std::size_t>(j)] = i;
        break;
      }
  return rows;
}

double temperature(int step, double tau0, double tau_end, int t_warm) {
  if (step < 0) throw ContractViolation("temperature: negative step");
  const double t = static_cast<double>(std::min(step, t_warm));
  return tau_end + 0.5 * (tau0 - tau_end) * (1.0 + std::cos(M_PI * t / t_warm));
}

}  // namespace sparray
