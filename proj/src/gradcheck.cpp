// SPDX-License-Identifier: Apache-2.0
#include "sparray/gradcheck.hpp"

#include "sparray/rng.hpp"

#include <algorithm>
#include <cmath>

namespace sparray {

GradCheckReport grad_check(const std::function<Tensor()>& f,
                           const std::vector<std::pair<std::string, Tensor>>& params,
                           double eps, double tol, int samples_per_tensor,
                           std::uint64_t seed) {
  if (eps < 1e-7 || eps > 1e-4)
    throw ContractViolation("grad_check: eps must lie in [1e-7, 1e-4]");
  PrecisionScope ps(Precision::f64);
  GradCheckReport report;

  // Reverse-mode pass.
  std::vector<std::vector<double>> ad_grads;
  {
    for (const auto& [name, p] : params) {
      Tensor t = p;
      t.zero_grad();
    }
    Tape tape;
    Tensor loss;
    {
      Tape::Scope scope(tape);
      loss = f();
      if (!std::isfinite(loss.item())) {
        report.failure = "non-finite loss value";
        return report;
      }
      tape.backward(loss);
    }
    for (const auto& [name, p] : params) {
      Tensor t = p;
      ad_grads.push_back(t.grad_or_zeros());
    }
  }

  Rng rng(seed);
  double global_max = 0.0;
  bool all_finite = true;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const auto& name = params[pi].first;
    Tensor t = params[pi].second;
    const std::int64_t n = t.size();

    std::vector<std::int64_t> coords;
    if (samples_per_tensor < 0 || samples_per_tensor >= n) {
      coords.resize(static_cast<std::size_t>(n));
      for (std::int64_t i = 0; i < n; ++i) coords[static_cast<std::size_t>(i)] = i;
    } else {
      // Seeded sample without replacement (Fisher-Yates prefix).
      std::vector<std::int64_t> pool(static_cast<std::size_t>(n));
      for (std::int64_t i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
      for (int i = 0; i < samples_per_tensor; ++i) {
        const std::size_t j = static_cast<std::size_t>(i) +
                              static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        coords.push_back(pool[static_cast<std::size_t>(i)]);
      }
    }

    GradCheckEntry entry;
    entry.name = name;
    entry.checked = static_cast<int>(coords.size());
    for (std::int64_t ci : coords) {
      const double saved = t[ci];
      t[ci] = saved + eps;
      const double fp = f().item();
      t[ci] = saved - eps;
      const double fm = f().item();
      t[ci] = saved;
      const double fd = (fp - fm) / (2.0 * eps);
      const double ad = ad_grads[pi][static_cast<std::size_t>(ci)];
      if (!std::isfinite(fd) || !std::isfinite(ad)) {
        entry.finite = false;
        all_finite = false;
        if (report.failure.empty())
          report.failure = "non-finite gradient for parameter '" + name + "'";
        continue;
      }
      const double denom = std::max({std::abs(fd), std::abs(ad), 1e-6});
      entry.max_rel_err = std::max(entry.max_rel_err, std::abs(fd - ad) / denom);
    }
    global_max = std::max(global_max, entry.max_rel_err);
    report.entries.push_back(std::move(entry));
  }

  report.max_rel_err = global_max;
  report.pass = all_finite && global_max <= tol;
  return report;
}

}  // namespace sparray
