// SPDX-License-Identifier: Apache-2.0
#include "sparray/evalx.hpp"

#include "sparray/image_io.hpp"
#include "sparray/rng.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace sparray {

std::vector<int> uniform_mask(int n_elements, int k) {
  if (k * 2 != n_elements)
    throw ContractViolation("uniform_mask: only defined for k = N_e/2");
  std::vector<int> out;
  for (int i = 0; i < n_elements; i += 2) out.push_back(i);
  return out;
}

std::vector<int> random_mask(int n_elements, int k, std::uint64_t seed) {
  if (k > n_elements) throw ContractViolation("random_mask: k > N_e");
  std::vector<int> pool(static_cast<std::size_t>(n_elements));
  for (int i = 0; i < n_elements; ++i) pool[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  for (int i = 0; i < k; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) +
                          static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n_elements - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

Tensor hard_weights(const std::vector<int>& elements, int n_elements) {
  std::vector<double> w(static_cast<std::size_t>(n_elements), 0.0);
  for (int e : elements) {
    if (e < 0 || e >= n_elements) throw ContractViolation("hard_weights: element index out of range");
    w[static_cast<std::size_t>(e)] = 1.0;
  }
  return Tensor({n_elements}, std::move(w), false);
}

EvalRow evaluate_mask(const std::string& name, const std::vector<int>& elements,
                      const EvalPhysics& physics, const PSFKernel& kappa_ref,
                      const RegionMasks& regions) {
  Tensor w = hard_weights(elements, physics.probe.n_elements);
  PSFKernel kappa = synth_psf(w, physics.probe, physics.grid, physics.angles, physics.pulse);
  EvalRow row;
  row.name = name;
  row.elements = elements;
  std::sort(row.elements.begin(), row.elements.end());
  row.l_psf = si_mse(kappa.values, kappa_ref.values).item();
  row.l_contrast = contrast_loss(kappa.values, regions).item();
  SlrResult slr = slr_losses(kappa.values, regions, physics.slr_quantile);
  row.l_slr_q = slr.q.item();
  row.l_slr_i = slr.integral.item();
  return row;
}

std::vector<int> best_of_n(int n_elements, int k, int n_tries, std::uint64_t base_seed,
                           const EvalPhysics& physics, const PSFKernel& kappa_ref,
                           const RegionMasks& regions, double* best_score) {
  if (n_tries < 1) throw ContractViolation("best_of_n: need at least one try");
  std::vector<int> best;
  double best_mean = 0.0;
  for (int i = 0; i < n_tries; ++i) {
    const auto candidate = random_mask(n_elements, k, base_seed + static_cast<std::uint64_t>(i));
    const EvalRow row = evaluate_mask("try", candidate, physics, kappa_ref, regions);
    if (best.empty() || row.mean() < best_mean) {
      best = candidate;
      best_mean = row.mean();
    }
  }
  if (best_score) *best_score = best_mean;
  return best;
}

std::vector<EvalRow> evaluate_configs(const std::vector<NamedMask>& configs,
                                      const EvalPhysics& physics) {
  PSFKernel kappa_ref = reference_psf(physics.probe, physics.grid, physics.angles, physics.pulse);
  const RegionMasks regions = make_regions(physics.grid.crop,
                                           physics.grid.pixel_pitch_m(physics.probe),
                                           physics.probe.wavelength_m());
  std::vector<EvalRow> rows;
  std::map<std::string, int> name_count;
  for (const auto& cfg : configs) {
    std::string name = cfg.name;
    const int n = ++name_count[cfg.name];
    if (n > 1) name += "#" + std::to_string(n);
    rows.push_back(evaluate_mask(name, cfg.elements, physics, kappa_ref, regions));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const EvalRow& a, const EvalRow& b) { return a.mean() < b.mean(); });
  return rows;
}

void write_table1(const std::string& path, const std::vector<EvalRow>& rows) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows) {
    std::ostringstream elems;
    for (std::size_t i = 0; i < r.elements.size(); ++i)
      elems << (i ? ";" : "") << r.elements[i];
    out.push_back({r.name, elems.str(), fmt_num(r.l_psf), fmt_num(r.l_contrast),
                   fmt_num(r.l_slr_q), fmt_num(r.l_slr_i), fmt_num(r.mean())});
  }
  write_csv(path, {"name", "elements", "L_PSF", "L_contrast", "L_SLR_q", "L_SLR_i", "mean"}, out);
}

}  // namespace sparray
