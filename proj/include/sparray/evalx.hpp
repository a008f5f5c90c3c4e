// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sparray/losses.hpp"
#include "sparray/probe.hpp"
#include "sparray/psf.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sparray {

/// Every second element: {0, 2, ..., N_e - 2}; only defined for k = N_e/2.
std::vector<int> uniform_mask(int n_elements, int k);

/// Seeded uniform k-subset without replacement (Fisher-Yates prefix).
std::vector<int> random_mask(int n_elements, int k, std::uint64_t seed);

struct EvalPhysics {
  ProbeSpec probe;
  GridSpec grid;
  AngleSet angles;
  PulseModel pulse;
  double slr_quantile = 0.95;
};

struct EvalRow {
  std::string name;
  std::vector<int> elements;
  double l_psf = 0, l_contrast = 0, l_slr_q = 0, l_slr_i = 0;
  double mean() const { return (l_psf + l_contrast + l_slr_q + l_slr_i) / 4.0; }
};

/// Metric quadruple of one hard element set against the full-aperture
/// reference kernel.
EvalRow evaluate_mask(const std::string& name, const std::vector<int>& elements,
                      const EvalPhysics& physics, const PSFKernel& kappa_ref,
                      const RegionMasks& regions);

/// Best (lowest composite mean) of n seeded random masks; candidate i uses
/// seed base_seed + i, ties keep the first. Optionally reports the score.
std::vector<int> best_of_n(int n_elements, int k, int n_tries, std::uint64_t base_seed,
                           const EvalPhysics& physics, const PSFKernel& kappa_ref,
                           const RegionMasks& regions, double* best_score = nullptr);

struct NamedMask {
  std::string name;
  std::vector<int> elements;
};

/// Table-1-style evaluation: rows sorted by composite mean ascending,
/// duplicate names suffixed "#2", "#3", ...
std::vector<EvalRow> evaluate_configs(const std::vector<NamedMask>& configs,
                                      const EvalPhysics& physics);

void write_table1(const std::string& path, const std::vector<EvalRow>& rows);

Tensor hard_weights(const std::vector<int>& elements, int n_elements);

}  // namespace sparray
