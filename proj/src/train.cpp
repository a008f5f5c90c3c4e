// SPDX-License-Identifier: Apache-2.0
#include "sparray/train.hpp"

#include "sparray/ckpt.hpp"
#include "sparray/forward.hpp"
#include "sparray/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

namespace sparray {

void adam_step(std::vector<ParamGroup>& groups, AdamState& state, double grad_clip) {
  // Lazily size the moment slots on first use.
  std::size_t n_params = 0;
  for (const auto& g : groups) n_params += g.params.size();
  if (state.slots.empty()) {
    for (auto& g : groups)
      for (auto& [name, t] : g.params) {
        AdamState::Slot slot;
        slot.m.assign(static_cast<std::size_t>(t.size()), 0.0);
        slot.v.assign(static_cast<std::size_t>(t.size()), 0.0);
        state.slots.push_back(std::move(slot));
      }
  }
  if (state.slots.size() != n_params)
    throw ContractViolation("adam_step: parameter count changed between steps");

  double clip_scale = 1.0;
  if (grad_clip > 0.0) {
    double sq = 0.0;
    for (auto& g : groups)
      for (auto& [name, t] : g.params)
        for (double v : t.grad_or_zeros()) sq += v * v;
    const double norm = std::sqrt(sq);
    if (norm > grad_clip) clip_scale = grad_clip / norm;
  }

  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step);
  std::size_t si = 0;
  for (auto& g : groups) {
    for (auto& [name, t] : g.params) {
      auto& slot = state.slots[si++];
      const auto& grad = t.grad_or_zeros();
      for (std::int64_t i = 0; i < t.size(); ++i) {
        const double gi = grad[static_cast<std::size_t>(i)] * clip_scale;
        if (!std::isfinite(gi)) throw NonFiniteGradient(name);
        auto& m = slot.m[static_cast<std::size_t>(i)];
        auto& v = slot.v[static_cast<std::size_t>(i)];
        m = state.beta1 * m + (1.0 - state.beta1) * gi;
        v = state.beta2 * v + (1.0 - state.beta2) * gi * gi;
        const double mhat = m / bc1;
        const double vhat = v / bc2;
        t[i] -= g.lr * mhat / (std::sqrt(vhat) + state.eps);
      }
    }
  }
}

std::vector<std::pair<std::string, Tensor>> named_params(SelectionMask& mask, IstaParams& ista,
                                                         CnnHead& head) {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("mask.logits", mask.logits);
  out.emplace_back("ista.raw_alpha", ista.raw_alpha);
  out.emplace_back("ista.raw_lambda", ista.raw_lambda);
  for (auto& p : head.params()) out.push_back(p);
  return out;
}

namespace {

double ista_alpha0(const PSFKernel& kappa_ref) {
  // 1/L with L = max |F(kappa_ref)|^2 guarantees a stable first iterate.
  CTensor spec = kernel_spectrum(kappa_ref);
  double l = 0.0;
  for (std::int64_t i = 0; i < spec.size(); ++i)
    l = std::max(l, spec.re[i] * spec.re[i] + spec.im[i] * spec.im[i]);
  return l > 0.0 ? 1.0 / l : 1.0;
}

}  // namespace

TrainResult train_loop(const RunConfig& cfg, const ImageSet& data, bool write_outputs,
                       bool finetune_head, const std::string& init_checkpoint) {
  if (data.count() == 0) throw ContractViolation("train_loop: empty dataset");
  PrecisionScope ps(cfg.precision_mode());

  // kappa_ref is mask-independent; computed once per run.
  PSFKernel kappa_ref = reference_psf(cfg.probe, cfg.grid, cfg.angles, cfg.pulse);
  const RegionMasks regions =
      make_regions(cfg.grid.crop, cfg.grid.pixel_pitch_m(cfg.probe), cfg.probe.wavelength_m());

  TrainResult result;
  result.mask = init_mask(cfg.probe.n_elements, cfg.k, cfg.seed, cfg.mask_init_std);
  result.ista = init_ista(cfg.n_ista, ista_alpha0(kappa_ref));
  result.head = init_cnn_head(cfg.seed + 1);

  std::vector<ParamGroup> groups;
  if (!finetune_head) {
    groups.push_back({"mask", cfg.lr_mask, {{"mask.logits", result.mask.logits}}});
    groups.push_back({"ista", cfg.lr_ista,
                      {{"ista.raw_alpha", result.ista.raw_alpha},
                       {"ista.raw_lambda", result.ista.raw_lambda}}});
  }
  {
    ParamGroup head_group{"head", cfg.lr_head, {}};
    for (auto& p : result.head.params()) head_group.params.push_back(p);
    groups.push_back(std::move(head_group));
  }
  auto all_params = named_params(result.mask, result.ista, result.head);
  if (!init_checkpoint.empty()) load_checkpoint(init_checkpoint, all_params);
  AdamState adam;

  // Scatterer maps are data, not parameters; resize once up front.
  std::vector<Tensor> scatterers;
  scatterers.reserve(data.count());
  for (const auto& img : data.images)
    scatterers.push_back(genscat(img, data.rows, data.cols, cfg.grid.crop));

  int step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = epoch_order(data.count(), cfg.seed + 1000 + static_cast<std::uint64_t>(epoch));
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const double tau = temperature(step, cfg.tau0, cfg.tau_end, cfg.t_warm);

      for (auto& [name, t] : all_params) t.zero_grad();
      Tape tape;
      CurveRow row;
      row.step = step;
      row.tau = tau;
      {
        Tape::Scope scope(tape);
        MaskForward mf = mask_forward(result.mask, tau);
        {
          // Distinctness is a structural guarantee; re-assert it every step.
          std::set<int> distinct(mf.selected.begin(), mf.selected.end());
          row.n_active = static_cast<int>(distinct.size());
          if (row.n_active != cfg.k)
            throw ContractViolation("train_loop: hard selection lost distinctness");
        }
        PSFKernel kappa = synth_psf(mf.w, cfg.probe, cfg.grid, cfg.angles, cfg.pulse);
        CTensor spectrum = kernel_spectrum(kappa);
        CTensor ref_spectrum = kernel_spectrum(kappa_ref);

        // PSF-level terms once per batch; the mask is batch-constant.
        Tensor l_psf = si_mse(kappa.values, kappa_ref.values);
        Tensor l_contrast = contrast_loss(kappa.values, regions);
        SlrResult slr = slr_losses(kappa.values, regions, cfg.slr_quantile);
        Tensor l_ent = mask_entropy(mf.p_soft);
        Tensor l_row = row_diversity(mf.p_soft);

        Tensor l_conv = Tensor::scalar(0.0);
        Tensor l_rec = Tensor::scalar(0.0);
        for (std::size_t bi = start; bi < end; ++bi) {
          const Tensor& scat = scatterers[order[bi]];
          CTensor x_in = CTensor::from_real(scat);
          CTensor y_c = apply_operator(spectrum, x_in);
          CTensor y_ref = apply_operator(ref_spectrum, x_in);
          CTensor x_hat = ista_unroll(y_c, spectrum, result.ista);
          Tensor i_hat = cnn_head(features(x_hat), result.head);
          l_conv = l_conv + conv_loss(y_c, y_ref);
          l_rec = l_rec + rec_loss(i_hat, scat);
        }
        const double inv_batch = 1.0 / static_cast<double>(end - start);
        l_conv = l_conv * inv_batch;
        l_rec = l_rec * inv_batch;

        Tensor total = total_loss(l_psf, l_conv, l_rec, l_contrast, slr.combined, l_ent, l_row,
                                  cfg.loss);
        row.loss.psf = l_psf.item();
        row.loss.conv = l_conv.item();
        row.loss.rec = l_rec.item();
        row.loss.contrast = l_contrast.item();
        row.loss.slr_q = slr.q.item();
        row.loss.slr_i = slr.integral.item();
        row.loss.slr = slr.combined.item();
        row.loss.ent = l_ent.item();
        row.loss.row = l_row.item();
        row.loss.total = total.item();
        if (!std::isfinite(row.loss.total))
          throw std::runtime_error("train_loop: non-finite total loss at step " +
                                   std::to_string(step));
        tape.backward(total);
      }
      adam_step(groups, adam, cfg.grad_clip);
      result.curve.push_back(row);
      ++step;
    }
  }

  // Final hard selection at the end temperature.
  {
    MaskForward mf = mask_forward(result.mask, temperature(step, cfg.tau0, cfg.tau_end, cfg.t_warm));
    result.final_selection = mf.selected;
    std::sort(result.final_selection.begin(), result.final_selection.end());
  }

  if (write_outputs) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    save_config(cfg, cfg.out_dir + "/resolved_config.json");
    write_curve_csv(cfg.out_dir + "/curve.csv", result.curve);
    write_mask_csv(cfg.out_dir + "/mask.csv", result.final_selection);
    // Mask strip: one column per element, selected elements white.
    {
      const int ne = cfg.probe.n_elements, bar_h = 8;
      std::vector<std::uint8_t> strip(static_cast<std::size_t>(ne) * bar_h, 0);
      for (int e : result.final_selection)
        for (int y = 0; y < bar_h; ++y) strip[static_cast<std::size_t>(y) * ne + e] = 255;
      write_png_gray(cfg.out_dir + "/mask.png", ne, bar_h, strip);
    }
    save_checkpoint(cfg.out_dir + "/checkpoint", all_params, config_hash(cfg));
  }
  return result;
}

GradCheckReport pipeline_grad_check(const RunConfig& cfg, const ImageSet& data, int n_items,
                                    int samples_per_tensor, std::uint64_t seed) {
  if (data.count() == 0) throw ContractViolation("pipeline_grad_check: empty dataset");
  PrecisionScope ps(Precision::f64);

  PSFKernel kappa_ref = reference_psf(cfg.probe, cfg.grid, cfg.angles, cfg.pulse);
  const RegionMasks regions =
      make_regions(cfg.grid.crop, cfg.grid.pixel_pitch_m(cfg.probe), cfg.probe.wavelength_m());

  SelectionMask mask = init_mask(cfg.probe.n_elements, cfg.k, cfg.seed, cfg.mask_init_std);
  IstaParams ista = init_ista(cfg.n_ista, ista_alpha0(kappa_ref));
  CnnHead head = init_cnn_head(cfg.seed + 1);
  auto params = named_params(mask, ista, head);

  const std::size_t items = std::min<std::size_t>(data.count(), static_cast<std::size_t>(n_items));
  std::vector<Tensor> scatterers;
  for (std::size_t i = 0; i < items; ++i)
    scatterers.push_back(genscat(data.images[i], data.rows, data.cols, cfg.grid.crop));

  const double tau = 1.5;
  auto f = [&]() {
    Tensor p_soft = soft_columns(mask.logits, tau);
    Tensor w = element_weights(p_soft);
    PSFKernel kappa = synth_psf(w, cfg.probe, cfg.grid, cfg.angles, cfg.pulse);
    CTensor spectrum = kernel_spectrum(kappa);
    CTensor ref_spectrum = kernel_spectrum(kappa_ref);

    Tensor l_psf = si_mse(kappa.values, kappa_ref.values);
    Tensor l_contrast = contrast_loss(kappa.values, regions);
    SlrResult slr = slr_losses(kappa.values, regions, cfg.slr_quantile);
    Tensor l_ent = mask_entropy(p_soft);
    Tensor l_row = row_diversity(p_soft);

    Tensor l_conv = Tensor::scalar(0.0);
    Tensor l_rec = Tensor::scalar(0.0);
    for (const Tensor& scat : scatterers) {
      CTensor x_in = CTensor::from_real(scat);
      CTensor y_c = apply_operator(spectrum, x_in);
      CTensor y_ref = apply_operator(ref_spectrum, x_in);
      CTensor x_hat = ista_unroll(y_c, spectrum, ista);
      Tensor i_hat = cnn_head(features(x_hat), head);
      l_conv = l_conv + conv_loss(y_c, y_ref);
      l_rec = l_rec + rec_loss(i_hat, scat);
    }
    const double inv = 1.0 / static_cast<double>(items);
    LossWeights lw = cfg.loss;
    return total_loss(l_psf, l_conv * inv, l_rec * inv, l_contrast, slr.combined, l_ent, l_row, lw);
  };

  return grad_check(f, params, 1e-6, 1e-4, samples_per_tensor, seed);
}

void write_curve_csv(const std::string& path, const std::vector<CurveRow>& curve) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : curve)
    rows.push_back({std::to_string(r.step), fmt_num(r.tau), std::to_string(r.n_active),
                    fmt_num(r.loss.psf), fmt_num(r.loss.conv), fmt_num(r.loss.rec),
                    fmt_num(r.loss.contrast), fmt_num(r.loss.slr_q), fmt_num(r.loss.slr_i),
                    fmt_num(r.loss.slr), fmt_num(r.loss.ent), fmt_num(r.loss.row),
                    fmt_num(r.loss.total)});
  write_csv(path,
            {"step", "tau", "n_active", "loss_psf", "loss_conv", "loss_rec", "loss_contrast",
             "loss_slr_q", "loss_slr_i", "loss_slr", "loss_ent", "loss_row", "total"},
            rows);
}

void write_mask_csv(const std::string& path, const std::vector<int>& selection) {
  std::vector<std::vector<std::string>> rows;
  for (int e : selection) rows.push_back({std::to_string(e)});
  write_csv(path, {"element"}, rows);
}

}  // namespace sparray
