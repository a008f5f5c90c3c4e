// SPDX-License-Identifier: Apache-2.0
#include "sparray/ckpt.hpp"
#include "sparray/config.hpp"
#include "sparray/data.hpp"
#include "sparray/evalx.hpp"
#include "sparray/forward.hpp"
#include "sparray/image_io.hpp"
#include "sparray/recon.hpp"
#include "sparray/train.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace sparray;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

RunConfig resolve_config(const std::string& config_path, const std::string& profile,
                         std::uint64_t seed, bool seed_set, const std::string& out,
                         const std::string& data) {
  RunConfig cfg;
  if (!config_path.empty()) {
    if (!fs::exists(config_path)) throw DataError("config file not found: " + config_path);
    cfg = load_config(config_path);
    if (!profile.empty() && profile != cfg.profile)
      throw UsageError("--profile " + profile + " conflicts with config profile '" +
                       cfg.profile + "'");
  } else {
    cfg = default_config(profile.empty() ? "paper" : profile);
  }
  if (seed_set) cfg.seed = seed;
  if (!out.empty()) cfg.out_dir = out;
  if (!data.empty()) cfg.data_path = data;
  return cfg;
}

ImageSet load_data(const RunConfig& cfg) {
  std::string path = cfg.data_path;
  if (path.empty()) {
    if (const char* env = std::getenv("DATA_DIR")) {
      const fs::path candidate = fs::path(env) / "mini.idx";
      if (fs::exists(candidate)) path = candidate.string();
    }
  }
  if (path.empty()) return mini_fixture();
  if (!fs::exists(path)) throw DataError("data file not found: " + path);
  return read_idx_images(path);
}

void write_resolved(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  save_config(cfg, cfg.out_dir + "/resolved_config.json");
}

RunConfig config_near_checkpoint(const std::string& ckpt_dir, const std::string& config_path) {
  if (!config_path.empty()) {
    if (!fs::exists(config_path)) throw DataError("config file not found: " + config_path);
    return load_config(config_path);
  }
  const fs::path sibling = fs::path(ckpt_dir).parent_path() / "resolved_config.json";
  if (!fs::exists(sibling))
    throw DataError("no resolved_config.json next to checkpoint; pass --config");
  return load_config(sibling.string());
}

struct LoadedModel {
  SelectionMask mask;
  IstaParams ista;
  CnnHead head;
};

LoadedModel load_model(const RunConfig& cfg, const std::string& ckpt_dir) {
  if (!fs::exists(ckpt_dir)) throw DataError("checkpoint not found: " + ckpt_dir);
  PSFKernel kappa_ref = reference_psf(cfg.probe, cfg.grid, cfg.angles, cfg.pulse);
  CTensor spec = kernel_spectrum(kappa_ref);
  double l = 0.0;
  for (std::int64_t i = 0; i < spec.size(); ++i)
    l = std::max(l, spec.re[i] * spec.re[i] + spec.im[i] * spec.im[i]);
  LoadedModel m;
  m.mask = init_mask(cfg.probe.n_elements, cfg.k, cfg.seed, cfg.mask_init_std);
  m.ista = init_ista(cfg.n_ista, l > 0.0 ? 1.0 / l : 1.0);
  m.head = init_cnn_head(cfg.seed + 1);
  auto params = named_params(m.mask, m.ista, m.head);
  load_checkpoint(ckpt_dir, params);
  return m;
}

EvalPhysics physics_of(const RunConfig& cfg) {
  return EvalPhysics{cfg.probe, cfg.grid, cfg.angles, cfg.pulse, cfg.slr_quantile};
}

std::vector<int> all_elements(int n) {
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = i;
  return out;
}

std::vector<int> read_mask_csv(const std::string& path) {
  if (!fs::exists(path)) throw DataError("mask file not found: " + path);
  std::ifstream in(path);
  std::vector<int> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line == "element") continue;
    }
    try {
      out.push_back(std::stoi(line));
    } catch (const std::exception&) {
      throw DataError("mask file " + path + ": bad element line '" + line + "'");
    }
  }
  if (out.empty()) throw DataError("mask file " + path + ": no elements");
  return out;
}

void write_profile_csvs(const RunConfig& cfg, const PSFKernel& kappa, const std::string& out_dir) {
  const int c = kappa.crop;
  const int cy = c / 2, cx = c / 2;
  const double p = kappa.pixel_pitch_m;
  double peak = 0.0;
  for (std::int64_t i = 0; i < kappa.values.size(); ++i)
    peak = std::max(peak, std::hypot(kappa.values.re[i], kappa.values.im[i]));
  auto db_of = [&](double a) { return 20.0 * std::log10(std::max(a / peak, 1e-300)); };

  std::vector<std::vector<std::string>> lat, ax;
  for (int ix = 0; ix < c; ++ix) {
    const std::int64_t i = static_cast<std::int64_t>(cy) * c + ix;
    const double a = std::hypot(kappa.values.re[i], kappa.values.im[i]);
    lat.push_back({fmt_num((ix - cx) * p), fmt_num(a), fmt_num(db_of(a))});
  }
  for (int iz = 0; iz < c; ++iz) {
    const std::int64_t i = static_cast<std::int64_t>(iz) * c + cx;
    const double a = std::hypot(kappa.values.re[i], kappa.values.im[i]);
    ax.push_back({fmt_num((iz - cy) * p), fmt_num(a), fmt_num(db_of(a))});
  }
  write_csv(out_dir + "/lateral.csv", {"offset_m", "amplitude", "db"}, lat);
  write_csv(out_dir + "/axial.csv", {"offset_m", "amplitude", "db"}, ax);
  (void)cfg;
}

int cmd_train(const RunConfig& cfg, bool finetune, const std::string& init_ckpt) {
  ImageSet data = load_data(cfg);
  TrainResult result = train_loop(cfg, data, true, finetune, init_ckpt);
  std::cout << "trained " << result.curve.size() << " steps; selected elements:";
  for (int e : result.final_selection) std::cout << " " << e;
  std::cout << "\nartifacts in " << cfg.out_dir << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt_dir, const std::string& config_path,
             const std::string& baselines, const std::string& out_dir) {
  // reject bad baseline tokens before touching config or checkpoint files
  {
    std::stringstream tokens(baselines);
    std::string tok;
    while (std::getline(tokens, tok, ',')) {
      if (tok.empty() || tok == "uniform" || tok == "random" || tok == "full") continue;
      if (tok.rfind("bestof:", 0) == 0) {
        int n = 0;
        try {
          n = std::stoi(tok.substr(7));
        } catch (const std::exception&) {
          throw UsageError("bad baseline token: " + tok);
        }
        if (n < 1) throw UsageError("bestof needs a positive count");
        continue;
      }
      throw UsageError("unknown baseline: " + tok);
    }
  }
  RunConfig cfg = config_near_checkpoint(ckpt_dir, config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  write_resolved(cfg);
  PrecisionScope ps(cfg.precision_mode());

  LoadedModel model = load_model(cfg, ckpt_dir);
  MaskForward mf = mask_forward(model.mask, cfg.tau_end);
  std::vector<NamedMask> configs;
  configs.push_back({"learned", mf.selected});

  std::stringstream tokens(baselines);
  std::string tok;
  while (std::getline(tokens, tok, ',')) {
    if (tok.empty()) continue;
    if (tok == "uniform") {
      configs.push_back({"uniform", uniform_mask(cfg.probe.n_elements, cfg.k)});
    } else if (tok == "random") {
      configs.push_back({"random", random_mask(cfg.probe.n_elements, cfg.k, cfg.seed)});
    } else if (tok == "full") {
      configs.push_back({"full", all_elements(cfg.probe.n_elements)});
    } else if (tok.rfind("bestof:", 0) == 0) {
      int n = 0;
      try {
        n = std::stoi(tok.substr(7));
      } catch (const std::exception&) {
        throw UsageError("bad baseline token: " + tok);
      }
      if (n < 1) throw UsageError("bestof needs a positive count");
      EvalPhysics phys = physics_of(cfg);
      PSFKernel kappa_ref = reference_psf(cfg.probe, cfg.grid, cfg.angles, cfg.pulse);
      RegionMasks regions = make_regions(cfg.grid.crop, cfg.grid.pixel_pitch_m(cfg.probe),
                                         cfg.probe.wavelength_m());
      configs.push_back({"bestof" + std::to_string(n),
                         best_of_n(cfg.probe.n_elements, cfg.k, n, cfg.seed, phys, kappa_ref,
                                   regions)});
    } else {
      throw UsageError("unknown baseline: " + tok);
    }
  }

  std::vector<EvalRow> rows = evaluate_configs(configs, physics_of(cfg));
  write_table1(cfg.out_dir + "/table1.csv", rows);
  for (const auto& r : rows)
    std::cout << r.name << "  mean=" << fmt_num(r.mean()) << "  L_PSF=" << fmt_num(r.l_psf)
              << "\n";
  std::cout << "wrote " << cfg.out_dir << "/table1.csv\n";
  return 0;
}

int cmd_psf(const RunConfig& cfg, const std::string& mask_file, bool full) {
  if (full == !mask_file.empty())
    throw UsageError("pass exactly one of --mask FILE or --full");
  write_resolved(cfg);
  PrecisionScope ps(cfg.precision_mode());
  PSFKernel kappa;
  if (full) {
    kappa = reference_psf(cfg.probe, cfg.grid, cfg.angles, cfg.pulse);
  } else {
    const auto elements = read_mask_csv(mask_file);
    Tensor w = hard_weights(elements, cfg.probe.n_elements);
    kappa = synth_psf(w, cfg.probe, cfg.grid, cfg.angles, cfg.pulse);
  }
  write_png_gray(cfg.out_dir + "/psf_db.png", kappa.crop, kappa.crop, db_render(kappa.values));
  write_profile_csvs(cfg, kappa, cfg.out_dir);
  std::cout << "wrote " << cfg.out_dir << "/psf_db.png (+ lateral.csv, axial.csv)\n";
  return 0;
}

int cmd_gradcheck(const RunConfig& cfg, int items, int samples) {
  write_resolved(cfg);
  ImageSet data = load_data(cfg);
  GradCheckReport report = pipeline_grad_check(cfg, data, items, samples, cfg.seed);
  for (const auto& e : report.entries)
    std::cout << e.name << "  checked=" << e.checked << "  max_rel_err=" << fmt_num(e.max_rel_err)
              << (e.finite ? "" : "  NON-FINITE") << "\n";
  std::cout << "max relative error: " << fmt_num(report.max_rel_err) << "\n";
  if (!report.pass) {
    std::cerr << "gradcheck FAILED"
              << (report.failure.empty() ? "" : (": " + report.failure)) << "\n";
    return kExitNumeric;
  }
  std::cout << "gradcheck passed\n";
  return 0;
}

int cmd_baseline_search(const RunConfig& cfg, int tries) {
  write_resolved(cfg);
  PrecisionScope ps(cfg.precision_mode());
  EvalPhysics phys = physics_of(cfg);
  PSFKernel kappa_ref = reference_psf(cfg.probe, cfg.grid, cfg.angles, cfg.pulse);
  RegionMasks regions =
      make_regions(cfg.grid.crop, cfg.grid.pixel_pitch_m(cfg.probe), cfg.probe.wavelength_m());
  double score = 0.0;
  const auto best = best_of_n(cfg.probe.n_elements, cfg.k, tries, cfg.seed, phys, kappa_ref,
                              regions, &score);
  std::ostringstream elems;
  for (std::size_t i = 0; i < best.size(); ++i) elems << (i ? ";" : "") << best[i];
  write_csv(cfg.out_dir + "/baseline_search.csv", {"tries", "seed", "elements", "mean"},
            {{std::to_string(tries), std::to_string(cfg.seed), elems.str(), fmt_num(score)}});
  std::cout << "best of " << tries << ": mean=" << fmt_num(score) << " elements=" << elems.str()
            << "\n";
  return 0;
}

int cmd_export(const std::string& ckpt_dir, const std::string& config_path,
               const std::string& image_file, int index, const std::string& out_dir) {
  RunConfig cfg = config_near_checkpoint(ckpt_dir, config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  write_resolved(cfg);
  PrecisionScope ps(cfg.precision_mode());

  if (!fs::exists(image_file)) throw DataError("image file not found: " + image_file);
  ImageSet set = read_idx_images(image_file);
  if (index < 0 || static_cast<std::size_t>(index) >= set.count())
    throw UsageError("--index out of range (file has " + std::to_string(set.count()) +
                     " images)");

  LoadedModel model = load_model(cfg, ckpt_dir);
  MaskForward mf = mask_forward(model.mask, cfg.tau_end);
  Tensor w = hard_weights(mf.selected, cfg.probe.n_elements);
  PSFKernel kappa = synth_psf(w, cfg.probe, cfg.grid, cfg.angles, cfg.pulse);
  CTensor spectrum = kernel_spectrum(kappa);

  Tensor i_ref = genscat(set.images[static_cast<std::size_t>(index)], set.rows, set.cols,
                         cfg.grid.crop);
  CTensor y_c = apply_operator(spectrum, CTensor::from_real(i_ref));
  CTensor x_hat = ista_unroll(y_c, spectrum, model.ista);
  Tensor i_hat = cnn_head(features(x_hat), model.head);

  const int c = cfg.grid.crop;
  write_png_gray(cfg.out_dir + "/export_iref.png", c, c, linear_render(i_ref));
  write_png_gray(cfg.out_dir + "/export_meas.png", c, c, db_render(y_c));
  write_png_gray(cfg.out_dir + "/export_rec.png", c, c, linear_render(i_hat));
  std::cout << "wrote triptych to " << cfg.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-aperture PSF learning toolkit"};
  app.require_subcommand(1);

  std::string config_path, profile, out, data, mask_file, ckpt_dir, image_file, baselines;
  std::uint64_t seed = 0;
  bool finetune = false, full = false;
  std::string init_ckpt;
  int tries = 20, items = 2, samples = 8, index = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--profile", profile, "Config profile: paper or desk")
        ->check(CLI::IsMember({"paper", "desk"}));
    sub->add_option("--seed", seed, "Override the run seed");
    sub->add_option("--out", out, "Output directory");
  };

  CLI::App* train = app.add_subcommand("train", "Run the training loop");
  add_common(train);
  train->add_option("--data", data, "IDX image file");
  train->add_flag("--finetune-head", finetune, "Freeze mask and ISTA, train the head only");
  train->add_option("--init-checkpoint", init_ckpt, "Warm-start parameters from a checkpoint");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint against baselines");
  eval->add_option("--checkpoint", ckpt_dir, "Checkpoint directory")->required();
  eval->add_option("--config", config_path, "JSON config file");
  eval->add_option("--baselines", baselines, "Comma list: uniform,random,full,bestof:N");
  eval->add_option("--out", out, "Output directory");

  CLI::App* psf = app.add_subcommand("psf", "Render a PSF with profiles");
  add_common(psf);
  psf->add_option("--mask", mask_file, "mask.csv with the active elements");
  psf->add_flag("--full", full, "Full aperture");

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient audit");
  add_common(gradcheck);
  gradcheck->add_option("--data", data, "IDX image file");
  gradcheck->add_option("--items", items, "Images in the audit batch");
  gradcheck->add_option("--samples", samples, "Coordinates sampled per tensor");

  CLI::App* search = app.add_subcommand("baseline-search", "Best random mask of N tries");
  add_common(search);
  search->add_option("--tries", tries, "Number of seeded random masks")->required();

  CLI::App* exp = app.add_subcommand("export", "Reconstruction triptych for one image");
  exp->add_option("--checkpoint", ckpt_dir, "Checkpoint directory")->required();
  exp->add_option("--config", config_path, "JSON config file");
  exp->add_option("--image", image_file, "IDX image file")->required();
  exp->add_option("--index", index, "Image index within the file");
  exp->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const bool seed_set = train->count("--seed") || psf->count("--seed") ||
                        gradcheck->count("--seed") || search->count("--seed");
  try {
    if (train->parsed()) {
      RunConfig cfg = resolve_config(config_path, profile, seed, seed_set, out, data);
      return cmd_train(cfg, finetune, init_ckpt);
    }
    if (eval->parsed())
      return cmd_eval(ckpt_dir, config_path, baselines.empty() ? "uniform,random,full" : baselines,
                      out);
    if (psf->parsed()) {
      RunConfig cfg = resolve_config(config_path, profile, seed, seed_set, out, "");
      return cmd_psf(cfg, mask_file, full);
    }
    if (gradcheck->parsed()) {
      RunConfig cfg = resolve_config(config_path, profile.empty() ? "desk" : profile, seed,
                                     seed_set, out, data);
      return cmd_gradcheck(cfg, items, samples);
    }
    if (search->parsed()) {
      RunConfig cfg = resolve_config(config_path, profile, seed, seed_set, out, "");
      return cmd_baseline_search(cfg, tries);
    }
    if (exp->parsed()) return cmd_export(ckpt_dir, config_path, image_file, index, out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitData;
  } catch (const IdxFormatError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
