// SPDX-License-Identifier: Apache-2.0
#include "sparray/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>

namespace sparray {

namespace {

using nlohmann::json;

void apply_profile(RunConfig& cfg, const std::string& profile) {
  cfg.profile = profile;
  if (profile == "paper") {
    const PaperProfile p = make_paper_profile();
    cfg.probe = p.probe;
    cfg.grid = p.grid;
    cfg.angles = p.angles;
    cfg.k = p.k;
    cfg.epochs = 100;
    cfg.batch_size = 64;
    cfg.n_ista = 8;
  } else if (profile == "desk") {
    const DeskProfile p = make_desk_profile();
    cfg.probe = p.probe;
    cfg.grid = p.grid;
    cfg.angles = p.angles;
    cfg.k = p.k;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.n_ista = 4;
  } else {
    throw ConfigError("unknown profile '" + profile + "' (expected paper or desk)");
  }
  cfg.pulse.fc_hz = cfg.probe.fc_hz;
}

// Pulls cfg.<field> from obj[key] if present, enforcing the known-key set.
template <class T>
void take(const json& obj, std::set<std::string>& seen, const std::string& key, T& out) {
  seen.insert(key);
  if (obj.contains(key)) out = obj[key].get<T>();
}

void check_known(const json& obj, const std::set<std::string>& known, const std::string& scope) {
  for (const auto& [key, _] : obj.items())
    if (!known.count(key))
      throw ConfigError("unknown config key '" + (scope.empty() ? key : scope + "." + key) + "'");
}

}  // namespace

Precision RunConfig::precision_mode() const {
  if (precision == "f32") return Precision::f32;
  if (precision == "f64") return Precision::f64;
  throw ConfigError("precision must be f32 or f64, got '" + precision + "'");
}

RunConfig default_config(const std::string& profile) {
  RunConfig cfg;
  apply_profile(cfg, profile);
  return cfg;
}

RunConfig config_from_json_text(const std::string& text) {
  json root = json::parse(text);
  RunConfig cfg;
  apply_profile(cfg, root.value("profile", "paper"));

  std::set<std::string> top{"profile"};
  const std::set<std::string> sections{"probe", "grid", "angles", "pulse", "loss", "train"};
  for (const auto& s : sections) top.insert(s);

  if (root.contains("probe")) {
    const json& p = root["probe"];
    std::set<std::string> seen;
    take(p, seen, "n_elements", cfg.probe.n_elements);
    take(p, seen, "pitch_m", cfg.probe.pitch_m);
    take(p, seen, "fc_hz", cfg.probe.fc_hz);
    take(p, seen, "c_mps", cfg.probe.c_mps);
    take(p, seen, "fs_hz", cfg.probe.fs_hz);
    check_known(p, seen, "probe");
    cfg.probe.apodization.assign(static_cast<std::size_t>(cfg.probe.n_elements), 1.0);
    cfg.pulse.fc_hz = cfg.probe.fc_hz;
  }
  if (root.contains("grid")) {
    const json& g = root["grid"];
    std::set<std::string> seen;
    take(g, seen, "nx", cfg.grid.nx);
    take(g, seen, "nz", cfg.grid.nz);
    take(g, seen, "crop", cfg.grid.crop);
    check_known(g, seen, "grid");
    if (cfg.grid.crop > std::min(cfg.grid.nx, cfg.grid.nz))
      throw ConfigError("grid.crop exceeds min(grid.nx, grid.nz)");
  }
  if (root.contains("angles")) {
    const json& a = root["angles"];
    std::set<std::string> seen;
    take(a, seen, "count", cfg.angles.count);
    take(a, seen, "span_deg", cfg.angles.span_deg);
    check_known(a, seen, "angles");
  }
  if (root.contains("pulse")) {
    const json& p = root["pulse"];
    std::set<std::string> seen;
    take(p, seen, "frac_bandwidth", cfg.pulse.frac_bandwidth);
    check_known(p, seen, "pulse");
  }
  if (root.contains("loss")) {
    const json& l = root["loss"];
    std::set<std::string> seen;
    take(l, seen, "w_psf", cfg.loss.w_psf);
    take(l, seen, "w_conv", cfg.loss.w_conv);
    take(l, seen, "w_rec", cfg.loss.w_rec);
    take(l, seen, "lambda_contrast", cfg.loss.lambda_contrast);
    take(l, seen, "lambda_slr", cfg.loss.lambda_slr);
    take(l, seen, "lambda_ent", cfg.loss.lambda_ent);
    take(l, seen, "lambda_row", cfg.loss.lambda_row);
    check_known(l, seen, "loss");
  }
  if (root.contains("train")) {
    const json& t = root["train"];
    std::set<std::string> seen;
    take(t, seen, "k", cfg.k);
    take(t, seen, "epochs", cfg.epochs);
    take(t, seen, "batch_size", cfg.batch_size);
    take(t, seen, "n_ista", cfg.n_ista);
    take(t, seen, "seed", cfg.seed);
    take(t, seen, "lr_mask", cfg.lr_mask);
    take(t, seen, "lr_ista", cfg.lr_ista);
    take(t, seen, "lr_head", cfg.lr_head);
    take(t, seen, "tau0", cfg.tau0);
    take(t, seen, "tau_end", cfg.tau_end);
    take(t, seen, "t_warm", cfg.t_warm);
    take(t, seen, "mask_init_std", cfg.mask_init_std);
    take(t, seen, "grad_clip", cfg.grad_clip);
    take(t, seen, "slr_quantile", cfg.slr_quantile);
    take(t, seen, "precision", cfg.precision);
    take(t, seen, "data_path", cfg.data_path);
    take(t, seen, "out_dir", cfg.out_dir);
    check_known(t, seen, "train");
  }
  check_known(root, top, "");
  if (cfg.k > cfg.probe.n_elements)
    throw ConfigError("train.k exceeds probe.n_elements");
  cfg.precision_mode();  // validates the string
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json_text(text);
}

std::string config_to_json_text(const RunConfig& cfg) {
  json root;
  root["profile"] = cfg.profile;
  root["probe"] = {{"n_elements", cfg.probe.n_elements}, {"pitch_m", cfg.probe.pitch_m},
                   {"fc_hz", cfg.probe.fc_hz},           {"c_mps", cfg.probe.c_mps},
                   {"fs_hz", cfg.probe.fs_hz}};
  root["grid"] = {{"nx", cfg.grid.nx}, {"nz", cfg.grid.nz}, {"crop", cfg.grid.crop}};
  root["angles"] = {{"count", cfg.angles.count}, {"span_deg", cfg.angles.span_deg}};
  root["pulse"] = {{"frac_bandwidth", cfg.pulse.frac_bandwidth}};
  root["loss"] = {{"w_psf", cfg.loss.w_psf},
                  {"w_conv", cfg.loss.w_conv},
                  {"w_rec", cfg.loss.w_rec},
                  {"lambda_contrast", cfg.loss.lambda_contrast},
                  {"lambda_slr", cfg.loss.lambda_slr},
                  {"lambda_ent", cfg.loss.lambda_ent},
                  {"lambda_row", cfg.loss.lambda_row}};
  root["train"] = {{"k", cfg.k},
                   {"epochs", cfg.epochs},
                   {"batch_size", cfg.batch_size},
                   {"n_ista", cfg.n_ista},
                   {"seed", cfg.seed},
                   {"lr_mask", cfg.lr_mask},
                   {"lr_ista", cfg.lr_ista},
                   {"lr_head", cfg.lr_head},
                   {"tau0", cfg.tau0},
                   {"tau_end", cfg.tau_end},
                   {"t_warm", cfg.t_warm},
                   {"mask_init_std", cfg.mask_init_std},
                   {"grad_clip", cfg.grad_clip},
                   {"slr_quantile", cfg.slr_quantile},
                   {"precision", cfg.precision},
                   {"data_path", cfg.data_path},
                   {"out_dir", cfg.out_dir}};
  return root.dump(2) + "\n";
}

void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  out << config_to_json_text(cfg);
  if (!out) throw ConfigError("cannot write config '" + path + "'");
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = config_to_json_text(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sparray
