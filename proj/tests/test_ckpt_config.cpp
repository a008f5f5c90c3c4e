// SPDX-License-Identifier: Apache-2.0
#include "sparray/ckpt.hpp"
#include "sparray/config.hpp"
#include "sparray/rng.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace sparray;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("sparray_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<std::pair<std::string, Tensor>> random_params(std::uint64_t seed) {
  Rng rng(seed);
  auto mk = [&](std::vector<int> shape) {
    std::vector<double> v(static_cast<std::size_t>(shape_numel(shape)));
    // values representable in float32 so the round-trip is bitwise
    for (auto& x : v) x = static_cast<double>(static_cast<float>(rng.normal()));
    return Tensor(std::move(shape), std::move(v), true);
  };
  return {{"a", mk({3, 4})}, {"b", mk({7})}, {"c", mk({1})}};
}

}  // namespace

TEST_CASE("checkpoint round-trip restores every value bitwise") {
  TempDir dir;
  auto params = random_params(1);
  save_checkpoint(dir.path.string(), params, "deadbeef");
  auto fresh = random_params(2);
  load_checkpoint(dir.path.string(), fresh);
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::int64_t j = 0; j < params[i].second.size(); ++j)
      CHECK(fresh[i].second[j] == params[i].second[j]);
  CHECK(checkpoint_config_hash(dir.path.string()) == "deadbeef");
}

TEST_CASE("truncated payload names the first bad tensor") {
  TempDir dir;
  auto params = random_params(3);
  save_checkpoint(dir.path.string(), params, "h");
  // cut into tensor "b"
  const auto payload = dir.path / "payload.bin";
  fs::resize_file(payload, 12 * 4 + 5);
  auto fresh = random_params(4);
  CHECK_THROWS_WITH_AS(load_checkpoint(dir.path.string(), fresh), doctest::Contains("'b'"),
                       CheckpointError);
}

TEST_CASE("unknown format version raises a migration error") {
  TempDir dir;
  auto params = random_params(5);
  save_checkpoint(dir.path.string(), params, "h");
  {
    std::ifstream in(dir.path / "manifest.json");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto pos = text.find("\"format_version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 19, "\"format_version\": 9");
    std::ofstream out(dir.path / "manifest.json");
    out << text;
  }
  auto fresh = random_params(6);
  CHECK_THROWS_WITH_AS(load_checkpoint(dir.path.string(), fresh),
                       doctest::Contains("migration"), CheckpointError);
}

TEST_CASE("name and shape mismatches are rejected") {
  TempDir dir;
  auto params = random_params(7);
  save_checkpoint(dir.path.string(), params, "h");
  auto renamed = random_params(7);
  renamed[1].first = "zz";
  CHECK_THROWS_AS(load_checkpoint(dir.path.string(), renamed), CheckpointError);
  auto reshaped = random_params(7);
  reshaped[0].second = Tensor::zeros({4, 3}, true);
  CHECK_THROWS_AS(load_checkpoint(dir.path.string(), reshaped), CheckpointError);
}

TEST_CASE("default configs mirror the profiles") {
  const RunConfig paper = default_config("paper");
  CHECK(paper.probe.n_elements == 64);
  CHECK(paper.k == 32);
  CHECK(paper.epochs == 100);
  CHECK(paper.batch_size == 64);
  CHECK(paper.n_ista == 8);
  CHECK(paper.grid.crop == 128);
  const RunConfig desk = default_config("desk");
  CHECK(desk.probe.n_elements == 32);
  CHECK(desk.k == 16);
  CHECK(desk.epochs == 2);
  CHECK(desk.batch_size == 8);
  CHECK(desk.n_ista == 4);
  CHECK(desk.grid.crop == 64);
  CHECK_THROWS_AS(default_config("phone"), ConfigError);
}

TEST_CASE("json config parsing applies profile first, overrides second") {
  const RunConfig cfg = config_from_json_text(
      R"({"profile": "desk", "train": {"seed": 9, "epochs": 5}, "grid": {"crop": 32}})");
  CHECK(cfg.probe.n_elements == 32);
  CHECK(cfg.seed == 9);
  CHECK(cfg.epochs == 5);
  CHECK(cfg.grid.crop == 32);
  CHECK(cfg.grid.nx == 64);
}

TEST_CASE("unknown config keys are rejected") {
  CHECK_THROWS_WITH_AS(config_from_json_text(R"({"trian": {}})"), doctest::Contains("trian"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json_text(R"({"train": {"sead": 4}})"),
                       doctest::Contains("train.sead"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"profile": "desk", "train": {"k": 99}})"),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"train": {"precision": "f16"}})"), ConfigError);
}

TEST_CASE("config text round-trips and hashes deterministically") {
  RunConfig cfg = default_config("desk");
  cfg.seed = 1234;
  cfg.lr_mask = 3e-4;
  const std::string text = config_to_json_text(cfg);
  const RunConfig back = config_from_json_text(text);
  CHECK(config_to_json_text(back) == text);
  CHECK(config_hash(back) == config_hash(cfg));
  cfg.seed = 1235;
  CHECK(config_hash(back) != config_hash(cfg));
}
