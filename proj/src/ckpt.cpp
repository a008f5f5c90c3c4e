// SPDX-License-Identifier: Apache-2.0
#include "sparray/ckpt.hpp"

#include <json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>

namespace sparray {

namespace {

using nlohmann::json;

std::vector<std::uint8_t> f32_le_bytes(const std::vector<double>& values) {
  std::vector<std::uint8_t> out(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float f = static_cast<float>(values[i]);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    out[i * 4 + 0] = static_cast<std::uint8_t>(bits);
    out[i * 4 + 1] = static_cast<std::uint8_t>(bits >> 8);
    out[i * 4 + 2] = static_cast<std::uint8_t>(bits >> 16);
    out[i * 4 + 3] = static_cast<std::uint8_t>(bits >> 24);
  }
  return out;
}

double f32_from_le(const std::uint8_t* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  float f;
  std::memcpy(&f, &bits, 4);
  return static_cast<double>(f);
}

json read_manifest(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw CheckpointError("checkpoint manifest not found in '" + dir + "'");
  json m;
  in >> m;
  if (!m.contains("format_version") || !m["format_version"].is_number_integer())
    throw CheckpointError("manifest missing format_version");
  const int version = m["format_version"].get<int>();
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint format version " + std::to_string(version) +
                          " requires migration (supported: " +
                          std::to_string(kCheckpointVersion) + ")");
  return m;
}

}  // namespace

void save_checkpoint(const std::string& dir,
                     const std::vector<std::pair<std::string, Tensor>>& params,
                     const std::string& config_hash) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["format_version"] = kCheckpointVersion;
  manifest["config_hash"] = config_hash;
  json tensors = json::array();
  std::ofstream payload(dir + "/payload.bin", std::ios::binary);
  std::size_t offset = 0;
  for (const auto& [name, t] : params) {
    json entry;
    entry["name"] = name;
    entry["shape"] = t.shape();
    entry["offset"] = offset;
    tensors.push_back(entry);
    const auto bytes = f32_le_bytes(t.data());
    payload.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    offset += bytes.size();
  }
  manifest["tensors"] = tensors;
  if (!payload) throw CheckpointError("cannot write payload in '" + dir + "'");
  std::ofstream mf(dir + "/manifest.json");
  mf << manifest.dump(2) << "\n";
  if (!mf) throw CheckpointError("cannot write manifest in '" + dir + "'");
}

void load_checkpoint(const std::string& dir,
                     std::vector<std::pair<std::string, Tensor>>& params) {
  const json manifest = read_manifest(dir);
  std::ifstream in(dir + "/payload.bin", std::ios::binary);
  if (!in) throw CheckpointError("checkpoint payload not found in '" + dir + "'");
  std::vector<std::uint8_t> payload((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

  const auto& tensors = manifest["tensors"];
  if (tensors.size() != params.size())
    throw CheckpointError("manifest lists " + std::to_string(tensors.size()) +
                          " tensors, expected " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& entry = tensors[i];
    auto& [name, t] = params[i];
    if (entry["name"].get<std::string>() != name)
      throw CheckpointError("manifest tensor '" + entry["name"].get<std::string>() +
                            "' does not match expected '" + name + "'");
    const auto shape = entry["shape"].get<std::vector<int>>();
    if (shape != t.shape())
      throw CheckpointError("shape mismatch for tensor '" + name + "'");
    const std::size_t offset = entry["offset"].get<std::size_t>();
    const std::size_t need = offset + static_cast<std::size_t>(t.size()) * 4;
    if (payload.size() < need)
      throw CheckpointError("payload integrity error: tensor '" + name +
                            "' extends past end of payload");
    for (std::int64_t j = 0; j < t.size(); ++j)
      t[j] = f32_from_le(payload.data() + offset + static_cast<std::size_t>(j) * 4);
  }
}

std::string checkpoint_config_hash(const std::string& dir) {
  return read_manifest(dir).value("config_hash", "");
}

}  // namespace sparray
