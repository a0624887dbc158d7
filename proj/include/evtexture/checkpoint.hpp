#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"

#include "evtexture/network.hpp"

namespace evtexture {

inline constexpr const char* kVersion = "0.3.0";

nlohmann::json to_json(const NetworkConfig& cfg);
NetworkConfig network_config_from_json(const nlohmann::json& j);

struct Checkpoint {
  NetworkConfig config;
  nlohmann::json manifest;
  std::map<std::string, Tensor<float>> params;
};

/// Layout: "EVTCKPT1", u64 manifest length, JSON manifest, then the float32
/// blobs of every parameter in manifest order. The manifest lists name,
/// shape and byte offset per parameter.
void save_checkpoint(const std::filesystem::path& path, const EvTextureNet<float>& net,
                     const nlohmann::json& extra = nlohmann::json::object());
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies every parameter of the checkpoint into `net`; names and shapes must
/// match exactly.
void apply_checkpoint(const Checkpoint& ckpt, EvTextureNet<float>& net);

}  // namespace evtexture
