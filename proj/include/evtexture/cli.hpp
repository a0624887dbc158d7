#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace evtexture::cli {

enum ExitCode : int { kOk = 0, kValidationError = 1, kIoError = 2 };

/// Provenance record written next to every command's outputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json config = nlohmann::json::object();
  std::string config_hash;  // SHA-256 of config.dump()
  std::uint64_t seed = 0;
  std::string version;
  std::string started_at;   // ISO-8601 UTC
  std::string finished_at;

  nlohmann::json to_json() const;
};

std::string sha256_hex(const std::string& data);

/// Seed resolution: explicit flag, else EVTEXTURE_SEED, else `fallback`.
std::uint64_t resolve_seed(const std::string& flag_value, std::uint64_t fallback);

/// Entry point shared by the tool and the tests. Never throws.
int dispatch(const std::vector<std::string>& args);
int dispatch(int argc, char** argv);

}  // namespace evtexture::cli
