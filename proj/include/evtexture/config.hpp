#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "evtexture/data.hpp"
#include "evtexture/network.hpp"
#include "evtexture/training.hpp"

namespace evtexture {

/// Where training clips come from: clip directories in the write_clip layout
/// when given, otherwise a seeded synthetic corpus. Validation is one held-out
/// synthetic clip.
struct DataConfig {
  std::vector<std::string> clip_dirs;
  int synth_clips = 8;
  std::vector<PatternKind> kinds{PatternKind::kCheckerboard, PatternKind::kPerlin};
  int frames = 7;
  int height = 128;  // HR
  int width = 128;
  std::uint64_t seed = 1;
  PatternKind val_kind = PatternKind::kCheckerboard;
  std::uint64_t val_seed = 977;
};

struct ExperimentConfig {
  NetworkConfig network;
  TrainConfig train;
  DataConfig data;
  SimulatorConfig simulator;

  void validate() const;
};

/// Parses YAML text with optional sections network, train, data and
/// simulator; `train.preset: full` starts from the full-scale schedule.
/// Unknown keys are rejected.
ExperimentConfig parse_experiment_yaml(const std::string& text);
ExperimentConfig load_experiment(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& cfg);

/// Synthetic options shared by every clip of an experiment.
SynthOptions synth_options(const ExperimentConfig& cfg);
std::vector<ClipRecord> training_clips(const ExperimentConfig& cfg);
ClipRecord validation_clip(const ExperimentConfig& cfg);

/// Network settings for a named ablation: evtexture, model-a (motion only),
/// model-b (texture only), model-c (conv updater), model-d (direct UNet),
/// model-e (no residual), model-f (3 iterations), model-g (8 iterations).
NetworkConfig ablation_variant(const std::string& variant, NetworkConfig base);
const std::vector<std::string>& ablation_variants();

}  // namespace evtexture
