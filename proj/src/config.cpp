#include "evtexture/config.hpp"

#include <functional>
#include <map>

#include <yaml-cpp/yaml.h>

#include "evtexture/checkpoint.hpp"
#include "evtexture/evaluation.hpp"
#include "evtexture/io.hpp"

namespace evtexture {

using nlohmann::json;

namespace {

using Setter = std::function<void(const YAML::Node&)>;

void apply_section(const YAML::Node& node, const std::string& section,
                   const std::map<std::string, Setter>& setters) {
  if (!node) return;
  if (!node.IsMap()) throw InvalidInput("config: '" + section + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const auto it = setters.find(key);
    if (it == setters.end()) throw InvalidInput("config: unknown key '" + section + "." + key + "'");
    try {
      it->second(kv.second);
    } catch (const YAML::Exception& e) {
      throw InvalidInput("config: bad value for '" + section + "." + key + "': " + e.what());
    }
  }
}

template <typename V>
Setter set(V& target) {
  return [&target](const YAML::Node& n) { target = n.as<V>(); };
}

}  // namespace

void ExperimentConfig::validate() const {
  network.validate();
  train.validate();
  simulator.validate();
  if (data.clip_dirs.empty()) {
    if (data.synth_clips < 1) throw InvalidInput("config: data.synth_clips must be >= 1");
    if (data.kinds.empty()) throw InvalidInput("config: data.kinds is empty");
    if (data.frames < train.seq_len) {
      throw InvalidInput("config: data.frames must be >= train.seq_len");
    }
    if (data.height / network.scale < train.crop || data.width / network.scale < train.crop) {
      throw InvalidInput("config: LR clip size is smaller than train.crop");
    }
  }
}

ExperimentConfig parse_experiment_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw InvalidInput(std::string("config: YAML parse error: ") + e.what());
  }
  ExperimentConfig cfg;
  if (!root || root.IsNull()) return cfg;
  if (!root.IsMap()) throw InvalidInput("config: top level must be a mapping");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key != "network" && key != "train" && key != "data" && key != "simulator" &&
        key != "seed") {
      throw InvalidInput("config: unknown section '" + key + "'");
    }
  }

  if (const YAML::Node t = root["train"]; t && t.IsMap() && t["preset"]) {
    const auto preset = t["preset"].as<std::string>();
    if (preset == "full") {
      cfg.train = TrainConfig::full_scale();
      cfg.network = NetworkConfig::full_scale();
    } else if (preset != "desk") {
      throw InvalidInput("config: train.preset must be desk or full");
    }
  }

  NetworkConfig& n = cfg.network;
  std::string updater = to_string(n.updater);
  apply_section(root["network"], "network",
                {{"channels", set(n.channels)},
                 {"scale", set(n.scale)},
                 {"bins", set(n.bins)},
                 {"context_blocks", set(n.context_blocks)},
                 {"updater_blocks", set(n.updater_blocks)},
                 {"fusion_blocks", set(n.fusion_blocks)},
                 {"gru_layers", set(n.gru_layers)},
                 {"use_event_flow", set(n.use_event_flow)},
                 {"flow_levels", set(n.flow_levels)},
                 {"updater", set(updater)},
                 {"iterative", set(n.iterative)},
                 {"residual", set(n.residual)},
                 {"use_motion_branch", set(n.use_motion_branch)},
                 {"use_texture_branch", set(n.use_texture_branch)},
                 {"bidirectional", set(n.bidirectional)}});
  n.updater = updater_from_string(updater);

  TrainConfig& t = cfg.train;
  std::string preset;
  apply_section(root["train"], "train",
                {{"preset", set(preset)},
                 {"lr_main", set(t.lr_main)},
                 {"lr_flow", set(t.lr_flow)},
                 {"flow_freeze_iters", set(t.flow_freeze_iters)},
                 {"total_iters", set(t.total_iters)},
                 {"batch", set(t.batch)},
                 {"crop", set(t.crop)},
                 {"seq_len", set(t.seq_len)},
                 {"charbonnier_eps", set(t.charbonnier_eps)},
                 {"seed", set(t.seed)},
                 {"val_every", set(t.val_every)},
                 {"checkpoint_every", set(t.checkpoint_every)}});
  if (root["seed"]) t.seed = root["seed"].as<std::uint64_t>();

  DataConfig& d = cfg.data;
  std::vector<std::string> kinds;
  std::string val_kind = to_string(d.val_kind);
  apply_section(root["data"], "data",
                {{"clip_dirs", set(d.clip_dirs)},
                 {"synth_clips", set(d.synth_clips)},
                 {"kinds", set(kinds)},
                 {"frames", set(d.frames)},
                 {"height", set(d.height)},
                 {"width", set(d.width)},
                 {"seed", set(d.seed)},
                 {"val_kind", set(val_kind)},
                 {"val_seed", set(d.val_seed)}});
  if (!kinds.empty()) {
    d.kinds.clear();
    for (const auto& k : kinds) d.kinds.push_back(pattern_from_string(k));
  }
  d.val_kind = pattern_from_string(val_kind);

  SimulatorConfig& s = cfg.simulator;
  apply_section(root["simulator"], "simulator",
                {{"contrast_mean", set(s.contrast_mean)},
                 {"contrast_std", set(s.contrast_std)},
                 {"interp_steps", set(s.interp_steps)},
                 {"log_eps", set(s.log_eps)},
                 {"rng_seed", set(s.rng_seed)}});
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  return parse_experiment_yaml(read_text_file(path));
}

json to_json(const ExperimentConfig& cfg) {
  const TrainConfig& t = cfg.train;
  const DataConfig& d = cfg.data;
  const SimulatorConfig& s = cfg.simulator;
  json kinds = json::array();
  for (const PatternKind k : d.kinds) kinds.push_back(to_string(k));
  return {{"network", to_json(cfg.network)},
          {"train",
           {{"lr_main", t.lr_main},
            {"lr_flow", t.lr_flow},
            {"flow_freeze_iters", t.flow_freeze_iters},
            {"total_iters", t.total_iters},
            {"batch", t.batch},
            {"crop", t.crop},
            {"seq_len", t.seq_len},
            {"charbonnier_eps", t.charbonnier_eps},
            {"seed", t.seed},
            {"val_every", t.val_every},
            {"checkpoint_every", t.checkpoint_every}}},
          {"data",
           {{"clip_dirs", d.clip_dirs},
            {"synth_clips", d.synth_clips},
            {"kinds", kinds},
            {"frames", d.frames},
            {"height", d.height},
            {"width", d.width},
            {"seed", d.seed},
            {"val_kind", to_string(d.val_kind)},
            {"val_seed", d.val_seed}}},
          {"simulator",
           {{"contrast_mean", s.contrast_mean},
            {"contrast_std", s.contrast_std},
            {"interp_steps", s.interp_steps},
            {"log_eps", s.log_eps},
            {"rng_seed", s.rng_seed}}}};
}

SynthOptions synth_options(const ExperimentConfig& cfg) {
  SynthOptions o;
  o.frames = cfg.data.frames;
  o.height = cfg.data.height;
  o.width = cfg.data.width;
  o.scale = cfg.network.scale;
  o.bins = cfg.network.bins;
  o.simulator = cfg.simulator;
  return o;
}

std::vector<ClipRecord> training_clips(const ExperimentConfig& cfg) {
  if (cfg.data.clip_dirs.empty()) {
    return synth_corpus(cfg.data.synth_clips, synth_options(cfg), cfg.data.seed, cfg.data.kinds);
  }
  std::vector<ClipRecord> clips;
  for (const auto& dir : cfg.data.clip_dirs) {
    ClipRecord c = ingest_clip_dir(dir);
    if (c.scale != cfg.network.scale || c.lr_voxels.empty() ||
        c.lr_voxels[0].bin_count() != cfg.network.bins) {
      throw InvalidInput("clip " + dir + " does not match the network scale/bins");
    }
    clips.push_back(std::move(c));
  }
  return clips;
}

ClipRecord validation_clip(const ExperimentConfig& cfg) {
  SynthOptions o = synth_options(cfg);
  o.kind = cfg.data.val_kind;
  o.seed = cfg.data.val_seed;
  o.vx = 1.0;
  o.vy = -1.0;
  ClipRecord clip = synth_clip(o);
  clip.name = "validation_" + clip.name;
  return clip;
}

const std::vector<std::string>& ablation_variants() {
  static const std::vector<std::string> names{"evtexture", "model-a", "model-b", "model-c",
                                              "model-d",   "model-e", "model-f", "model-g"};
  return names;
}

NetworkConfig ablation_variant(const std::string& variant, NetworkConfig base) {
  if (variant == "evtexture") {
  } else if (variant == "model-a") {
    base.use_texture_branch = false;
  } else if (variant == "model-b") {
    base.use_motion_branch = false;
    base.use_event_flow = false;
  } else if (variant == "model-c") {
    base.updater = UpdaterKind::kConv;
  } else if (variant == "model-d") {
    base.iterative = false;
  } else if (variant == "model-e") {
    base.residual = false;
  } else if (variant == "model-f") {
    base.bins = 3;
  } else if (variant == "model-g") {
    base.bins = 8;
  } else {
    throw InvalidInput("unknown variant '" + variant + "'");
  }
  base.validate();
  return base;
}

}  // namespace evtexture
