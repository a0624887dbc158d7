#include "evtexture/checkpoint.hpp"

#include <cstring>

#include "evtexture/io.hpp"

namespace evtexture {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'E', 'V', 'T', 'C', 'K', 'P', 'T', '1'};

}  // namespace

json to_json(const NetworkConfig& cfg) {
  return {{"channels", cfg.channels},
          {"scale", cfg.scale},
          {"bins", cfg.bins},
          {"context_blocks", cfg.context_blocks},
          {"updater_blocks", cfg.updater_blocks},
          {"fusion_blocks", cfg.fusion_blocks},
          {"gru_layers", cfg.gru_layers},
          {"use_event_flow", cfg.use_event_flow},
          {"flow_levels", cfg.flow_levels},
          {"updater", to_string(cfg.updater)},
          {"iterative", cfg.iterative},
          {"residual", cfg.residual},
          {"use_motion_branch", cfg.use_motion_branch},
          {"use_texture_branch", cfg.use_texture_branch},
          {"bidirectional", cfg.bidirectional}};
}

NetworkConfig network_config_from_json(const json& j) {
  NetworkConfig cfg;
  cfg.channels = j.value("channels", cfg.channels);
  cfg.scale = j.value("scale", cfg.scale);
  cfg.bins = j.value("bins", cfg.bins);
  cfg.context_blocks = j.value("context_blocks", cfg.context_blocks);
  cfg.updater_blocks = j.value("updater_blocks", cfg.updater_blocks);
  cfg.fusion_blocks = j.value("fusion_blocks", cfg.fusion_blocks);
  cfg.gru_layers = j.value("gru_layers", cfg.gru_layers);
  cfg.use_event_flow = j.value("use_event_flow", cfg.use_event_flow);
  cfg.flow_levels = j.value("flow_levels", cfg.flow_levels);
  cfg.updater = updater_from_string(j.value("updater", to_string(cfg.updater)));
  cfg.iterative = j.value("iterative", cfg.iterative);
  cfg.residual = j.value("residual", cfg.residual);
  cfg.use_motion_branch = j.value("use_motion_branch", cfg.use_motion_branch);
  cfg.use_texture_branch = j.value("use_texture_branch", cfg.use_texture_branch);
  cfg.bidirectional = j.value("bidirectional", cfg.bidirectional);
  cfg.validate();
  return cfg;
}

void save_checkpoint(const std::filesystem::path& path, const EvTextureNet<float>& net,
                     const json& extra) {
  const auto& store = net.params();
  json params = json::array();
  std::string blob;
  for (const std::string& name : store.names()) {
    const Tensor<float>& v = store.at(name).value();
    params.push_back({{"name", name},
                      {"shape", {v.channels(), v.height(), v.width()}},
                      {"offset", blob.size()}});
    blob.append(reinterpret_cast<const char*>(v.data()),
                static_cast<std::size_t>(v.size()) * sizeof(float));
  }
  json manifest = {{"format", "evtexture-checkpoint"},
                   {"version", kVersion},
                   {"config", to_json(net.config())},
                   {"dtype", "float32"},
                   {"params", params},
                   {"extra", extra}};
  const std::string header = manifest.dump();
  std::string out(kMagic, sizeof(kMagic));
  const std::uint64_t len = header.size();
  out.append(reinterpret_cast<const char*>(&len), sizeof(len));
  out += header;
  out += blob;
  write_text_file(path, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string buf = read_text_file(path);
  if (buf.size() < sizeof(kMagic) + 8 || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a checkpoint file: " + path.string());
  }
  std::uint64_t len = 0;
  std::memcpy(&len, buf.data() + sizeof(kMagic), sizeof(len));
  const std::size_t body = sizeof(kMagic) + sizeof(len);
  if (buf.size() < body + len) throw IoError("truncated checkpoint: " + path.string());
  Checkpoint ckpt;
  try {
    ckpt.manifest = json::parse(buf.substr(body, len));
    ckpt.config = network_config_from_json(ckpt.manifest.at("config"));
    const std::size_t blob = body + len;
    for (const json& p : ckpt.manifest.at("params")) {
      const auto shape = p.at("shape").get<std::vector<int>>();
      const auto offset = p.at("offset").get<std::size_t>();
      Tensor<float> t(shape.at(0), shape.at(1), shape.at(2));
      const std::size_t bytes = static_cast<std::size_t>(t.size()) * sizeof(float);
      if (blob + offset + bytes > buf.size()) throw IoError("truncated checkpoint: " + path.string());
      std::memcpy(t.data(), buf.data() + blob + offset, bytes);
      ckpt.params.emplace(p.at("name").get<std::string>(), std::move(t));
    }
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint manifest in " + path.string() + ": " + e.what());
  }
  return ckpt;
}

void apply_checkpoint(const Checkpoint& ckpt, EvTextureNet<float>& net) {
  auto& store = net.params();
  if (ckpt.params.size() != store.size()) {
    throw InvalidInput("checkpoint holds " + std::to_string(ckpt.params.size()) +
                       " parameters, model has " + std::to_string(store.size()));
  }
  for (const std::string& name : store.names()) {
    const auto it = ckpt.params.find(name);
    if (it == ckpt.params.end()) throw InvalidInput("checkpoint lacks parameter " + name);
    auto& v = store.at(name);
    require_same_shape(v.value(), it->second, name.c_str());
    v.mutable_value() = it->second;
  }
}

}  // namespace evtexture
