#include "run_config.hpp"

#include <json.hpp>
#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "pwcc/error.hpp"

namespace pwcc::cli {

using nlohmann::json;

Preset parse_preset(std::string_view name) {
  if (name == "pwcc_v1") return Preset::kPwccV1;
  if (name == "pwcc_v2") return Preset::kPwccV2;
  if (name == "custom") return Preset::kCustom;
  throw ConfigError("unknown preset '" + std::string(name) +
                    "' (expected pwcc_v1, pwcc_v2 or custom)");
}

std::string_view to_string(Preset preset) {
  switch (preset) {
    case Preset::kPwccV1: return "pwcc_v1";
    case Preset::kPwccV2: return "pwcc_v2";
    case Preset::kCustom: return "custom";
  }
  return "custom";
}

RangeMode parse_range_mode(std::string_view name) {
  if (name == "joint") return RangeMode::kJoint;
  if (name == "per-channel") return RangeMode::kPerChannel;
  throw ConfigError("unknown filter mode '" + std::string(name) +
                    "' (expected joint or per-channel)");
}

std::string_view to_string(RangeMode mode) {
  return mode == RangeMode::kJoint ? "joint" : "per-channel";
}

RunConfig expand_preset(Preset preset) {
  RunConfig cfg;
  cfg.preset = preset;
  cfg.train = preset == Preset::kPwccV2 ? preset_pwcc_v2() : preset_pwcc_v1();
  cfg.filter_enabled = true;
  return cfg;
}

namespace {

void check_keys(const json& obj, const std::string& section, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("config: '" + section + "' must be a table");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("config: unknown key '" + key + "' in " +
                        (section.empty() ? std::string("top level") : "[" + section + "]"));
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& section) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: [" + section + "] " + key + " has the wrong type");
  }
}

void read_synth(const json& s, SynthConfig& cfg, const std::filesystem::path& base_path) {
  check_keys(s, "synth",
             {"count", "width", "height", "base_dir", "illum_min", "illum_max", "alpha_kinds",
              "split_ratios", "seed"});
  read(s, "count", cfg.count, "synth");
  read(s, "width", cfg.width, "synth");
  read(s, "height", cfg.height, "synth");
  read(s, "illum_min", cfg.illum_min, "synth");
  read(s, "illum_max", cfg.illum_max, "synth");
  read(s, "seed", cfg.seed, "synth");
  if (s.contains("base_dir")) {
    std::string dir;
    read(s, "base_dir", dir, "synth");
    std::filesystem::path p(dir);
    cfg.base_dir = p.is_absolute() ? p : base_path / p;
  }
  if (s.contains("alpha_kinds")) {
    std::vector<std::string> names;
    read(s, "alpha_kinds", names, "synth");
    cfg.alpha_kinds.clear();
    for (const auto& n : names) cfg.alpha_kinds.push_back(parse_alpha_family(n));
  }
  if (s.contains("split_ratios")) {
    std::vector<double> r;
    read(s, "split_ratios", r, "synth");
    if (r.size() != 3) throw ConfigError("config: [synth] split_ratios needs 3 entries");
    cfg.split_ratios = {r[0], r[1], r[2]};
  }
}

void read_train(const json& t, TrainConfig& cfg, bool pinned) {
  check_keys(t, "train",
             {"epochs", "batch_size", "lr", "lambda_tv", "label_smooth", "w_n",
              "decay_start_epoch", "decay_constant", "seed", "input_size", "optimizer",
              "epsilon"});
  if (pinned) {
    for (const char* key : {"lr", "lambda_tv", "label_smooth"}) {
      if (t.contains(key)) {
        throw ConfigError(std::string("config: [train] ") + key +
                          " is fixed by the preset; use preset = \"custom\" to change it");
      }
    }
  }
  read(t, "epochs", cfg.epochs, "train");
  // A short run without an explicit schedule decays from its last epoch.
  if (t.contains("epochs") && !t.contains("decay_start_epoch")) {
    cfg.decay_start_epoch = std::min(cfg.decay_start_epoch, cfg.epochs);
  }
  read(t, "batch_size", cfg.batch_size, "train");
  read(t, "lr", cfg.lr, "train");
  read(t, "lambda_tv", cfg.lambda_tv, "train");
  read(t, "label_smooth", cfg.label_smooth, "train");
  read(t, "w_n", cfg.w_n, "train");
  read(t, "decay_start_epoch", cfg.decay_start_epoch, "train");
  read(t, "decay_constant", cfg.decay_constant, "train");
  read(t, "seed", cfg.seed, "train");
  read(t, "input_size", cfg.input_size, "train");
  read(t, "epsilon", cfg.epsilon, "train");
  if (t.contains("optimizer")) {
    std::string name;
    read(t, "optimizer", name, "train");
    cfg.optimizer = parse_optimizer(name);
  }
}

void read_filter(const json& f, RunConfig& cfg, bool pinned) {
  check_keys(f, "filter", {"enabled", "sigma_s", "sigma_r", "diameter", "mode"});
  if (pinned && f.contains("enabled")) {
    throw ConfigError("config: [filter] enabled is fixed by the preset");
  }
  read(f, "enabled", cfg.filter_enabled, "filter");
  read(f, "sigma_s", cfg.filter.sigma_s, "filter");
  read(f, "sigma_r", cfg.filter.sigma_r, "filter");
  read(f, "diameter", cfg.filter.diameter, "filter");
  if (f.contains("mode")) {
    std::string mode;
    read(f, "mode", mode, "filter");
    cfg.filter.mode = parse_range_mode(mode);
  }
}

RunConfig from_document(const json& doc, const std::filesystem::path& base_path) {
  check_keys(doc, "", {"preset", "synth", "train", "filter"});
  Preset preset = Preset::kPwccV1;
  if (doc.contains("preset")) {
    std::string name;
    read(doc, "preset", name, "");
    preset = parse_preset(name);
  }
  RunConfig cfg = expand_preset(preset);
  const bool pinned = preset != Preset::kCustom;
  if (doc.contains("synth")) read_synth(doc["synth"], cfg.synth, base_path);
  if (doc.contains("train")) read_train(doc["train"], cfg.train, pinned);
  if (doc.contains("filter")) read_filter(doc["filter"], cfg, pinned);
  validate(cfg.synth);
  validate(cfg.train);
  validate(cfg.filter);
  return cfg;
}

json toml_to_json(const toml::node& node) {
  if (const auto* tbl = node.as_table()) {
    json obj = json::object();
    for (const auto& [k, v] : *tbl) obj[std::string(k.str())] = toml_to_json(v);
    return obj;
  }
  if (const auto* arr = node.as_array()) {
    json out = json::array();
    for (const auto& v : *arr) out.push_back(toml_to_json(v));
    return out;
  }
  if (auto v = node.value_exact<std::int64_t>()) return *v;
  if (auto v = node.value_exact<double>()) return *v;
  if (auto v = node.value_exact<bool>()) return *v;
  if (auto v = node.value_exact<std::string>()) return *v;
  throw ConfigError("config: unsupported TOML value type");
}

}  // namespace

RunConfig parse_run_config_json(const std::string& text, const std::filesystem::path& base_path) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return from_document(doc, base_path);
}

RunConfig parse_run_config_toml(const std::string& text, const std::filesystem::path& base_path) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: invalid TOML: " << e.description() << " at line "
        << e.source().begin.line;
    throw ConfigError(msg.str());
  }
  return from_document(toml_to_json(tbl), base_path);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config file not found: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const auto base = path.parent_path();
  const auto ext = path.extension().string();
  if (ext == ".toml") return parse_run_config_toml(buf.str(), base);
  if (ext == ".json") return parse_run_config_json(buf.str(), base);
  throw ConfigError("config file must end in .toml or .json: " + path.string());
}

}  // namespace pwcc::cli
