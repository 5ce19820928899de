#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pwcc/bilateral.hpp"
#include "pwcc/dataset.hpp"
#include "pwcc/train.hpp"

namespace pwcc::cli {

enum class Preset { kPwccV1, kPwccV2, kCustom };

// "pwcc_v1", "pwcc_v2", "custom"; anything else is a ConfigError.
Preset parse_preset(std::string_view name);
std::string_view to_string(Preset preset);

struct RunConfig {
  Preset preset = Preset::kPwccV1;
  SynthConfig synth;
  TrainConfig train = preset_pwcc_v1();
  BilateralConfig filter;
  bool filter_enabled = true;
};

// The preset's training and filtering settings on top of default synth and
// bilateral settings.
RunConfig expand_preset(Preset preset);

// Document layout (TOML tables or JSON objects):
//
//   preset = "pwcc_v1" | "pwcc_v2" | "custom"
//   [synth]  count, width, height, base_dir, illum_min, illum_max,
//            alpha_kinds, split_ratios, seed
//   [train]  epochs, batch_size, lr, lambda_tv, label_smooth, w_n,
//            decay_start_epoch, decay_constant, seed, input_size,
//            optimizer, epsilon
//   [filter] enabled, sigma_s, sigma_r, diameter, mode
//
// Named presets pin lr, lambda_tv, label_smooth and filter.enabled; setting
// any of them alongside a named preset is a ConfigError. Unknown keys are a
// ConfigError. A relative base_dir resolves against base_path.
RunConfig parse_run_config_json(const std::string& text,
                                const std::filesystem::path& base_path = {});
RunConfig parse_run_config_toml(const std::string& text,
                                const std::filesystem::path& base_path = {});

// Dispatches on the extension (.toml or .json). A missing file is a
// ConfigError so the CLI reports it as a usage problem.
RunConfig load_run_config(const std::filesystem::path& path);

RangeMode parse_range_mode(std::string_view name);
std::string_view to_string(RangeMode mode);

}  // namespace pwcc::cli
