#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pwcc/image.hpp"
#include "pwcc/synth.hpp"

namespace pwcc {

enum class Split { kTrain, kVal, kTest };

Split parse_split(std::string_view name);
std::string_view to_string(Split split);

struct SynthConfig {
  int count = 400;
  int width = 64;
  int height = 64;
  // Folder of 16-bit PNG reflectance images; procedural textures when unset.
  std::optional<std::filesystem::path> base_dir;
  // Each channel of an illuminant is drawn from [illum_min, illum_max], then
  // the triple is divided by its green value.
  double illum_min = 0.4;
  double illum_max = 1.6;
  std::vector<AlphaFamily> alpha_kinds = {AlphaFamily::kConstant, AlphaFamily::kLinearGradient,
                                          AlphaFamily::kRadial, AlphaFamily::kVoronoi2};
  std::array<double, 3> split_ratios = {0.75, 0.2, 0.05};
  std::uint64_t seed = 1;
};

// Throws ConfigError on out-of-range fields.
void validate(const SynthConfig& cfg);

// Largest-remainder apportionment of count over (train, val, test); equal
// remainders go to the earlier split.
std::array<int, 3> split_sizes(int count, const std::array<double, 3>& ratios);

struct ManifestSample {
  std::string id;
  Split split = Split::kTrain;
  std::string input_png;
  std::string gt_png;
  std::string gt_map_pwcc;
  std::string alpha_pwcc;
  IlluminantChroma illum_a;
  IlluminantChroma illum_b;
};

struct DatasetManifest {
  int version = 1;
  std::uint64_t seed = 0;
  std::vector<ManifestSample> samples;
  // Directory the relative sample paths resolve against. Not serialized.
  std::filesystem::path root;

  std::vector<const ManifestSample*> split(Split s) const;
  const ManifestSample* find(std::string_view id) const;
  std::filesystem::path resolve(const std::string& relative) const { return root / relative; }
};

// JSON with sorted keys and two-space indentation.
std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& text, const std::filesystem::path& root);

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& path);

struct GeneratedDataset {
  DatasetManifest manifest;
  std::filesystem::path manifest_path;
};

// Writes <out_dir>/manifest.json and <out_dir>/samples/*. Each sample draws
// from its own stream seeded by (seed, index), so the result does not depend
// on worker count.
GeneratedDataset generate_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir);

// The in-memory scene for sample index i of cfg, before any file I/O. The
// split is not part of the scene.
SceneSample generate_scene(const SynthConfig& cfg, int index,
                           const std::vector<std::filesystem::path>& base_files = {});

}  // namespace pwcc
