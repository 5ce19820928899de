#include "pwcc/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pwcc/color.hpp"
#include "pwcc/image_io.hpp"
#include "pwcc/parallel.hpp"
#include "pwcc/rng.hpp"

namespace pwcc {

using nlohmann::json;

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw ConfigError("unknown split '" + std::string(name) + "'");
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

void validate(const SynthConfig& cfg) {
  if (cfg.count <= 0) throw ConfigError("dataset count must be > 0 (empty manifest)");
  if (cfg.width < 1 || cfg.height < 1) throw ConfigError("image size must be at least 1x1");
  if (!(cfg.illum_min > 0.0) || !(cfg.illum_max >= cfg.illum_min)) {
    throw ConfigError("illuminant range must satisfy 0 < min <= max");
  }
  if (cfg.alpha_kinds.empty()) throw ConfigError("at least one alpha kind is required");
  double total = 0.0;
  for (double r : cfg.split_ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("split ratios must be >= 0");
    total += r;
  }
  if (!(total > 0.0)) throw ConfigError("split ratios must not all be zero");
}

std::array<int, 3> split_sizes(int count, const std::array<double, 3>& ratios) {
  const double total = ratios[0] + ratios[1] + ratios[2];
  if (count < 0 || !(total > 0.0)) throw InvalidArgumentError("invalid split request");
  std::array<int, 3> sizes{};
  std::array<double, 3> remainder{};
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double quota = count * ratios[i] / total;
    // Snap quotas that are integral up to rounding noise.
    const double snapped = std::abs(quota - std::round(quota)) < 1e-9 ? std::round(quota) : quota;
    sizes[i] = static_cast<int>(std::floor(snapped));
    remainder[i] = snapped - sizes[i];
    assigned += sizes[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return remainder[a] > remainder[b] + 1e-9;
  });
  for (int k = 0; assigned < count; k = (k + 1) % 3, ++assigned) ++sizes[order[k]];
  return sizes;
}

std::vector<const ManifestSample*> DatasetManifest::split(Split s) const {
  std::vector<const ManifestSample*> out;
  for (const auto& sample : samples) {
    if (sample.split == s) out.push_back(&sample);
  }
  return out;
}

const ManifestSample* DatasetManifest::find(std::string_view id) const {
  for (const auto& sample : samples) {
    if (sample.id == id) return &sample;
  }
  return nullptr;
}

namespace {

json rgb_json(const IlluminantChroma& l) { return json::array({l[0], l[1], l[2]}); }

IlluminantChroma rgb_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("illuminant must be [r, g, b]");
  return IlluminantChroma::from_rgb(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

std::string manifest_to_json(const DatasetManifest& manifest) {
  json samples = json::array();
  for (const auto& s : manifest.samples) {
    samples.push_back({{"id", s.id},
                       {"split", std::string(to_string(s.split))},
                       {"input_png", s.input_png},
                       {"gt_png", s.gt_png},
                       {"gt_map_pwcc", s.gt_map_pwcc},
                       {"alpha_pwcc", s.alpha_pwcc},
                       {"illum_a", rgb_json(s.illum_a)},
                       {"illum_b", rgb_json(s.illum_b)}});
  }
  json doc = {{"version", manifest.version}, {"seed", manifest.seed}, {"samples", samples}};
  return doc.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text, const std::filesystem::path& root) {
  DatasetManifest m;
  m.root = root;
  try {
    const json doc = json::parse(text);
    m.version = doc.at("version").get<int>();
    if (m.version != 1) {
      throw UnsupportedVersionError("manifest version " + std::to_string(m.version));
    }
    m.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& js : doc.at("samples")) {
      ManifestSample s;
      s.id = js.at("id").get<std::string>();
      s.split = parse_split(js.at("split").get<std::string>());
      s.input_png = js.at("input_png").get<std::string>();
      s.gt_png = js.at("gt_png").get<std::string>();
      s.gt_map_pwcc = js.at("gt_map_pwcc").get<std::string>();
      s.alpha_pwcc = js.at("alpha_pwcc").get<std::string>();
      s.illum_a = rgb_from_json(js.at("illum_a"));
      s.illum_b = rgb_from_json(js.at("illum_b"));
      m.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << manifest_to_json(manifest);
  if (!out) throw IoError("write failed: " + path.string());
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw FileNotFoundError("no such manifest: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read manifest: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return manifest_from_json(ss.str(), path.parent_path());
}

namespace {

std::vector<std::filesystem::path> list_base_files(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw ConfigError("base image folder does not exist: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw ConfigError("base image folder has no PNG files: " + dir.string());
  std::sort(files.begin(), files.end());
  return files;
}

IlluminantChroma sample_illuminant(const SynthConfig& cfg, Rng& rng) {
  const double r = rng.uniform(cfg.illum_min, cfg.illum_max);
  const double g = rng.uniform(cfg.illum_min, cfg.illum_max);
  const double b = rng.uniform(cfg.illum_min, cfg.illum_max);
  return IlluminantChroma::from_rgb(r, g, b);
}

std::string sample_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "s%05d", index);
  return buf;
}

constexpr std::uint64_t kSplitStream = 0xFFFF'FFFF'0000'0001ull;

}  // namespace

SceneSample generate_scene(const SynthConfig& cfg, int index,
                           const std::vector<std::filesystem::path>& base_files) {
  validate(cfg);
  const std::uint64_t seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(index));
  Rng rng(seed);

  LinearImage base;
  if (cfg.base_dir) {
    const auto files = base_files.empty() ? list_base_files(*cfg.base_dir) : base_files;
    base = resize_bilinear(read_image(files[rng.index(files.size())]), cfg.width, cfg.height);
    for (double& v : base.data()) v = std::max(v, 0.02);
  } else {
    base = procedural_base(cfg.width, cfg.height, rng);
  }

  const IlluminantChroma l_a = sample_illuminant(cfg, rng);
  const IlluminantChroma l_b = sample_illuminant(cfg, rng);
  const AlphaFamily family = cfg.alpha_kinds[rng.index(cfg.alpha_kinds.size())];
  const AlphaKind kind = sample_alpha_kind(family, rng);
  const AlphaMap alpha = make_alpha_map(kind, cfg.width, cfg.height, rng.next_u64());

  // Scale reflectance so the brighter of observation and ground truth peaks
  // in [0.6, 0.95]; neither clips when quantized.
  const IlluminationMap gains = mix_illuminants(l_a, l_b, alpha);
  const LinearImage lit = apply_white_balance(base, gains);
  const double peak = std::max(*std::max_element(lit.data().begin(), lit.data().end()),
                               *std::max_element(base.data().begin(), base.data().end()));
  const double exposure = rng.uniform(0.6, 0.95) / peak;
  for (double& v : base.data()) v *= exposure;

  return synthesize(base, l_a, l_b, alpha, seed);
}

GeneratedDataset generate_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  validate(cfg);
  std::vector<std::filesystem::path> base_files;
  if (cfg.base_dir) base_files = list_base_files(*cfg.base_dir);

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "samples", ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  const auto sizes = split_sizes(cfg.count, cfg.split_ratios);
  std::vector<int> order(static_cast<std::size_t>(cfg.count));
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(mix_seed(cfg.seed, kSplitStream));
  split_rng.shuffle(order.begin(), order.end());
  std::vector<Split> split_of(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int rank = static_cast<int>(k);
    split_of[static_cast<std::size_t>(order[k])] =
        rank < sizes[0] ? Split::kTrain : rank < sizes[0] + sizes[1] ? Split::kVal : Split::kTest;
  }

  DatasetManifest manifest;
  manifest.seed = cfg.seed;
  manifest.root = out_dir;
  manifest.samples.resize(order.size());

  parallel_for(order.size(), [&](std::size_t i) {
    const int index = static_cast<int>(i);
    const SceneSample scene = generate_scene(cfg, index, base_files);
    ManifestSample& s = manifest.samples[i];
    s.id = sample_id(index);
    s.split = split_of[i];
    s.input_png = "samples/" + s.id + "_input.png";
    s.gt_png = "samples/" + s.id + "_gt.png";
    s.gt_map_pwcc = "samples/" + s.id + "_gt_map.pwcc";
    s.alpha_pwcc = "samples/" + s.id + "_alpha.pwcc";
    s.illum_a = scene.illum_a;
    s.illum_b = scene.illum_b;
    write_image(out_dir / s.input_png, scene.input);
    write_image(out_dir / s.gt_png, scene.gt_image);
    write_float_map(out_dir / s.gt_map_pwcc, to_float_map(scene.gt_map));
    write_float_map(out_dir / s.alpha_pwcc, to_float_map(scene.alpha));
  });

  GeneratedDataset out;
  out.manifest_path = out_dir / "manifest.json";
  save_manifest(out.manifest_path, manifest);
  out.manifest = std::move(manifest);
  return out;
}

}  // namespace pwcc
