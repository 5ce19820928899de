#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <new>
#include <optional>
#include <ostream>

#include "pwcc/baselines.hpp"
#include "pwcc/bilateral.hpp"
#include "pwcc/color.hpp"
#include "pwcc/dataset.hpp"
#include "pwcc/error.hpp"
#include "pwcc/eval.hpp"
#include "pwcc/image_io.hpp"
#include "pwcc/train.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;

namespace pwcc::cli {
namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

EstimatorParams load_model(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("model file not found: " + path.string());
  return load_params(path);
}

RunConfig config_or_preset(const std::string& config_path, const std::string& preset) {
  RunConfig cfg = config_path.empty() ? expand_preset(Preset::kPwccV1)
                                      : load_run_config(config_path);
  if (!preset.empty()) {
    const Preset p = parse_preset(preset);
    if (p != cfg.preset) {
      if (!config_path.empty() && cfg.preset != Preset::kCustom && p != Preset::kCustom) {
        throw ConfigError("--preset " + preset + " conflicts with the config's preset " +
                          std::string(to_string(cfg.preset)));
      }
      const RunConfig expanded = expand_preset(p);
      cfg.preset = p;
      if (p != Preset::kCustom) {
        cfg.train.lr = expanded.train.lr;
        cfg.train.lambda_tv = expanded.train.lambda_tv;
        cfg.train.label_smooth = expanded.train.label_smooth;
        cfg.filter_enabled = true;
      }
    }
  }
  return cfg;
}

// Estimator used by infer and grid: a trained model file or a baseline name.
Method method_from_spec(const std::string& spec, int input_size) {
  Method m;
  m.input_size = input_size;
  if (spec == "gray_world" || spec == "white_patch") {
    m.kind = parse_method(spec);
  } else {
    m.kind = MethodKind::kTrained;
    m.params = load_model(spec);
  }
  return m;
}

bool needs_resize(const LinearImage& img) {
  return img.width() != img.height() || img.width() < 4 || img.width() % 4 != 0;
}

// Corrected image: divides the observation by the estimated illuminant.
LinearImage white_balanced(const LinearImage& input, const IlluminationMap& map) {
  return apply_white_balance(input, reciprocal(map));
}

struct SynthArgs {
  std::string config;
  std::string out;
  std::optional<int> count;
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SynthConfig cfg = a.config.empty() ? SynthConfig{} : load_run_config(a.config).synth;
  if (a.count) cfg.count = *a.count;
  if (a.seed) cfg.seed = *a.seed;
  validate(cfg);
  const GeneratedDataset ds = generate_dataset(cfg, a.out);
  out << ds.manifest_path.string() << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string manifest;
  std::string preset;
  std::string config;
  std::string out;
  std::string log;
  std::optional<int> epochs;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig cfg = config_or_preset(a.config, a.preset);
  if (a.epochs) {
    cfg.train.epochs = *a.epochs;
    cfg.train.decay_start_epoch = std::min(cfg.train.decay_start_epoch, *a.epochs);
  }
  if (a.seed) cfg.train.seed = *a.seed;
  validate(cfg.train);
  if (!fs::exists(a.manifest)) throw ConfigError("manifest not found: " + a.manifest);
  const DatasetManifest manifest = load_manifest(a.manifest);

  const TrainResult result = train(manifest, cfg.train, [&](const EpochRecord& r) {
    if (!a.quiet) {
      err << "epoch " << r.epoch << " lr " << r.lr << " loss " << r.train_loss << " val "
          << r.val_mean_angular_error << "\n";
    }
    return true;
  });
  const fs::path model(a.out);
  if (model.has_parent_path()) fs::create_directories(model.parent_path());
  save_params(model, result.params);
  const fs::path log = a.log.empty() ? fs::path(model).replace_extension(".csv") : fs::path(a.log);
  write_text(log, result.log.to_csv());
  out << "preset " << to_string(cfg.preset) << "\n";
  out << "best val angular error " << std::setprecision(6) << result.log.best_val_error
      << " deg (epoch " << result.log.best_epoch << ")\n";
  out << "model " << model.string() << "\nlog " << log.string() << "\n";
  return kExitOk;
}

struct InferArgs {
  std::string model;
  std::string method = "trained";
  std::string gt_map;
  std::string input;
  std::string out;
  std::string filter_target = "map";
  std::string config;
  int input_size = 64;
  bool strict = false;
};

int cmd_infer(const InferArgs& a, std::ostream& out, std::ostream& err) {
  const BilateralConfig filter =
      a.config.empty() ? BilateralConfig{} : load_run_config(a.config).filter;
  Method m;
  m.kind = parse_method(a.method);
  m.input_size = a.input_size;
  std::optional<IlluminationMap> gt;
  if (m.kind == MethodKind::kTrained) {
    if (a.model.empty()) throw ConfigError("--model is required for the trained method");
    m.params = load_model(a.model);
  } else if (m.kind == MethodKind::kOracle) {
    if (a.gt_map.empty()) throw ConfigError("--gt-map is required for the oracle method");
    gt = read_illumination_map(a.gt_map);
  }

  const LinearImage input = read_image(a.input);
  if (m.kind == MethodKind::kTrained && needs_resize(input)) {
    if (a.strict) {
      throw ShapeError("input is " + std::to_string(input.width()) + "x" +
                       std::to_string(input.height()) +
                       "; the estimator needs a square image with a side divisible by 4");
    }
    err << "warning: resizing " << input.width() << "x" << input.height() << " input to "
        << a.input_size << "x" << a.input_size << " for inference\n";
  }
  const IlluminationMap map = predict_map(m, input, gt ? &*gt : nullptr);

  std::vector<fs::path> written;
  auto emit_map = [&](const std::string& suffix, const IlluminationMap& mp) {
    const fs::path p = a.out + suffix;
    write_float_map(p, to_float_map(mp));
    written.push_back(p);
  };
  auto emit_image = [&](const std::string& suffix, const LinearImage& img) {
    const fs::path p = a.out + suffix;
    write_image(p, img);
    written.push_back(p);
  };
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  emit_map("_map.pwcc", map);
  const LinearImage wb = white_balanced(input, map);
  emit_image("_wb.png", wb);
  if (a.filter_target == "map") {
    const IlluminationMap filtered = apply_postfilter(map, filter);
    emit_map("_map_bf.pwcc", filtered);
    emit_image("_wb_bf.png", white_balanced(input, filtered));
  } else if (a.filter_target == "image") {
    emit_image("_wb_bf.png", bilateral_filter(wb, filter));
  }
  for (const auto& p : written) out << p.string() << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string manifest;
  std::string split = "test";
  std::string method;
  std::string model;
  std::string config;
  std::string out;
  int input_size = 64;
  bool filter = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const BilateralConfig filter =
      a.config.empty() ? BilateralConfig{} : load_run_config(a.config).filter;
  Method m;
  m.kind = parse_method(a.method);
  m.input_size = a.input_size;
  if (m.kind == MethodKind::kTrained) {
    if (a.model.empty()) throw ConfigError("--model is required for the trained method");
    m.params = load_model(a.model);
  }
  const Split split = parse_split(a.split);
  if (!fs::exists(a.manifest)) throw ConfigError("manifest not found: " + a.manifest);
  const DatasetManifest manifest = load_manifest(a.manifest);
  const ErrorSummary s = evaluate_method(
      manifest, split, m, a.filter ? std::optional<BilateralConfig>(filter) : std::nullopt);
  const std::string label = std::string(to_string(m.kind)) + (a.filter ? "+bf" : "");
  const std::string table = summary_table({{label, s}});
  out << table;
  if (!a.out.empty()) {
    write_text(a.out + ".json", summary_to_json(s, label, std::string(to_string(split))));
    write_text(a.out + ".txt", table);
  }
  return kExitOk;
}

struct GridArgs {
  std::string manifest;
  std::vector<std::string> ids;
  std::vector<std::string> models;
  std::string out;
  int input_size = 64;
  bool filter = false;
};

// Rows are samples; columns are input | one corrected image per model | gt.
int cmd_grid(const GridArgs& a, std::ostream& out) {
  if (!fs::exists(a.manifest)) throw ConfigError("manifest not found: " + a.manifest);
  const DatasetManifest manifest = load_manifest(a.manifest);
  std::vector<const ManifestSample*> samples;
  for (const auto& id : a.ids) {
    const ManifestSample* s = manifest.find(id);
    if (!s) throw ConfigError("unknown sample id '" + id + "'");
    samples.push_back(s);
  }
  std::vector<Method> methods;
  for (const auto& spec : a.models) methods.push_back(method_from_spec(spec, a.input_size));

  int pw = 0, ph = 0;
  std::vector<std::vector<LinearImage>> rows;
  for (const ManifestSample* s : samples) {
    const LinearImage input = read_image(manifest.resolve(s->input_png));
    if (pw == 0) {
      pw = input.width();
      ph = input.height();
    }
    std::vector<LinearImage> row{input};
    for (const Method& m : methods) {
      IlluminationMap map = predict_map(m, input);
      if (a.filter) map = apply_postfilter(map, BilateralConfig{});
      row.push_back(white_balanced(input, map));
    }
    row.push_back(read_image(manifest.resolve(s->gt_png)));
    for (auto& panel : row) {
      if (panel.width() != pw || panel.height() != ph) panel = resize_bilinear(panel, pw, ph);
    }
    rows.push_back(std::move(row));
  }

  const int cols = static_cast<int>(methods.size()) + 2;
  LinearImage grid(cols * pw, static_cast<int>(rows.size()) * ph);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < cols; ++c) {
      const LinearImage& panel = rows[r][static_cast<std::size_t>(c)];
      for (int y = 0; y < ph; ++y) {
        for (int x = 0; x < pw; ++x) {
          for (int k = 0; k < 3; ++k) {
            grid.at(c * pw + x, static_cast<int>(r) * ph + y, k) = panel.at(x, y, k);
          }
        }
      }
    }
  }
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  write_preview_png(a.out, grid);
  out << a.out << " " << grid.width() << "x" << grid.height() << "\n";
  return kExitOk;
}

int exit_code_for(const std::exception_ptr& ep, std::ostream& err) {
  try {
    std::rethrow_exception(ep);
  } catch (const DivergenceError& e) {
    err << "error: training diverged at epoch " << e.epoch() << " batch " << e.batch() << ": "
        << e.what() << "\n";
    return kExitRuntime;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (...) {
    err << "error: unknown failure\n";
    return kExitRuntime;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pixel-wise color constancy: synthesis, training, inference, evaluation"};
  app.name("pwcc");
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic two-illuminant dataset");
  s->add_option("--config", synth.config, "Run config (.toml or .json); its [synth] table is used");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--count", synth.count, "Override the sample count");
  s->add_option("--seed", synth.seed, "Override the master seed");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train the estimator on a manifest");
  t->add_option("--manifest", train.manifest, "Dataset manifest")->required();
  t->add_option("--preset", train.preset, "pwcc_v1, pwcc_v2 or custom (default pwcc_v1)");
  t->add_option("--config", train.config, "Run config (.toml or .json)");
  t->add_option("--out", train.out, "Output model file (.pwcm)")->required();
  t->add_option("--log", train.log, "CSV training log (default: model path with .csv)");
  t->add_option("--epochs", train.epochs, "Override the epoch count");
  t->add_option("--seed", train.seed, "Override the training seed");
  t->add_flag("--quiet", train.quiet, "No per-epoch progress on stderr");

  InferArgs infer;
  auto* i = app.add_subcommand("infer", "Estimate the illumination map of one image");
  i->add_option("--model", infer.model, "Trained model file (.pwcm)");
  i->add_option("--method", infer.method, "trained, gray_world, white_patch or oracle")
      ->capture_default_str();
  i->add_option("--gt-map", infer.gt_map, "Ground-truth map (.pwcc) for the oracle method");
  i->add_option("--input", infer.input, "Linear 16-bit PNG")->required();
  i->add_option("--out", infer.out, "Output path prefix")->required();
  i->add_option("--filter-target", infer.filter_target, "Where to apply the bilateral filter")
      ->check(CLI::IsMember({"map", "image", "none"}))
      ->capture_default_str();
  i->add_option("--config", infer.config, "Run config supplying the [filter] table");
  i->add_option("--input-size", infer.input_size, "Resize target for non-conforming inputs")
      ->capture_default_str();
  i->add_flag("--strict", infer.strict, "Fail instead of resizing non-conforming inputs");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Score a method on a dataset split");
  e->add_option("--manifest", eval.manifest, "Dataset manifest")->required();
  e->add_option("--split", eval.split, "train, val or test")->capture_default_str();
  e->add_option("--method", eval.method, "trained, gray_world, white_patch or oracle")
      ->required();
  e->add_option("--model", eval.model, "Trained model file for --method trained");
  e->add_option("--config", eval.config, "Run config supplying the [filter] table");
  e->add_option("--out", eval.out, "Write <out>.json and <out>.txt");
  e->add_option("--input-size", eval.input_size, "Resize target for non-conforming inputs")
      ->capture_default_str();
  e->add_flag("--filter", eval.filter, "Bilateral post-filter the predicted maps");

  GridArgs grid;
  auto* g = app.add_subcommand("grid", "Write an 8-bit sRGB comparison grid");
  g->add_option("--manifest", grid.manifest, "Dataset manifest")->required();
  g->add_option("--ids", grid.ids, "Sample ids (comma separated)")->required()->delimiter(',');
  g->add_option("--model", grid.models, "Model file or gray_world / white_patch (repeatable)");
  g->add_option("--out", grid.out, "Output PNG")->required();
  g->add_option("--input-size", grid.input_size, "Resize target for non-conforming inputs")
      ->capture_default_str();
  g->add_flag("--filter", grid.filter, "Bilateral post-filter the predicted maps");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, out);
    if (t->parsed()) return cmd_train(train, out, err);
    if (i->parsed()) return cmd_infer(infer, out, err);
    if (e->parsed()) return cmd_eval(eval, out);
    if (g->parsed()) return cmd_grid(grid, out);
  } catch (...) {
    return exit_code_for(std::current_exception(), err);
  }
  return kExitUsage;
}

}  // namespace pwcc::cli
