#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pwcc/dataset.hpp"
#include "pwcc/estimator.hpp"

namespace pwcc {

enum class Optimizer { kAdam, kSgd };

Optimizer parse_optimizer(std::string_view name);
std::string_view to_string(Optimizer opt);

struct TrainConfig {
  int epochs = 300;
  int batch_size = 8;
  double lr = 5e-4;
  double lambda_tv = 2e-4;
  bool label_smooth = false;
  double w_n = 10.0;
  // Desk-scale counterpart of "decay from epoch 800 with constant 800" over
  // 2000 epochs.
  int decay_start_epoch = 120;
  double decay_constant = 120.0;
  std::uint64_t seed = 7;
  int input_size = 64;
  Optimizer optimizer = Optimizer::kAdam;
  double epsilon = 1e-6;
};

// Throws ConfigError when a field breaks its invariant.
void validate(const TrainConfig& cfg);

// lr for epochs before decay_start, lr / (1 + (e - start) / constant) after.
double learning_rate(const TrainConfig& cfg, int epoch);

// Pwcc presets: v1 = (lambda 2e-4, lr 5e-4, no smoothing),
// v2 = (lambda 2e-3, lr 1e-4, smoothing). Both filter at evaluation time.
TrainConfig preset_pwcc_v1();
TrainConfig preset_pwcc_v2();

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_mean_angular_error = 0.0;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val_error = 0.0;

  // "epoch,lr,train_loss,val_mean_angular_error" with full-precision values.
  std::string to_csv() const;
};

struct TrainResult {
  EstimatorParams params;
  TrainingLog log;
};

// One sample resident in memory at the training resolution.
struct LoadedSample {
  std::string id;
  ChromaImage input_uv;
  ChromaImage target_uv;
  IlluminationMap gt_map;
  AlphaMap alpha;
  IlluminantChroma illum_a;
  IlluminantChroma illum_b;
};

// Reads and (if needed) resizes every sample of a split to size x size.
std::vector<LoadedSample> load_split(const DatasetManifest& manifest, Split split, int size,
                                     double epsilon);

// Called after every epoch; returning false stops training early.
using EpochCallback = std::function<bool(const EpochRecord&)>;

TrainResult train(const DatasetManifest& manifest, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Same loop over already-loaded data.
TrainResult train_loaded(const std::vector<LoadedSample>& train_set,
                         const std::vector<LoadedSample>& val_set, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {});

// Mean per-image angular error of params on a loaded split.
double mean_angular_error(const EstimatorParams& params, const std::vector<LoadedSample>& set);

}  // namespace pwcc
