#include "pwcc/train.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "pwcc/color.hpp"
#include "pwcc/eval.hpp"
#include "pwcc/image_io.hpp"
#include "pwcc/losses.hpp"
#include "pwcc/parallel.hpp"
#include "pwcc/rng.hpp"
#include "pwcc/synth.hpp"

namespace pwcc {

Optimizer parse_optimizer(std::string_view name) {
  if (name == "adam") return Optimizer::kAdam;
  if (name == "sgd") return Optimizer::kSgd;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

std::string_view to_string(Optimizer opt) {
  return opt == Optimizer::kAdam ? "adam" : "sgd";
}

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) throw ConfigError("lr must be > 0");
  if (!(cfg.lambda_tv >= 0.0) || !std::isfinite(cfg.lambda_tv)) {
    throw ConfigError("lambda_tv must be >= 0");
  }
  if (!(cfg.w_n > 0.0)) throw ConfigError("w_n must be > 0");
  if (cfg.decay_start_epoch < 0 || cfg.decay_start_epoch > cfg.epochs) {
    throw ConfigError("decay_start_epoch must lie in [0, epochs]");
  }
  if (!(cfg.decay_constant > 0.0)) throw ConfigError("decay_constant must be > 0");
  if (cfg.input_size < 4 || cfg.input_size % 4 != 0) {
    throw ConfigError("input_size must be a positive multiple of 4");
  }
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
}

double learning_rate(const TrainConfig& cfg, int epoch) {
  if (epoch < cfg.decay_start_epoch) return cfg.lr;
  return cfg.lr / (1.0 + (epoch - cfg.decay_start_epoch) / cfg.decay_constant);
}

TrainConfig preset_pwcc_v1() {
  TrainConfig cfg;
  cfg.lambda_tv = 2e-4;
  cfg.lr = 5e-4;
  cfg.label_smooth = false;
  return cfg;
}

TrainConfig preset_pwcc_v2() {
  TrainConfig cfg;
  cfg.lambda_tv = 2e-3;
  cfg.lr = 1e-4;
  cfg.label_smooth = true;
  return cfg;
}

std::string TrainingLog::to_csv() const {
  std::ostringstream out;
  out << "epoch,lr,train_loss,val_mean_angular_error\n";
  char line[160];
  for (const auto& r : epochs) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", r.epoch, r.lr, r.train_loss,
                  r.val_mean_angular_error);
    out << line;
  }
  return out.str();
}

std::vector<LoadedSample> load_split(const DatasetManifest& manifest, Split split, int size,
                                     double epsilon) {
  const auto entries = manifest.split(split);
  std::vector<LoadedSample> out(entries.size());
  parallel_for(entries.size(), [&](std::size_t i) {
    const ManifestSample& s = *entries[i];
    LoadedSample& l = out[i];
    l.id = s.id;
    LinearImage input = read_image(manifest.resolve(s.input_png));
    IlluminationMap gt = read_illumination_map(manifest.resolve(s.gt_map_pwcc));
    AlphaMap alpha = read_alpha_map(manifest.resolve(s.alpha_pwcc));
    if (input.width() != size || input.height() != size) {
      input = resize_bilinear(input, size, size);
      gt = g_normalized(resize_bilinear(gt, size, size));
      alpha = resize_bilinear(alpha, size, size);
    }
    l.input_uv = to_log_chroma(input, epsilon);
    l.target_uv = to_log_chroma(gt, epsilon);
    l.gt_map = std::move(gt);
    l.alpha = std::move(alpha);
    l.illum_a = s.illum_a;
    l.illum_b = s.illum_b;
  });
  return out;
}

double mean_angular_error(const EstimatorParams& params, const std::vector<LoadedSample>& set) {
  if (set.empty()) throw InvalidArgumentError("mean_angular_error on an empty set");
  std::vector<double> errors(set.size());
  parallel_for(set.size(), [&](std::size_t i) {
    const ChromaImage pred = forward(params, set[i].input_uv).pred;
    errors[i] = image_error(set[i].gt_map, from_log_chroma(pred));
  });
  double sum = 0.0;
  for (double e : errors) sum += e;
  return sum / static_cast<double>(errors.size());
}

namespace {

// Flat optimizer over every scalar of the parameter set.
class OptimizerState {
 public:
  OptimizerState(Optimizer kind, std::size_t n) : kind_(kind) {
    if (kind_ == Optimizer::kAdam) {
      m_.assign(n, 0.0f);
      v_.assign(n, 0.0f);
    }
  }

  void step(EstimatorParams& params, const ParamGrads<float>& grads, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, t_);
    const double bc2 = 1.0 - std::pow(kBeta2, t_);
    std::size_t k = 0;
    for (std::size_t ti = 0; ti < params.tensors.size(); ++ti) {
      auto& p = params.tensors[ti].values;
      const auto& g = grads.tensors[ti].values;
      for (std::size_t j = 0; j < p.size(); ++j, ++k) {
        if (kind_ == Optimizer::kSgd) {
          p[j] = static_cast<float>(p[j] - lr * g[j]);
          continue;
        }
        m_[k] = static_cast<float>(kBeta1 * m_[k] + (1.0 - kBeta1) * g[j]);
        v_[k] = static_cast<float>(kBeta2 * v_[k] + (1.0 - kBeta2) * g[j] * g[j]);
        const double mhat = m_[k] / bc1;
        const double vhat = v_[k] / bc2;
        p[j] = static_cast<float>(p[j] - lr * mhat / (std::sqrt(vhat) + kEps));
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  Optimizer kind_;
  int t_ = 0;
  std::vector<float> m_;
  std::vector<float> v_;
};

constexpr std::uint64_t kShuffleStream = 0x5348'5546'0000'0000ull;
constexpr std::uint64_t kSmoothStream = 0x534D'4F4F'0000'0000ull;

struct SampleStep {
  ParamGrads<float> grads;
  double loss = 0.0;
};

}  // namespace

TrainResult train_loaded(const std::vector<LoadedSample>& train_set,
                         const std::vector<LoadedSample>& val_set, const TrainConfig& cfg,
                         const EpochCallback& on_epoch) {
  validate(cfg);
  if (train_set.empty()) throw ConfigError("training split is empty");
  if (val_set.empty()) throw ConfigError("validation split is empty");
  for (const auto* set : {&train_set, &val_set}) {
    for (const auto& s : *set) {
      if (s.input_uv.width() != cfg.input_size || s.input_uv.height() != cfg.input_size) {
        throw ShapeError("sample " + s.id + " is not at the training resolution");
      }
    }
  }

  retain_heap_memory();
  TrainResult result;
  EstimatorParams params = init_params(cfg.seed);
  OptimizerState opt(cfg.optimizer, params.scalar_count());
  result.params = params;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = learning_rate(cfg, epoch);
    Rng shuffle_rng(mix_seed(cfg.seed ^ kShuffleStream, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order.begin(), order.end());

    double epoch_loss = 0.0;
    const std::size_t batches = (order.size() + cfg.batch_size - 1) / cfg.batch_size;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(order.size(), lo + cfg.batch_size);
      // A fresh smoothing seed for every batch.
      const std::uint64_t batch_seed =
          mix_seed(cfg.seed ^ kSmoothStream,
                   static_cast<std::uint64_t>(epoch) * batches + b);
      std::vector<SampleStep> steps(hi - lo);
      parallel_for(hi - lo, [&](std::size_t k) {
        const LoadedSample& s = train_set[order[lo + k]];
        ChromaImage smoothed_target;
        const ChromaImage* target = &s.target_uv;
        if (cfg.label_smooth) {
          const AlphaMap a = smooth_alpha(s.alpha, cfg.w_n, mix_seed(batch_seed, k));
          smoothed_target = to_log_chroma(mix_illuminants(s.illum_a, s.illum_b, a), cfg.epsilon);
          target = &smoothed_target;
        }
        auto fwd = forward(params, s.input_uv);
        for (double v : fwd.pred.data()) {
          if (!std::isfinite(v)) {
            // Reported as divergence once the batch is reduced.
            steps[k].loss = std::numeric_limits<double>::quiet_NaN();
            steps[k].grads = zero_params<float>();
            return;
          }
        }
        const CombinedLoss loss = combined_loss(fwd.pred, *target, cfg.lambda_tv);
        steps[k].loss = loss.report.total;
        steps[k].grads = backward(params, fwd.cache, loss.grad);
      });

      // Fixed accumulation order keeps results independent of thread count.
      ParamGrads<float> grads = zero_params<float>();
      double batch_loss = 0.0;
      const float scale = 1.0f / static_cast<float>(steps.size());
      for (const auto& st : steps) {
        batch_loss += st.loss;
        for (std::size_t ti = 0; ti < grads.tensors.size(); ++ti) {
          auto& g = grads.tensors[ti].values;
          const auto& sg = st.grads.tensors[ti].values;
          for (std::size_t j = 0; j < g.size(); ++j) g[j] += sg[j] * scale;
        }
      }
      if (!std::isfinite(batch_loss)) {
        throw DivergenceError(epoch, static_cast<int>(b),
                              "training diverged: non-finite loss at epoch " +
                                  std::to_string(epoch) + ", batch " + std::to_string(b));
      }
      epoch_loss += batch_loss;
      opt.step(params, grads, lr);
      if (!all_finite(params)) {
        throw DivergenceError(epoch, static_cast<int>(b),
                              "training diverged: non-finite parameters after epoch " +
                                  std::to_string(epoch) + ", batch " + std::to_string(b));
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = epoch_loss / static_cast<double>(order.size());
    try {
      rec.val_mean_angular_error = mean_angular_error(params, val_set);
    } catch (const InvalidInputError&) {
      rec.val_mean_angular_error = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isfinite(rec.val_mean_angular_error)) {
      throw DivergenceError(epoch, static_cast<int>(batches) - 1,
                            "training diverged: non-finite validation error at epoch " +
                                std::to_string(epoch));
    }
    result.log.epochs.push_back(rec);
    if (result.log.best_epoch < 0 || rec.val_mean_angular_error < result.log.best_val_error) {
      result.log.best_epoch = epoch;
      result.log.best_val_error = rec.val_mean_angular_error;
      result.params = params;
    }
    if (on_epoch && !on_epoch(rec)) break;
  }
  return result;
}

TrainResult train(const DatasetManifest& manifest, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  validate(cfg);
  const auto train_set = load_split(manifest, Split::kTrain, cfg.input_size, cfg.epsilon);
  const auto val_set = load_split(manifest, Split::kVal, cfg.input_size, cfg.epsilon);
  return train_loaded(train_set, val_set, cfg, on_epoch);
}

}  // namespace pwcc
