// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and a
// JSON report with the measured values. Exit status is 0 only if every
// criterion passes.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <iostream>
#include <set>
#include <sstream>

#include "pwcc/bilateral.hpp"
#include "pwcc/color.hpp"
#include "pwcc/dataset.hpp"
#include "pwcc/eval.hpp"
#include "pwcc/image_io.hpp"
#include "pwcc/losses.hpp"
#include "pwcc/rng.hpp"
#include "pwcc/synth.hpp"
#include "pwcc/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pwcc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  json values = json::object();
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class Buf>
Buf random_buffer(int w, int h, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  Buf b(w, h);
  for (double& v : b.data()) v = rng.uniform(lo, hi);
  return b;
}

template <class A, class B>
double max_abs_diff(const A& a, const B& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

double rel_error(double fd, double analytic, double floor) {
  return std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), floor});
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------- 1

// Every entry distinct by at least 0.008, so |.| is smooth within the step.
ChromaImage tie_free(int side, std::uint64_t seed) {
  Rng rng(seed);
  ChromaImage p(side, side);
  std::vector<double> order(p.data().size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<double>(i);
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
  for (std::size_t i = 0; i < order.size(); ++i) {
    p.data()[i] = (order[i] - 256.0) * 0.01 + rng.uniform(0.0, 0.002);
  }
  return p;
}

template <class F>
double max_fd_error(ChromaImage x, const ChromaImage& grad, F value, double h, double floor) {
  double worst = 0.0;
  for (std::size_t k = 0; k < x.data().size(); ++k) {
    const double orig = x.data()[k];
    x.data()[k] = orig + h;
    const double up = value(x);
    x.data()[k] = orig - h;
    const double down = value(x);
    x.data()[k] = orig;
    worst = std::max(worst, rel_error((up - down) / (2 * h), grad.data()[k], floor));
  }
  return worst;
}

Outcome criterion_gradients() {
  const auto t0 = Clock::now();
  double loss_worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto p = random_buffer<ChromaImage>(16, 16, seed, -1.0, 1.0);
    const auto t = random_buffer<ChromaImage>(16, 16, seed + 50, -1.0, 1.0);
    loss_worst = std::max(
        loss_worst, max_fd_error(p, l2_loss(p, t).grad,
                                 [&](const ChromaImage& x) { return l2_loss(x, t).value; }, 1e-4,
                                 1e-6));
    const ChromaImage q = tie_free(16, seed);
    loss_worst = std::max(
        loss_worst,
        // Nonzero TV gradients are multiples of 1 / (H W); exact zeros leave
        // only roundoff, so the floor sits well below that quantum.
        max_fd_error(q, tv_loss(q).grad, [](const ChromaImage& x) { return tv_loss(x).value; },
                     1e-3, 1e-4));
  }

  double net_worst = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto p = convert_params<double>(init_params(seed));
    const auto in = random_buffer<ChromaImage>(16, 16, seed + 100, -1.0, 1.0);
    const auto target = random_buffer<ChromaImage>(16, 16, seed + 200, -1.0, 1.0);
    const double lambda = 2e-3;
    auto loss_of = [&](const ParamSet<double>& q) {
      return combined_loss(forward(q, in).pred, target, lambda).report.total;
    };
    const auto fwd = forward(p, in);
    const auto grads = backward(p, fwd.cache, combined_loss(fwd.pred, target, lambda).grad);
    Rng pick(seed * 7919);
    for (int s = 0; s < 50; ++s) {
      const std::size_t k = pick.index(p.scalar_count());
      auto q = p;
      const double h = 1e-5;
      q.scalar(k) = p.scalar(k) + h;
      const double up = loss_of(q);
      q.scalar(k) = p.scalar(k) - h;
      const double down = loss_of(q);
      net_worst = std::max(net_worst, rel_error((up - down) / (2 * h), grads.scalar(k), 1e-7));
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = loss_worst < 1e-4 && net_worst < 1e-3 && secs < 60.0;
  std::ostringstream d;
  d << "losses max rel err " << loss_worst << " (< 1e-4), estimator " << net_worst
    << " (< 1e-3), " << secs << " s";
  o.detail = d.str();
  o.values = {{"loss_max_rel_error", loss_worst},
              {"estimator_max_rel_error", net_worst},
              {"seconds", secs}};
  return o;
}

// ---------------------------------------------------------------- 2

// Weighted average over the clipped window, evaluated pixel by pixel.
IlluminationMap bilateral_reference(const IlluminationMap& img, const BilateralConfig& cfg) {
  const int r = cfg.diameter / 2;
  IlluminationMap out(img.width(), img.height());
  auto g = [](double x, double s) { return std::exp(-x * x / (2 * s * s)); };
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        double num = 0.0, den = 0.0;
        for (int qy = y - r; qy <= y + r; ++qy) {
          for (int qx = x - r; qx <= x + r; ++qx) {
            if (qx < 0 || qy < 0 || qx >= img.width() || qy >= img.height()) continue;
            double range = 0.0;
            if (cfg.mode == RangeMode::kJoint) {
              for (int k = 0; k < 3; ++k) {
                const double d = img.at(x, y, k) - img.at(qx, qy, k);
                range += d * d;
              }
              range = std::sqrt(range);
            } else {
              range = std::abs(img.at(x, y, c) - img.at(qx, qy, c));
            }
            const double w = g(std::hypot(double(qx - x), double(qy - y)), cfg.sigma_s) *
                             g(range, cfg.sigma_r);
            num += w * img.at(qx, qy, c);
            den += w;
          }
        }
        out.at(x, y, c) = num / den;
      }
    }
  }
  return out;
}

Outcome criterion_bilateral() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto img = random_buffer<IlluminationMap>(16, 16, 500 + t, 0.2, 2.0);
    BilateralConfig cfg;
    if (t > 0) {
      cfg.sigma_s = rng.uniform(0.5, 80.0);
      cfg.sigma_r = rng.uniform(0.05, 2.0);
      cfg.diameter = 1 + 2 * static_cast<int>(rng.index(6));
      cfg.mode = t % 2 ? RangeMode::kJoint : RangeMode::kPerChannel;
    }
    worst = std::max(worst, max_abs_diff(bilateral_filter(img, cfg), bilateral_reference(img, cfg)));
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst <= 1e-5 && secs < 60.0;
  std::ostringstream d;
  d << "max abs diff " << worst << " over 50 inputs (<= 1e-5), " << secs << " s";
  o.detail = d.str();
  o.values = {{"max_abs_diff", worst}, {"seconds", secs}};
  return o;
}

// ---------------------------------------------------------------- 3

Outcome criterion_reconstruction(const fs::path& work) {
  SynthConfig cfg;
  cfg.count = 100;
  cfg.seed = 31;
  double pre = 0.0;
  for (int i = 0; i < cfg.count; ++i) {
    const SceneSample s = generate_scene(cfg, i);
    pre = std::max(pre, max_abs_diff(apply_white_balance(s.gt_image, s.gt_map), s.input));
  }
  const DatasetManifest m = generate_dataset(cfg, work / "reconstruction").manifest;
  double post = 0.0;
  for (const auto& s : m.samples) {
    const LinearImage input = read_image(m.resolve(s.input_png));
    const LinearImage gt = read_image(m.resolve(s.gt_png));
    const IlluminationMap map = read_illumination_map(m.resolve(s.gt_map_pwcc));
    post = std::max(post, max_abs_diff(apply_white_balance(gt, map), input));
  }
  Outcome o;
  o.pass = m.samples.size() == 100 && pre <= 1e-6 && post <= 3.0 / 65535.0;
  std::ostringstream d;
  d << "100 samples, pre-quantization " << pre << " (<= 1e-6), after PNG " << post * 65535.0
    << "/65535 (<= 3/65535)";
  o.detail = d.str();
  o.values = {{"pre_quantization", pre}, {"post_png", post}};
  return o;
}

// ---------------------------------------------------------------- 4

Outcome criterion_metrics(const DatasetManifest& standard) {
  bool oracle_zero = true;
  Method oracle;
  oracle.kind = MethodKind::kOracle;
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    const ErrorSummary r = evaluate_method(standard, s, oracle);
    oracle_zero = oracle_zero && r.mean == 0.0 && r.median == 0.0 && r.worst25 == 0.0 &&
                  r.best25 == 0.0;
  }

  bool invariant = true;
  Rng rng(404);
  for (std::uint64_t seed = 1; seed <= 100 && invariant; ++seed) {
    const auto gt = random_buffer<IlluminationMap>(16, 16, seed, 0.05, 4.0);
    const auto pred = random_buffer<IlluminationMap>(16, 16, seed + 1000, 0.05, 4.0);
    const AngularErrorField base = angular_error_map(gt, pred);
    for (double c : {rng.uniform(1e-3, 1e3), 2.0, 0.125}) {
      IlluminationMap scaled = pred;
      for (double& v : scaled.data()) v *= c;
      const AngularErrorField e = angular_error_map(gt, scaled);
      invariant = invariant && std::memcmp(e.data().data(), base.data().data(),
                                           base.data().size() * sizeof(double)) == 0;
    }
  }

  bool summary_ok = true;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.index(80);
    std::vector<std::pair<std::string, double>> errors;
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = rng.uniform(0.0, 40.0);
      errors.push_back({"s" + std::to_string(i), e});
      v.push_back(e);
    }
    std::sort(v.begin(), v.end());
    const std::size_t q = (n + 3) / 4;
    double total = 0.0, lo = 0.0, hi = 0.0;
    for (double e : v) total += e;
    for (std::size_t i = 0; i < q; ++i) {
      lo += v[i];
      hi += v[n - 1 - i];
    }
    const double median = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
    const ErrorSummary s = summarize(errors);
    summary_ok = summary_ok && s.mean == total / n && s.median == median && s.best25 == lo / q &&
                 s.worst25 == hi / q;
  }
  Outcome o;
  o.pass = oracle_zero && invariant && summary_ok;
  o.detail = std::string("oracle all-zero ") + (oracle_zero ? "yes" : "no") +
             ", scale invariance bit-exact " + (invariant ? "yes" : "no") +
             ", summary matches sort oracle " + (summary_ok ? "yes" : "no");
  o.values = {{"oracle_zero", oracle_zero},
              {"scale_invariant", invariant},
              {"summary_matches", summary_ok}};
  return o;
}

// ---------------------------------------------------------------- 5, 6

struct TrainedModel {
  std::string name;
  EstimatorParams params;
  TrainingLog log;
};

TrainedModel train_model(const std::string& name, const DatasetManifest& m, const TrainConfig& cfg,
                         const fs::path& work) {
  const auto t0 = Clock::now();
  std::cout << "  training " << name << " (" << cfg.epochs << " epochs)" << std::endl;
  TrainResult r = train(m, cfg, [&](const EpochRecord& rec) {
    if (rec.epoch % 25 == 0 || rec.epoch == cfg.epochs) {
      std::cout << "    epoch " << rec.epoch << " loss " << rec.train_loss << " val "
                << rec.val_mean_angular_error << std::endl;
    }
    return true;
  });
  save_params(work / (name + ".pwcm"), r.params);
  std::ofstream(work / (name + ".csv")) << r.log.to_csv();
  std::cout << "  " << name << " done in " << seconds_since(t0) << " s, best val "
            << r.log.best_val_error << " at epoch " << r.log.best_epoch << std::endl;
  return {name, std::move(r.params), std::move(r.log)};
}

Method trained_method(const TrainedModel& t, int input_size) {
  Method m;
  m.kind = MethodKind::kTrained;
  m.params = t.params;
  m.input_size = input_size;
  return m;
}

// Mean TV of the predicted maps over a split.
double mean_predicted_tv(const DatasetManifest& m, Split split, const Method& method,
                         const std::optional<BilateralConfig>& filter) {
  const auto samples = m.split(split);
  double total = 0.0;
  for (const ManifestSample* s : samples) {
    IlluminationMap pred = predict_map(method, read_image(m.resolve(s->input_png)));
    if (filter) pred = apply_postfilter(pred, *filter);
    total += map_tv(pred);
  }
  return total / static_cast<double>(samples.size());
}

json summary_json(const ErrorSummary& s) {
  return {{"mean", s.mean}, {"median", s.median}, {"worst25", s.worst25}, {"best25", s.best25}};
}

Outcome criterion_experiment(const DatasetManifest& m, const std::vector<TrainedModel>& models,
                             int input_size, std::string& table_out) {
  Method gw, wp;
  gw.kind = MethodKind::kGrayWorld;
  wp.kind = MethodKind::kWhitePatch;
  const ErrorSummary gw_s = evaluate_method(m, Split::kTest, gw);
  const ErrorSummary wp_s = evaluate_method(m, Split::kTest, wp);
  std::vector<std::pair<std::string, ErrorSummary>> rows = {{"gray_world", gw_s},
                                                            {"white_patch", wp_s}};
  const BilateralConfig bf;
  bool a = true, b = true, c = true;
  json values = {{"gray_world", summary_json(gw_s)}, {"white_patch", summary_json(wp_s)}};
  std::ostringstream d;
  const double best_baseline_mean = std::min(gw_s.mean, wp_s.mean);
  const double best_baseline_worst = std::min(gw_s.worst25, wp_s.worst25);
  for (const TrainedModel& t : models) {
    const Method method = trained_method(t, input_size);
    const ErrorSummary raw = evaluate_method(m, Split::kTest, method);
    const ErrorSummary filtered = evaluate_method(m, Split::kTest, method, bf);
    const double tv_raw = mean_predicted_tv(m, Split::kTest, method, std::nullopt);
    const double tv_bf = mean_predicted_tv(m, Split::kTest, method, bf);
    rows.push_back({t.name, raw});
    rows.push_back({t.name + "+bf", filtered});

    const double gain = 1.0 - raw.mean / best_baseline_mean;
    const bool ok_a = raw.mean <= 0.7 * gw_s.mean && raw.mean <= 0.7 * wp_s.mean;
    const bool ok_b = raw.worst25 < best_baseline_worst;
    const bool ok_c = filtered.mean <= 1.02 * raw.mean && tv_bf < tv_raw;
    a = a && ok_a;
    b = b && ok_b;
    c = c && ok_c;
    d << t.name << ": mean " << raw.mean << " (" << 100.0 * gain
      << "% below best baseline, need >= 30%) " << (ok_a ? "ok" : "MISS") << "; W.25% "
      << raw.worst25 << " vs " << best_baseline_worst << " " << (ok_b ? "ok" : "MISS")
      << "; filtered mean " << filtered.mean << ", TV " << tv_raw << " -> " << tv_bf << " "
      << (ok_c ? "ok" : "MISS") << ". ";
    values[t.name] = summary_json(raw);
    values[t.name + "+bf"] = summary_json(filtered);
    values[t.name]["tv"] = tv_raw;
    values[t.name + "+bf"]["tv"] = tv_bf;
  }
  table_out = summary_table(rows);
  Outcome o;
  o.pass = a && b && c;
  o.detail = d.str() + "(a) " + (a ? "pass" : "fail") + " (b) " + (b ? "pass" : "fail") +
             " (c) " + (c ? "pass" : "fail");
  o.values = values;
  return o;
}

Outcome criterion_tv(const DatasetManifest& m, const TrainedModel& v2, const TrainedModel& flat,
                     int input_size) {
  const double tv_v2 = mean_predicted_tv(m, Split::kVal, trained_method(v2, input_size),
                                         std::nullopt);
  const double tv_flat = mean_predicted_tv(m, Split::kVal, trained_method(flat, input_size),
                                           std::nullopt);
  Outcome o;
  o.pass = tv_v2 < tv_flat;
  std::ostringstream d;
  d << "val mean map TV " << tv_v2 << " with lambda 2e-3 vs " << tv_flat << " with lambda 0";
  o.detail = d.str();
  o.values = {{"tv_pwcc_v2", tv_v2}, {"tv_lambda0", tv_flat}};
  return o;
}

// ---------------------------------------------------------------- 7

Outcome criterion_smoothing() {
  const AlphaMap raw(512, 256, 0.5);
  std::vector<double> d;
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    const AlphaMap s = smooth_alpha(raw, 10.0, seed);
    for (double v : s.data()) d.push_back(v - 0.5);
  }
  const double n = static_cast<double>(d.size());
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : d) {
    const double e = x - mean;
    m2 += e * e;
    m3 += e * e * e;
    m4 += e * e * e * e;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double sd = std::sqrt(m2);
  const double skew = m3 / (m2 * sd);
  const double kurt = m4 / (m2 * m2) - 3.0;
  Outcome o;
  o.pass = n >= 1e5 && std::abs(skew) < 0.1 && std::abs(kurt) < 0.2 && sd >= 0.045 && sd <= 0.055;
  std::ostringstream msg;
  msg << static_cast<long>(n) << " samples: std " << sd << " (in [0.045, 0.055]), skew " << skew
      << " (|.| < 0.1), excess kurtosis " << kurt << " (|.| < 0.2)";
  o.detail = msg.str();
  o.values = {{"n", n}, {"std", sd}, {"skewness", skew}, {"excess_kurtosis", kurt}};
  return o;
}

// ---------------------------------------------------------------- 8

// Every file under dir, keyed by relative path.
std::map<std::string, std::vector<std::uint8_t>> tree_bytes(const fs::path& dir) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_bytes(e.path());
  }
  return out;
}

Outcome criterion_determinism(const fs::path& work) {
  SynthConfig sc;
  sc.count = 12;
  sc.width = 16;
  sc.height = 16;
  sc.seed = 99;
  TrainConfig tc = preset_pwcc_v2();
  tc.epochs = 3;
  tc.decay_start_epoch = 2;
  tc.input_size = 16;

  std::vector<std::map<std::string, std::vector<std::uint8_t>>> trees;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = work / ("determinism_" + std::to_string(run));
    fs::remove_all(dir);
    const DatasetManifest m = generate_dataset(sc, dir / "data").manifest;
    const TrainResult r = train(m, tc);
    save_params(dir / "model.pwcm", r.params);
    std::ofstream(dir / "train.csv") << r.log.to_csv();
    Method method;
    method.kind = MethodKind::kTrained;
    method.params = r.params;
    method.input_size = 16;
    const ErrorSummary s = evaluate_method(m, Split::kTest, method, BilateralConfig{});
    std::ofstream(dir / "eval.json") << summary_to_json(s, "trained+bf", "test");
    trees.push_back(tree_bytes(dir));
  }
  std::vector<std::string> differing;
  for (const auto& [name, bytes] : trees[0]) {
    auto it = trees[1].find(name);
    if (it == trees[1].end() || it->second != bytes) differing.push_back(name);
  }
  if (trees[1].size() != trees[0].size()) differing.push_back("(file set)");
  Outcome o;
  o.pass = differing.empty() && trees[0].count("data/manifest.json") &&
           trees[0].count("model.pwcm") && trees[0].count("eval.json");
  std::ostringstream d;
  d << trees[0].size() << " files compared (manifest, samples, model, log, report), "
    << differing.size() << " differ";
  if (!differing.empty()) d << ", first: " << differing.front();
  o.detail = d.str();
  o.values = {{"files", trees[0].size()}, {"differing", differing}};
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pwcc acceptance suite"};
  fs::path work = "acceptance";
  int epochs = 300;
  std::set<int> only;
  app.add_option("--work-dir", work, "Scratch directory for datasets and models");
  app.add_option("--epochs", epochs, "Training epochs for the end-to-end runs")
      ->capture_default_str();
  app.add_option("--only", only, "Run only these criteria (1-8)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  fs::create_directories(work);
  auto wanted = [&](int k) { return only.empty() || only.contains(k); };
  std::map<int, Outcome> results;
  json report = json::object();
  const auto start = Clock::now();

  auto run = [&](int k, const std::function<Outcome()>& fn) {
    if (!wanted(k)) return;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail
              << std::endl;
    results[k] = o;
    report[std::to_string(k)] = {{"pass", o.pass}, {"detail", o.detail}, {"values", o.values}};
  };

  run(1, criterion_gradients);
  run(2, criterion_bilateral);
  run(3, [&] { return criterion_reconstruction(work); });
  run(7, criterion_smoothing);
  run(8, [&] { return criterion_determinism(work); });

  // The standard synthetic set backs criteria 4 to 6.
  std::optional<DatasetManifest> standard;
  if (wanted(4) || wanted(5) || wanted(6)) {
    SynthConfig sc;  // 400 samples, 64x64, all alpha kinds, [0.4, 1.6], 0.75:0.2:0.05
    fs::remove_all(work / "standard");
    standard = generate_dataset(sc, work / "standard").manifest;
  }
  run(4, [&] { return criterion_metrics(*standard); });

  if (wanted(5) || wanted(6)) {
    TrainConfig v1 = preset_pwcc_v1();
    TrainConfig v2 = preset_pwcc_v2();
    v1.epochs = v2.epochs = epochs;
    v1.decay_start_epoch = v2.decay_start_epoch = std::min(v1.decay_start_epoch, epochs);
    TrainConfig flat = v2;
    flat.lambda_tv = 0.0;

    std::vector<TrainedModel> models;
    std::optional<TrainedModel> flat_model;
    try {
      if (wanted(5)) models.push_back(train_model("pwcc_v1", *standard, v1, work));
      models.push_back(train_model("pwcc_v2", *standard, v2, work));
      if (wanted(6)) flat_model = train_model("pwcc_v2_lambda0", *standard, flat, work);
    } catch (const std::exception& e) {
      std::cout << "  training failed: " << e.what() << std::endl;
    }
    std::string table;
    run(5, [&] {
      if (models.size() != 2) throw std::runtime_error("training did not complete");
      return criterion_experiment(*standard, models, v1.input_size, table);
    });
    if (!table.empty()) {
      std::cout << "\ntest split (" << standard->split(Split::kTest).size() << " images)\n"
                << table << std::endl;
      std::ofstream(work / "table.txt") << table;
    }
    run(6, [&] {
      if (!flat_model || models.empty()) throw std::runtime_error("training did not complete");
      return criterion_tv(*standard, models.back(), *flat_model, v2.input_size);
    });
  }

  int failed = 0;
  for (const auto& [k, o] : results) failed += o.pass ? 0 : 1;
  report["seconds"] = seconds_since(start);
  std::ofstream(work / "report.json") << report.dump(2) << "\n";
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed ("
            << seconds_since(start) << " s)" << std::endl;
  return failed == 0 ? 0 : 1;
}
