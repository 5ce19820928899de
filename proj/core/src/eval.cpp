#include "pwcc/eval.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "pwcc/baselines.hpp"
#include "pwcc/color.hpp"
#include "pwcc/image_io.hpp"
#include "pwcc/losses.hpp"
#include "pwcc/parallel.hpp"

namespace pwcc {

namespace {

// Direction of v at f32 resolution (the precision maps are stored in):
// dividing by the largest magnitude and rounding to float maps k * v and v
// to the same triple for any k > 0 unless a ratio sits within a few double
// ulps of a float rounding boundary.
std::array<double, 3> canonical(std::span<const double, 3> v) {
  const double m = std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
  return {static_cast<float>(v[0] / m), static_cast<float>(v[1] / m),
          static_cast<float>(v[2] / m)};
}

}  // namespace

AngularErrorField angular_error_map(const IlluminationMap& gt, const IlluminationMap& pred) {
  require_same_size(gt, pred, "angular_error_map");
  AngularErrorField out(gt.width(), gt.height());
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    const auto g = gt.pixel(i);
    const auto p = pred.pixel(i);
    const bool g_zero = g[0] == 0.0 && g[1] == 0.0 && g[2] == 0.0;
    const bool p_zero = p[0] == 0.0 && p[1] == 0.0 && p[2] == 0.0;
    if (g_zero || p_zero || !std::isfinite(g[0] + g[1] + g[2]) ||
        !std::isfinite(p[0] + p[1] + p[2])) {
      throw InvalidInputError("angular error undefined at pixel index " + std::to_string(i) +
                              " (x=" + std::to_string(i % gt.width()) +
                              ", y=" + std::to_string(i / gt.width()) + ")");
    }
    const auto a = canonical(g);
    const auto b = canonical(p);
    const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    const double na2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
    const double nb2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    // sqrt(x * x) == x in IEEE arithmetic, so equal directions give exactly 1.
    const double cosine = std::clamp(dot / std::sqrt(na2 * nb2), -1.0, 1.0);
    out.pixel(i)[0] = std::acos(cosine) * (180.0 / std::numbers::pi);
  }
  return out;
}

double image_error(const IlluminationMap& gt, const IlluminationMap& pred) {
  const AngularErrorField field = angular_error_map(gt, pred);
  if (field.empty()) throw InvalidArgumentError("image_error on an empty map");
  double sum = 0.0;
  for (double e : field.data()) sum += e;
  return sum / static_cast<double>(field.pixel_count());
}

ErrorSummary summarize(std::vector<std::pair<std::string, double>> errors) {
  if (errors.empty()) throw InvalidArgumentError("summarize needs at least one error");
  std::sort(errors.begin(), errors.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  ErrorSummary s;
  const std::size_t n = errors.size();
  double sum = 0.0;
  for (const auto& e : errors) sum += e.second;
  s.mean = sum / static_cast<double>(n);
  s.median = n % 2 == 1 ? errors[n / 2].second
                        : 0.5 * (errors[n / 2 - 1].second + errors[n / 2].second);
  const std::size_t quarter = (n + 3) / 4;
  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 0; k < quarter; ++k) {
    lo += errors[k].second;
    hi += errors[n - 1 - k].second;
  }
  s.best25 = lo / static_cast<double>(quarter);
  s.worst25 = hi / static_cast<double>(quarter);
  s.per_image = std::move(errors);
  return s;
}

MethodKind parse_method(std::string_view name) {
  if (name == "trained" || name == "model") return MethodKind::kTrained;
  if (name == "gray_world") return MethodKind::kGrayWorld;
  if (name == "white_patch") return MethodKind::kWhitePatch;
  if (name == "oracle") return MethodKind::kOracle;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::kTrained: return "trained";
    case MethodKind::kGrayWorld: return "gray_world";
    case MethodKind::kWhitePatch: return "white_patch";
    case MethodKind::kOracle: return "oracle";
  }
  return "?";
}

IlluminationMap predict_map(const Method& method, const LinearImage& input,
                            const IlluminationMap* gt) {
  switch (method.kind) {
    case MethodKind::kOracle:
      if (!gt) throw InvalidArgumentError("oracle method needs the ground-truth map");
      return *gt;
    case MethodKind::kGrayWorld:
      return reciprocal(gray_world(input));
    case MethodKind::kWhitePatch:
      return reciprocal(white_patch(input));
    case MethodKind::kTrained: {
      if (!method.params) throw ConfigError("trained method needs model parameters");
      const bool native = input.width() == input.height() && input.width() >= 4 &&
                          input.width() % 4 == 0;
      if (native) return infer(*method.params, input, method.epsilon);
      const LinearImage resized = resize_bilinear(input, method.input_size, method.input_size);
      const IlluminationMap small = infer(*method.params, resized, method.epsilon);
      return g_normalized(resize_bilinear(small, input.width(), input.height()));
    }
  }
  throw ConfigError("unknown method");
}

namespace {

[[noreturn]] void rethrow_with_context(const std::string& id) {
  try {
    throw;
  } catch (const FileNotFoundError& e) {
    throw FileNotFoundError("sample " + id + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError("sample " + id + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError("sample " + id + ": " + e.what());
  } catch (const ShapeError& e) {
    throw ShapeError("sample " + id + ": " + e.what());
  } catch (const EstimationError& e) {
    throw EstimationError("sample " + id + ": " + e.what());
  } catch (const InvalidInputError& e) {
    throw InvalidInputError("sample " + id + ": " + e.what());
  }
}

}  // namespace

ErrorSummary evaluate_method(const DatasetManifest& manifest, Split split, const Method& method,
                             const std::optional<BilateralConfig>& postfilter) {
  const auto samples = manifest.split(split);
  if (samples.empty()) {
    throw ConfigError("split '" + std::string(to_string(split)) + "' is empty");
  }
  if (postfilter) validate(*postfilter);
  std::vector<std::pair<std::string, double>> errors(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const ManifestSample& s = *samples[i];
    try {
      const LinearImage input = read_image(manifest.resolve(s.input_png));
      const IlluminationMap gt = read_illumination_map(manifest.resolve(s.gt_map_pwcc));
      require_same_size(input, gt, "input vs gt map");
      IlluminationMap pred = predict_map(method, input, &gt);
      if (postfilter) pred = apply_postfilter(pred, *postfilter);
      errors[i] = {s.id, image_error(gt, pred)};
    } catch (const Error&) {
      rethrow_with_context(s.id);
    }
  });
  return summarize(std::move(errors));
}

std::string summary_to_json(const ErrorSummary& summary, const std::string& method,
                            const std::string& split) {
  nlohmann::json per_image = nlohmann::json::array();
  for (const auto& [id, err] : summary.per_image) {
    per_image.push_back({{"id", id}, {"error", err}});
  }
  nlohmann::json doc = {{"method", method},
                        {"split", split},
                        {"n", summary.per_image.size()},
                        {"mean", summary.mean},
                        {"median", summary.median},
                        {"worst25", summary.worst25},
                        {"best25", summary.best25},
                        {"per_image", per_image}};
  return doc.dump(2) + "\n";
}

std::string summary_table(const std::vector<std::pair<std::string, ErrorSummary>>& rows) {
  std::size_t name_width = 6;
  for (const auto& r : rows) name_width = std::max(name_width, r.first.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s | %8s | %8s | %8s | %8s\n", static_cast<int>(name_width),
                "Method", "Mean", "Median", "W.25%", "B.25%");
  out << line;
  out << std::string(name_width, '-') << "-+-" << std::string(8, '-') << "-+-"
      << std::string(8, '-') << "-+-" << std::string(8, '-') << "-+-" << std::string(8, '-')
      << "\n";
  for (const auto& [name, s] : rows) {
    std::snprintf(line, sizeof line, "%-*s | %8.3f | %8.3f | %8.3f | %8.3f\n",
                  static_cast<int>(name_width), name.c_str(), s.mean, s.median, s.worst25,
                  s.best25);
    out << line;
  }
  return out.str();
}

double map_tv(const IlluminationMap& map) { return tv_loss(to_log_chroma(map)).value; }

}  // namespace pwcc
