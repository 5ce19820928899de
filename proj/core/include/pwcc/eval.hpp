#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pwcc/bilateral.hpp"
#include "pwcc/dataset.hpp"
#include "pwcc/estimator.hpp"
#include "pwcc/image.hpp"

namespace pwcc {

struct AngleTag {};
// Per-pixel recovery angular error in degrees.
using AngularErrorField = PixelBuffer<AngleTag, 1>;

// arccos(gt . pred / (|gt| |pred|)) in degrees, cosine clamped to [-1, 1].
// A zero-length gain vector is an InvalidInputError naming the pixel.
AngularErrorField angular_error_map(const IlluminationMap& gt, const IlluminationMap& pred);

// Mean of angular_error_map.
double image_error(const IlluminationMap& gt, const IlluminationMap& pred);

struct ErrorSummary {
  std::vector<std::pair<std::string, double>> per_image;
  double mean = 0.0;
  double median = 0.0;
  double worst25 = 0.0;
  double best25 = 0.0;
};

// Errors are ordered by (error, id); worst25 / best25 average the ceil(n/4)
// largest / smallest entries.
ErrorSummary summarize(std::vector<std::pair<std::string, double>> errors);

enum class MethodKind { kTrained, kGrayWorld, kWhitePatch, kOracle };

MethodKind parse_method(std::string_view name);
std::string_view to_string(MethodKind kind);

struct Method {
  MethodKind kind = MethodKind::kOracle;
  // Required for kTrained.
  std::optional<EstimatorParams> params;
  // Images that are not square with a side divisible by 4 are resampled to
  // this size for inference and the prediction resampled back.
  int input_size = 64;
  double epsilon = 1e-6;
};

// The method's illuminant-map estimate for one observation, in the same
// convention as SceneSample::gt_map (baseline gains are inverted).
IlluminationMap predict_map(const Method& method, const LinearImage& input,
                            const IlluminationMap* gt = nullptr);

ErrorSummary evaluate_method(const DatasetManifest& manifest, Split split, const Method& method,
                             const std::optional<BilateralConfig>& postfilter = std::nullopt);

// {"method", "split", "n", "mean", "median", "worst25", "best25",
//  "per_image": [{"id", "error"}...]} with sorted keys.
std::string summary_to_json(const ErrorSummary& summary, const std::string& method,
                            const std::string& split);

// Fixed-width table with the columns Method | Mean | Median | W.25% | B.25%.
std::string summary_table(const std::vector<std::pair<std::string, ErrorSummary>>& rows);

// Mean over pixels of the anisotropic TV of a map's (u, v) representation;
// used to compare how smooth predicted maps are.
double map_tv(const IlluminationMap& map);

}  // namespace pwcc
