#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "pwcc/image.hpp"

namespace pwcc {

// One convolution of the estimator. Kernels are square with zero padding
// kernel / 2, so stride-1 layers keep the spatial size and stride-2 layers
// halve it.
struct LayerSpec {
  int in_channels;
  int out_channels;
  int kernel;
  int stride;
  bool relu;
};

// Mini U-Net: three encoder convs (two of them stride 2), a bottleneck conv,
// two decoder convs fed by nearest x2 upsampling concatenated with the
// matching encoder output, and a linear 1x1 head producing (u, v).
inline constexpr std::array<LayerSpec, 7> kArchitecture = {{
    {2, 8, 3, 1, true},
    {8, 16, 3, 2, true},
    {16, 32, 3, 2, true},
    {32, 32, 3, 1, true},
    {32 + 16, 16, 3, 1, true},
    {16 + 8, 8, 3, 1, true},
    {8, 2, 1, 1, false},
}};

inline constexpr int kLayerCount = static_cast<int>(kArchitecture.size());

template <class T>
struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<T> values;

  bool operator==(const Tensor&) const = default;
};

// Tensors in order w0, b0, w1, b1, ...; weights are [out, in, k, k] and
// biases [out].
template <class T>
struct ParamSet {
  std::vector<Tensor<T>> tensors;

  std::size_t scalar_count() const;
  Tensor<T>& weight(int layer) { return tensors[2 * static_cast<std::size_t>(layer)]; }
  const Tensor<T>& weight(int layer) const { return tensors[2 * static_cast<std::size_t>(layer)]; }
  Tensor<T>& bias(int layer) { return tensors[2 * static_cast<std::size_t>(layer) + 1]; }
  const Tensor<T>& bias(int layer) const { return tensors[2 * static_cast<std::size_t>(layer) + 1]; }

  // Flat views over every scalar, in tensor order.
  T& scalar(std::size_t index);
  T scalar(std::size_t index) const;

  bool operator==(const ParamSet&) const = default;
};

using EstimatorParams = ParamSet<float>;
template <class T>
using ParamGrads = ParamSet<T>;

// Zero-valued parameter set with the architecture's shapes.
template <class T>
ParamSet<T> zero_params();

std::size_t parameter_count();

// Weights ~ U(-a, a) with a = 1 / sqrt(fan_in); biases 0.
EstimatorParams init_params(std::uint64_t seed);

template <class To, class From>
ParamSet<To> convert_params(const ParamSet<From>& src);

bool all_finite(const EstimatorParams& params);

template <class T>
using Activation = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Intermediate state kept by forward() for backward().
template <class T>
struct ForwardCache {
  int side = 0;
  std::uint64_t params_fingerprint = 0;
  // Layer inputs in im2col form (for the 1x1 head, the plain input).
  std::array<Activation<T>, kArchitecture.size()> columns;
  // Post-activation outputs of the six ReLU layers.
  std::array<Activation<T>, kArchitecture.size()> outputs;
};

template <class T>
struct ForwardResult {
  ChromaImage pred;
  ForwardCache<T> cache;
};

// Input must be square with a side divisible by 4.
template <class T>
ForwardResult<T> forward(const ParamSet<T>& params, const ChromaImage& input);

// Gradients of sum(grad_out * pred) with respect to every parameter.
template <class T>
ParamGrads<T> backward(const ParamSet<T>& params, const ForwardCache<T>& cache,
                       const ChromaImage& grad_out);

template <class T>
std::uint64_t fingerprint(const ParamSet<T>& params);

// to_log_chroma -> forward -> from_log_chroma.
IlluminationMap infer(const EstimatorParams& params, const LinearImage& img,
                      double epsilon = 1e-6);

// "PWCM" container, little-endian:
//   "PWCM" | u32 version (1) | u32 tensor count |
//   per tensor: u32 rank | u32 dims[rank] | f32 payload[prod(dims)]
inline constexpr std::uint32_t kParamsFormatVersion = 1;

std::vector<std::uint8_t> encode_params(const EstimatorParams& params);
EstimatorParams decode_params(const std::vector<std::uint8_t>& bytes);
void save_params(const std::filesystem::path& path, const EstimatorParams& params);
EstimatorParams load_params(const std::filesystem::path& path);

}  // namespace pwcc
