#include "pwcc/estimator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "pwcc/color.hpp"
#include "pwcc/error.hpp"
#include "pwcc/rng.hpp"

namespace pwcc {

namespace {

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

std::size_t weight_size(const LayerSpec& l) {
  return static_cast<std::size_t>(l.out_channels) * l.in_channels * l.kernel * l.kernel;
}

template <class T>
Eigen::Map<const Matrix<T>> weight_matrix(const ParamSet<T>& p, int layer) {
  const LayerSpec& l = kArchitecture[static_cast<std::size_t>(layer)];
  return Eigen::Map<const Matrix<T>>(p.weight(layer).values.data(), l.out_channels,
                                     static_cast<Eigen::Index>(l.in_channels) * l.kernel * l.kernel);
}

template <class T>
Eigen::Map<const Vector<T>> bias_vector(const ParamSet<T>& p, int layer) {
  const LayerSpec& l = kArchitecture[static_cast<std::size_t>(layer)];
  return Eigen::Map<const Vector<T>>(p.bias(layer).values.data(), l.out_channels);
}

int output_side(const LayerSpec& l, int side) {
  const int pad = l.kernel / 2;
  return (side + 2 * pad - l.kernel) / l.stride + 1;
}

// Unfolds a (C x side*side) activation into (C*k*k x out*out) patch columns.
template <class T>
void im2col(const Activation<T>& in, int side, const LayerSpec& l, Activation<T>& col) {
  const int k = l.kernel;
  const int pad = k / 2;
  const int out = output_side(l, side);
  const Eigen::Index channels = in.rows();
  col.resize(channels * k * k, static_cast<Eigen::Index>(out) * out);
  for (Eigen::Index ci = 0; ci < channels; ++ci) {
    const T* src = in.row(ci).data();
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* dst = col.row((ci * k + ky) * k + kx).data();
        for (int oy = 0; oy < out; ++oy) {
          const int iy = oy * l.stride + ky - pad;
          T* row = dst + static_cast<std::ptrdiff_t>(oy) * out;
          if (iy < 0 || iy >= side) {
            std::fill(row, row + out, T(0));
            continue;
          }
          const T* srow = src + static_cast<std::ptrdiff_t>(iy) * side;
          // Output columns whose input column lies inside the image.
          const int lo = std::max(0, (pad - kx + l.stride - 1) / l.stride);
          const int hi = std::min(out, (side - 1 + pad - kx) / l.stride + 1);
          std::fill(row, row + lo, T(0));
          if (l.stride == 1) {
            std::copy(srow + lo + kx - pad, srow + hi + kx - pad, row + lo);
          } else {
            for (int ox = lo; ox < hi; ++ox) row[ox] = srow[ox * l.stride + kx - pad];
          }
          std::fill(row + std::max(lo, hi), row + out, T(0));
        }
      }
    }
  }
}

// Adjoint of im2col: scatters patch-column gradients back onto the input.
template <class T>
Activation<T> col2im(const Activation<T>& col, int channels, int side, const LayerSpec& l) {
  const int k = l.kernel;
  const int pad = k / 2;
  const int out = output_side(l, side);
  Activation<T> in = Activation<T>::Zero(channels, static_cast<Eigen::Index>(side) * side);
  for (int ci = 0; ci < channels; ++ci) {
    T* dst = in.row(ci).data();
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = col.row((ci * k + ky) * k + kx).data();
        for (int oy = 0; oy < out; ++oy) {
          const int iy = oy * l.stride + ky - pad;
          if (iy < 0 || iy >= side) continue;
          const T* srow = src + static_cast<std::ptrdiff_t>(oy) * out;
          T* drow = dst + static_cast<std::ptrdiff_t>(iy) * side;
          const int lo = std::max(0, (pad - kx + l.stride - 1) / l.stride);
          const int hi = std::min(out, (side - 1 + pad - kx) / l.stride + 1);
          for (int ox = lo; ox < hi; ++ox) drow[ox * l.stride + kx - pad] += srow[ox];
        }
      }
    }
  }
  return in;
}

template <class T>
Activation<T> upsample2(const Activation<T>& in, int side) {
  const int big = 2 * side;
  Activation<T> out(in.rows(), static_cast<Eigen::Index>(big) * big);
  for (Eigen::Index c = 0; c < in.rows(); ++c) {
    const T* src = in.row(c).data();
    T* dst = out.row(c).data();
    for (int y = 0; y < big; ++y) {
      for (int x = 0; x < big; ++x) dst[y * big + x] = src[(y / 2) * side + x / 2];
    }
  }
  return out;
}

// Adjoint of nearest x2 upsampling: each coarse cell sums its four children.
template <class T>
Activation<T> upsample2_adjoint(const Activation<T>& grad, int side) {
  const int big = 2 * side;
  Activation<T> out = Activation<T>::Zero(grad.rows(), static_cast<Eigen::Index>(side) * side);
  for (Eigen::Index c = 0; c < grad.rows(); ++c) {
    const T* src = grad.row(c).data();
    T* dst = out.row(c).data();
    for (int y = 0; y < big; ++y) {
      for (int x = 0; x < big; ++x) dst[(y / 2) * side + x / 2] += src[y * big + x];
    }
  }
  return out;
}

template <class T>
Activation<T> stack_rows(const Activation<T>& top, const Activation<T>& bottom) {
  Activation<T> out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

// Runs one layer: caches its im2col input, returns the activation.
template <class T>
Activation<T> conv_forward(const ParamSet<T>& p, int layer, const Activation<T>& in, int side,
                           ForwardCache<T>& cache) {
  const LayerSpec& l = kArchitecture[static_cast<std::size_t>(layer)];
  Activation<T>& col = cache.columns[static_cast<std::size_t>(layer)];
  if (l.kernel == 1 && l.stride == 1) {
    col = in;
  } else {
    im2col(in, side, l, col);
  }
  Activation<T> z = weight_matrix(p, layer) * col;
  z.colwise() += bias_vector(p, layer);
  if (l.relu) z = z.cwiseMax(T(0));
  return z;
}

// Back through one layer given dL/d(activation). Writes the parameter
// gradients and returns dL/d(layer input).
template <class T>
Activation<T> conv_backward(const ParamSet<T>& p, int layer, const ForwardCache<T>& cache,
                            Activation<T> grad, int in_side, ParamSet<T>& grads,
                            bool need_input_grad = true) {
  const LayerSpec& l = kArchitecture[static_cast<std::size_t>(layer)];
  const auto li = static_cast<std::size_t>(layer);
  if (l.relu) {
    grad = (cache.outputs[li].array() > T(0)).select(grad, T(0));
  }
  const Activation<T>& col = cache.columns[li];
  Eigen::Map<Matrix<T>> dw(grads.weight(layer).values.data(), l.out_channels, col.rows());
  Eigen::Map<Vector<T>> db(grads.bias(layer).values.data(), l.out_channels);
  dw.noalias() = grad * col.transpose();
  db = grad.rowwise().sum();
  if (!need_input_grad) return {};
  Activation<T> dcol = weight_matrix(p, layer).transpose() * grad;
  if (l.kernel == 1 && l.stride == 1) return dcol;
  return col2im(dcol, l.in_channels, in_side, l);
}

template <class T>
void check_shapes(const ParamSet<T>& p) {
  if (p.tensors.size() != 2 * kArchitecture.size()) {
    throw ConsistencyError("parameter set has " + std::to_string(p.tensors.size()) +
                           " tensors, expected " + std::to_string(2 * kArchitecture.size()));
  }
  for (int i = 0; i < kLayerCount; ++i) {
    const LayerSpec& l = kArchitecture[static_cast<std::size_t>(i)];
    if (p.weight(i).values.size() != weight_size(l) ||
        p.bias(i).values.size() != static_cast<std::size_t>(l.out_channels)) {
      throw ConsistencyError("parameter tensor size mismatch at layer " + std::to_string(i));
    }
  }
}

}  // namespace

template <class T>
std::size_t ParamSet<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.values.size();
  return n;
}

template <class T>
T& ParamSet<T>::scalar(std::size_t index) {
  for (auto& t : tensors) {
    if (index < t.values.size()) return t.values[index];
    index -= t.values.size();
  }
  throw InvalidArgumentError("parameter index out of range");
}

template <class T>
T ParamSet<T>::scalar(std::size_t index) const {
  return const_cast<ParamSet<T>*>(this)->scalar(index);
}

template <class T>
ParamSet<T> zero_params() {
  ParamSet<T> p;
  for (const LayerSpec& l : kArchitecture) {
    Tensor<T> w;
    w.shape = {static_cast<std::uint32_t>(l.out_channels), static_cast<std::uint32_t>(l.in_channels),
               static_cast<std::uint32_t>(l.kernel), static_cast<std::uint32_t>(l.kernel)};
    w.values.assign(weight_size(l), T(0));
    Tensor<T> b;
    b.shape = {static_cast<std::uint32_t>(l.out_channels)};
    b.values.assign(static_cast<std::size_t>(l.out_channels), T(0));
    p.tensors.push_back(std::move(w));
    p.tensors.push_back(std::move(b));
  }
  return p;
}

std::size_t parameter_count() {
  std::size_t n = 0;
  for (const LayerSpec& l : kArchitecture) n += weight_size(l) + static_cast<std::size_t>(l.out_channels);
  return n;
}

EstimatorParams init_params(std::uint64_t seed) {
  EstimatorParams p = zero_params<float>();
  Rng rng(seed);
  for (int i = 0; i < kLayerCount; ++i) {
    const LayerSpec& l = kArchitecture[static_cast<std::size_t>(i)];
    const double fan_in = static_cast<double>(l.in_channels) * l.kernel * l.kernel;
    const double bound = 1.0 / std::sqrt(fan_in);
    for (float& w : p.weight(i).values) w = static_cast<float>(rng.uniform(-bound, bound));
  }
  return p;
}

template <class To, class From>
ParamSet<To> convert_params(const ParamSet<From>& src) {
  ParamSet<To> out;
  out.tensors.reserve(src.tensors.size());
  for (const auto& t : src.tensors) {
    Tensor<To> c;
    c.shape = t.shape;
    c.values.assign(t.values.begin(), t.values.end());
    out.tensors.push_back(std::move(c));
  }
  return out;
}

bool all_finite(const EstimatorParams& params) {
  for (const auto& t : params.tensors) {
    for (float v : t.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

template <class T>
std::uint64_t fingerprint(const ParamSet<T>& params) {
  // FNV-1a over the raw bytes of every scalar.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& t : params.tensors) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(t.values.data());
    for (std::size_t k = 0; k < t.values.size() * sizeof(T); ++k) {
      h ^= bytes[k];
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

template <class T>
ForwardResult<T> forward(const ParamSet<T>& params, const ChromaImage& input) {
  check_shapes(params);
  const int side = input.width();
  if (input.height() != side || side < 4 || side % 4 != 0) {
    throw ShapeError("estimator input must be square with a side divisible by 4, got " +
                     std::to_string(input.width()) + "x" + std::to_string(input.height()));
  }
  validate(input);
  ForwardResult<T> result;
  ForwardCache<T>& cache = result.cache;
  cache.side = side;
  cache.params_fingerprint = fingerprint(params);

  const Eigen::Index n = static_cast<Eigen::Index>(side) * side;
  Activation<T> a0(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a0(0, i) = static_cast<T>(input.data()[2 * i]);
    a0(1, i) = static_cast<T>(input.data()[2 * i + 1]);
  }
  const int half = side / 2;
  const int quarter = side / 4;

  auto& out = cache.outputs;
  out[0] = conv_forward(params, 0, a0, side, cache);
  out[1] = conv_forward(params, 1, out[0], side, cache);
  out[2] = conv_forward(params, 2, out[1], half, cache);
  out[3] = conv_forward(params, 3, out[2], quarter, cache);
  out[4] = conv_forward(params, 4, stack_rows(upsample2(out[3], quarter), out[1]), half, cache);
  out[5] = conv_forward(params, 5, stack_rows(upsample2(out[4], half), out[0]), side, cache);
  out[6] = conv_forward(params, 6, out[5], side, cache);

  result.pred = ChromaImage(side, side);
  for (Eigen::Index i = 0; i < n; ++i) {
    result.pred.data()[2 * i] = static_cast<double>(out[6](0, i));
    result.pred.data()[2 * i + 1] = static_cast<double>(out[6](1, i));
  }
  return result;
}

template <class T>
ParamGrads<T> backward(const ParamSet<T>& params, const ForwardCache<T>& cache,
                       const ChromaImage& grad_out) {
  check_shapes(params);
  if (cache.side == 0 || cache.params_fingerprint != fingerprint(params)) {
    throw ConsistencyError("forward cache was not produced with these parameters");
  }
  const int side = cache.side;
  if (grad_out.width() != side || grad_out.height() != side) {
    throw ShapeError("output gradient does not match the cached forward pass");
  }
  const int half = side / 2;
  const int quarter = side / 4;
  const Eigen::Index n = static_cast<Eigen::Index>(side) * side;

  ParamGrads<T> grads = zero_params<T>();
  Activation<T> g(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(0, i) = static_cast<T>(grad_out.data()[2 * i]);
    g(1, i) = static_cast<T>(grad_out.data()[2 * i + 1]);
  }

  const Activation<T> d5 = conv_backward(params, 6, cache, std::move(g), side, grads);

  // Layer 5 input = [up(out4) ; out0].
  const Activation<T> dcat5 = conv_backward(params, 5, cache, d5, side, grads);
  const int up4 = kArchitecture[4].out_channels;
  const Activation<T> d4 = upsample2_adjoint<T>(dcat5.topRows(up4), half);
  Activation<T> d0_skip = dcat5.bottomRows(dcat5.rows() - up4);

  // Layer 4 input = [up(out3) ; out1].
  const Activation<T> dcat4 = conv_backward(params, 4, cache, d4, half, grads);
  const int up3 = kArchitecture[3].out_channels;
  const Activation<T> d3 = upsample2_adjoint<T>(dcat4.topRows(up3), quarter);
  Activation<T> d1_skip = dcat4.bottomRows(dcat4.rows() - up3);

  const Activation<T> d2 = conv_backward(params, 3, cache, d3, quarter, grads);
  Activation<T> d1 = conv_backward(params, 2, cache, d2, half, grads);
  d1 += d1_skip;
  Activation<T> d0 = conv_backward(params, 1, cache, std::move(d1), side, grads);
  d0 += d0_skip;
  conv_backward(params, 0, cache, std::move(d0), side, grads, false);
  return grads;
}

IlluminationMap infer(const EstimatorParams& params, const LinearImage& img, double epsilon) {
  const ChromaImage uv = to_log_chroma(img, epsilon);
  return from_log_chroma(forward(params, uv).pred);
}

namespace {

constexpr char kParamsMagic[4] = {'P', 'W', 'C', 'M'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    if (bytes_.size() - pos_ < 4) throw TruncatedError("parameter file truncated");
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += 4;
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 4;
};

}  // namespace

std::vector<std::uint8_t> encode_params(const EstimatorParams& params) {
  std::vector<std::uint8_t> out(std::begin(kParamsMagic), std::end(kParamsMagic));
  put_u32(out, kParamsFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(params.tensors.size()));
  for (const auto& t : params.tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (std::uint32_t d : t.shape) put_u32(out, d);
    for (float v : t.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

EstimatorParams decode_params(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kParamsMagic, 4) != 0) {
    throw BadMagicError("parameter file: bad magic");
  }
  Reader r(bytes);
  const std::uint32_t version = r.u32();
  if (version != kParamsFormatVersion) {
    throw UnsupportedVersionError("parameter file: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  const EstimatorParams expected = zero_params<float>();
  if (count != expected.tensors.size()) {
    throw FormatError("parameter file: expected " + std::to_string(expected.tensors.size()) +
                      " tensors, found " + std::to_string(count));
  }
  EstimatorParams p;
  for (std::uint32_t i = 0; i < count; ++i) {
    Tensor<float> t;
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw FormatError("parameter file: implausible tensor rank");
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      t.shape.push_back(r.u32());
      n *= t.shape.back();
    }
    if (t.shape != expected.tensors[i].shape) {
      throw FormatError("parameter file: tensor " + std::to_string(i) +
                        " shape does not match the architecture");
    }
    t.values.resize(n);
    for (float& v : t.values) v = std::bit_cast<float>(r.u32());
    p.tensors.push_back(std::move(t));
  }
  if (!r.at_end()) throw FormatError("parameter file: trailing bytes after the last tensor");
  return p;
}

void save_params(const std::filesystem::path& path, const EstimatorParams& params) {
  const auto bytes = encode_params(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

EstimatorParams load_params(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw FileNotFoundError("no such model file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_params(bytes);
}

template struct ParamSet<float>;
template struct ParamSet<double>;
template ParamSet<float> zero_params<float>();
template ParamSet<double> zero_params<double>();
template ParamSet<double> convert_params<double, float>(const ParamSet<float>&);
template ParamSet<float> convert_params<float, double>(const ParamSet<double>&);
template std::uint64_t fingerprint(const ParamSet<float>&);
template std::uint64_t fingerprint(const ParamSet<double>&);
template ForwardResult<float> forward(const ParamSet<float>&, const ChromaImage&);
template ForwardResult<double> forward(const ParamSet<double>&, const ChromaImage&);
template ParamGrads<float> backward(const ParamSet<float>&, const ForwardCache<float>&,
                                    const ChromaImage&);
template ParamGrads<double> backward(const ParamSet<double>&, const ForwardCache<double>&,
                                     const ChromaImage&);

}  // namespace pwcc
