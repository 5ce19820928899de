#include "pwcc/losses.hpp"

#include <cmath>

namespace pwcc {

namespace {

double sign(double d) { return d > 0.0 ? 1.0 : d < 0.0 ? -1.0 : 0.0; }

}  // namespace

LossValue l2_loss(const ChromaImage& pred, const ChromaImage& target) {
  require_same_size(pred, target, "l2_loss");
  LossValue out{0.0, ChromaImage(pred.width(), pred.height())};
  const auto& p = pred.data();
  const auto& t = target.data();
  auto& g = out.grad.data();
  if (p.empty()) return out;
  const double n = static_cast<double>(p.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = p[k] - t[k];
    sum += d * d;
    g[k] = 2.0 * d / n;
  }
  out.value = sum / n;
  return out;
}

LossValue tv_loss(const ChromaImage& pred) {
  const int w = pred.width();
  const int h = pred.height();
  if (w < 1 || h < 1) throw ShapeError("tv_loss needs at least a 1x1 map");
  LossValue out{0.0, ChromaImage(w, h)};
  const double norm = 1.0 / (static_cast<double>(w) * h);
  double sum = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 2; ++c) {
        const double p = pred.at(x, y, c);
        if (x + 1 < w) {
          const double d = p - pred.at(x + 1, y, c);
          sum += std::abs(d);
          out.grad.at(x, y, c) += sign(d) * norm;
          out.grad.at(x + 1, y, c) -= sign(d) * norm;
        }
        if (y + 1 < h) {
          const double d = p - pred.at(x, y + 1, c);
          sum += std::abs(d);
          out.grad.at(x, y, c) += sign(d) * norm;
          out.grad.at(x, y + 1, c) -= sign(d) * norm;
        }
      }
    }
  }
  out.value = sum * norm;
  return out;
}

CombinedLoss combined_loss(const ChromaImage& pred, const ChromaImage& target, double lambda_tv) {
  if (!(lambda_tv >= 0.0)) throw InvalidArgumentError("lambda_tv must be >= 0");
  LossValue l2 = l2_loss(pred, target);
  CombinedLoss out;
  out.report.l2 = l2.value;
  out.report.lambda_tv = lambda_tv;
  const LossValue tv = tv_loss(pred);
  out.report.tv = tv.value;
  out.report.total = out.report.l2 + lambda_tv * out.report.tv;
  out.grad = std::move(l2.grad);
  auto& g = out.grad.data();
  const auto& gt = tv.grad.data();
  for (std::size_t k = 0; k < g.size(); ++k) g[k] += lambda_tv * gt[k];
  return out;
}

}  // namespace pwcc
