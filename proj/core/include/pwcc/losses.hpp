#pragma once

#include "pwcc/image.hpp"

namespace pwcc {

struct LossValue {
  double value = 0.0;
  ChromaImage grad;
};

struct LossReport {
  double l2 = 0.0;
  double tv = 0.0;
  double total = 0.0;
  double lambda_tv = 0.0;
};

struct CombinedLoss {
  LossReport report;
  ChromaImage grad;
};

// Mean over all H*W*2 entries of (pred - target)^2.
LossValue l2_loss(const ChromaImage& pred, const ChromaImage& target);

// Anisotropic total variation with forward differences and no wraparound,
// summed over both channels and divided by H*W. The subgradient of |0| is 0.
LossValue tv_loss(const ChromaImage& pred);

// total = l2 + lambda_tv * tv; gradients combine the same way.
CombinedLoss combined_loss(const ChromaImage& pred, const ChromaImage& target, double lambda_tv);

}  // namespace pwcc
