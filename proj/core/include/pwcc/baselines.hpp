#pragma once

#include "pwcc/image.hpp"

namespace pwcc {

// Both estimators assume a single global illuminant and return a constant map
// of correcting gains anchored at green: multiplying the image by the map
// neutralizes the estimated illuminant.

// Channel means (mR, mG, mB) -> gains (mG / mR, 1, mG / mB). Throws
// EstimationError when a channel mean is <= 1e-8.
IlluminationMap gray_world(const LinearImage& img);

// Channel maxima -> gains (maxG / maxR, 1, maxG / maxB). Throws
// EstimationError when a channel maximum is 0.
IlluminationMap white_patch(const LinearImage& img);

}  // namespace pwcc
