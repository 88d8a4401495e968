#pragma once

#include <cstddef>

#include "ttc/image.hpp"

namespace ttc::nn {

inline constexpr double kBceEpsilon = 1e-6;

struct LossResult {
  double loss = 0.0;
  ImageBuffer grad;  // d loss / d prediction, zero outside the mask
  std::size_t count = 0;
};

// Mean binary cross-entropy over the mask with predictions clamped to
// [eps, 1 - eps]. The gradient is exact (zero where the clamp is active).
// Throws DomainError on an empty mask.
LossResult bce_loss(const ImageBuffer& pred, const Mask& target, const Mask& valid);

// Mean BCE of sigmoid(logits), computed from the logits so no clamp is
// needed; grad is with respect to the logits ((p - t) / n) and stays
// informative when p saturates. Used for training.
LossResult bce_logits_loss(const ImageBuffer& logits, const Mask& target, const Mask& valid);

// Mean smooth-L1 over the mask: 0.5 r^2 for |r| < 1, |r| - 0.5 otherwise.
LossResult smooth_l1_loss(const ImageBuffer& pred, const ImageBuffer& target, const Mask& valid);

}  // namespace ttc::nn
