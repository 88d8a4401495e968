#include "ttc/nn/losses.hpp"
#include "ttc/nn/ops.hpp"

#include <algorithm>
#include <cmath>

namespace ttc::nn {

namespace {

std::size_t checked_count(const ImageBuffer& pred, const Mask& a, const Mask& valid, const char* what) {
  require_same_extent(pred, a, what);
  require_same_extent(pred, valid, what);
  if (pred.channels() != 1) throw ShapeError(std::string(what) + ": expected a single-channel map");
  const std::size_t n = valid.count();
  if (n == 0) throw DomainError(std::string(what) + ": empty mask");
  return n;
}

}  // namespace

LossResult bce_loss(const ImageBuffer& pred, const Mask& target, const Mask& valid) {
  const std::size_t n = checked_count(pred, target, valid, "bce_loss");
  LossResult r;
  r.count = n;
  r.grad = ImageBuffer(pred.height(), pred.width());
  const auto p = pred.values();
  auto g = r.grad.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!valid[i]) continue;
    const double pc = std::clamp(p[i], kBceEpsilon, 1.0 - kBceEpsilon);
    const bool clamped = pc != p[i];
    if (target[i]) {
      sum -= std::log(pc);
      if (!clamped) g[i] = -1.0 / (pc * static_cast<double>(n));
    } else {
      sum -= std::log(1.0 - pc);
      if (!clamped) g[i] = 1.0 / ((1.0 - pc) * static_cast<double>(n));
    }
  }
  r.loss = sum / static_cast<double>(n);
  return r;
}

LossResult bce_logits_loss(const ImageBuffer& logits, const Mask& target, const Mask& valid) {
  const std::size_t n = checked_count(logits, target, valid, "bce_logits_loss");
  LossResult r;
  r.count = n;
  r.grad = ImageBuffer(logits.height(), logits.width());
  const auto z = logits.values();
  auto g = r.grad.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!valid[i]) continue;
    const double t = target[i] ? 1.0 : 0.0;
    // -t log p - (1 - t) log(1 - p) = softplus(z) - t z
    sum += std::max(z[i], 0.0) - t * z[i] + std::log1p(std::exp(-std::abs(z[i])));
    g[i] = (sigmoid(z[i]) - t) / static_cast<double>(n);
  }
  r.loss = sum / static_cast<double>(n);
  return r;
}

LossResult smooth_l1_loss(const ImageBuffer& pred, const ImageBuffer& target, const Mask& valid) {
  if (!pred.same_shape(target)) throw ShapeError("smooth_l1_loss: maps differ in shape");
  require_same_extent(pred, valid, "smooth_l1_loss");
  const std::size_t n = valid.count();
  if (n == 0) throw DomainError("smooth_l1_loss: empty mask");
  LossResult r;
  r.count = n;
  r.grad = ImageBuffer(pred.height(), pred.width());
  const auto p = pred.values();
  const auto t = target.values();
  auto g = r.grad.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!valid[i]) continue;
    const double d = p[i] - t[i];
    if (std::abs(d) < 1.0) {
      sum += 0.5 * d * d;
      g[i] = d / static_cast<double>(n);
    } else {
      sum += std::abs(d) - 0.5;
      g[i] = (d > 0.0 ? 1.0 : -1.0) / static_cast<double>(n);
    }
  }
  r.loss = sum / static_cast<double>(n);
  return r;
}

}  // namespace ttc::nn
