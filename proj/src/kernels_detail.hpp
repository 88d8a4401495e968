#pragma once

#include <cmath>
#include <span>
#include <string>

#include "ttc/kernels.hpp"

namespace ttc::kernels::detail {

// Two bilinear taps along one axis. Index -1 marks a tap that reads zero.
struct Taps {
  int i0 = -1;
  int i1 = -1;
  double w0 = 0.0;
  double w1 = 0.0;
};

inline Taps make_taps(double src, int n, Boundary boundary) {
  Taps t;
  if (n <= 0) return t;
  if (boundary == Boundary::clamp) {
    if (src <= 0.0) src = 0.0;
    if (src >= n - 1) src = n - 1;
    const int i0 = static_cast<int>(std::floor(src));
    t.i0 = i0;
    t.i1 = i0 + 1 < n ? i0 + 1 : i0;
    t.w1 = src - i0;
    t.w0 = 1.0 - t.w1;
    return t;
  }
  const double fl = std::floor(src);
  if (fl < -1.0 || fl > n - 1) return t;
  const int i0 = static_cast<int>(fl);
  t.w1 = src - fl;
  t.w0 = 1.0 - t.w1;
  t.i0 = (i0 >= 0 && i0 < n) ? i0 : -1;
  t.i1 = (i0 + 1 >= 0 && i0 + 1 < n) ? i0 + 1 : -1;
  if (t.i0 < 0) t.w0 = 0.0;
  if (t.i1 < 0) t.w1 = 0.0;
  return t;
}

inline void check_warp_shapes(const ImageBuffer& in, const ImageBuffer& out) {
  if (in.channels() != out.channels()) {
    throw ShapeError("affine_warp: channel count mismatch");
  }
}

inline void check_conv_shapes(const ImageBuffer& in, std::span<const double> weight,
                              const ConvShape& s) {
  if (in.channels() != s.in_channels) {
    throw ShapeError("conv2d: input has " + std::to_string(in.channels()) + " channels, layer expects " +
                     std::to_string(s.in_channels));
  }
  if (weight.size() != static_cast<std::size_t>(s.weight_count())) {
    throw ShapeError("conv2d: weight size mismatch");
  }
}

}  // namespace ttc::kernels::detail
