#pragma once

// Data-parallel inner loops. Every kernel exists twice: the default
// OpenMP-parallel version in ttc::kernels and a straightforward serial
// reference in ttc::kernels::serial that tests and the kernel benchmark
// compare against. Parallel kernels partition work so that each output value
// is computed by the same arithmetic sequence whatever the thread count.

#include <span>

#include "ttc/image.hpp"

namespace ttc::kernels {

// Source coordinate along one axis as an affine function of the destination
// coordinate: src = scale * dst + offset.
struct AxisMap {
  double scale = 1.0;
  double offset = 0.0;
  double operator()(int dst) const { return scale * dst + offset; }
};

enum class Boundary {
  zero,   // taps outside the input contribute 0
  clamp,  // taps are clamped to the nearest edge sample
};

// out(c, y, x) = bilinear sample of in(c) at (ymap(y), xmap(x)). `out` must be
// allocated with the destination shape and the same channel count as `in`.
void affine_warp(const ImageBuffer& in, ImageBuffer& out, AxisMap ymap, AxisMap xmap,
                 Boundary boundary);
// Transpose of affine_warp: accumulates into `din` (input shape).
void affine_warp_adjoint(const ImageBuffer& dout, ImageBuffer& din, AxisMap ymap, AxisMap xmap,
                         Boundary boundary);

struct ConvShape {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  int stride = 1;
  int pad = 1;

  int out_extent(int n) const { return (n + 2 * pad - kernel) / stride + 1; }
  int weight_count() const { return out_channels * in_channels * kernel * kernel; }
};

// Weights are laid out [out][in][ky][kx].
void conv2d_forward(const ImageBuffer& in, std::span<const double> weight,
                    std::span<const double> bias, const ConvShape& shape, ImageBuffer& out);
// Accumulates into dweight / dbias; writes (overwrites) din when non-null.
void conv2d_backward(const ImageBuffer& in, std::span<const double> weight, const ConvShape& shape,
                     const ImageBuffer& dout, ImageBuffer* din, std::span<double> dweight,
                     std::span<double> dbias);

namespace serial {

void affine_warp(const ImageBuffer& in, ImageBuffer& out, AxisMap ymap, AxisMap xmap,
                 Boundary boundary);
void affine_warp_adjoint(const ImageBuffer& dout, ImageBuffer& din, AxisMap ymap, AxisMap xmap,
                         Boundary boundary);
void conv2d_forward(const ImageBuffer& in, std::span<const double> weight,
                    std::span<const double> bias, const ConvShape& shape, ImageBuffer& out);
void conv2d_backward(const ImageBuffer& in, std::span<const double> weight, const ConvShape& shape,
                     const ImageBuffer& dout, ImageBuffer* din, std::span<double> dweight,
                     std::span<double> dbias);

}  // namespace serial

// Number of OpenMP threads parallel kernels may use (1 when built without
// OpenMP).
int max_threads();

}  // namespace ttc::kernels
