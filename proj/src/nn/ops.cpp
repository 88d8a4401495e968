#include "ttc/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace ttc::nn {

ImageBuffer leaky_relu(const ImageBuffer& z) {
  ImageBuffer a = z;
  for (double& v : a.values()) v = v > 0.0 ? v : kLeakySlope * v;
  return a;
}

ImageBuffer leaky_relu_backward(const ImageBuffer& z, const ImageBuffer& dy) {
  if (!z.same_shape(dy)) throw ShapeError("leaky_relu_backward: shape mismatch");
  ImageBuffer dz = dy;
  const auto zv = z.values();
  auto dv = dz.values();
  for (std::size_t i = 0; i < dv.size(); ++i) {
    if (!(zv[i] > 0.0)) dv[i] *= kLeakySlope;
  }
  return dz;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

ImageBuffer sigmoid(const ImageBuffer& z) {
  ImageBuffer p = z;
  for (double& v : p.values()) v = sigmoid(v);
  return p;
}

ImageBuffer concat_channels(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_extent(a, b, "concat_channels");
  ImageBuffer out(a.height(), a.width(), a.channels() + b.channels());
  std::copy(a.values().begin(), a.values().end(), out.values().begin());
  std::copy(b.values().begin(), b.values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

void split_channels(const ImageBuffer& ab, int a_channels, ImageBuffer& a, ImageBuffer& b) {
  a = ImageBuffer(ab.height(), ab.width(), a_channels);
  b = ImageBuffer(ab.height(), ab.width(), ab.channels() - a_channels);
  std::copy(ab.values().begin(), ab.values().begin() + static_cast<std::ptrdiff_t>(a.size()), a.values().begin());
  std::copy(ab.values().begin() + static_cast<std::ptrdiff_t>(a.size()), ab.values().end(), b.values().begin());
}

ImageBuffer upsample_nearest(const ImageBuffer& in, int height, int width) {
  ImageBuffer out(height, width, in.channels());
  for (int c = 0; c < in.channels(); ++c) {
    for (int y = 0; y < height; ++y) {
      const int sy = std::min(y / 2, in.height() - 1);
      for (int x = 0; x < width; ++x) out.at(c, y, x) = in.at(c, sy, std::min(x / 2, in.width() - 1));
    }
  }
  return out;
}

ImageBuffer upsample_nearest_adjoint(const ImageBuffer& grad, int in_height, int in_width) {
  ImageBuffer out(in_height, in_width, grad.channels());
  for (int c = 0; c < grad.channels(); ++c) {
    for (int y = 0; y < grad.height(); ++y) {
      const int sy = std::min(y / 2, in_height - 1);
      for (int x = 0; x < grad.width(); ++x) out.at(c, sy, std::min(x / 2, in_width - 1)) += grad.at(c, y, x);
    }
  }
  return out;
}

ImageBuffer select_channel(const ImageBuffer& in, int channel) {
  ImageBuffer out(in.height(), in.width(), 1);
  const auto src = in.plane(channel);
  std::copy(src.begin(), src.end(), out.values().begin());
  return out;
}

}  // namespace ttc::nn
