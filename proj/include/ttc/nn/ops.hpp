#pragma once

// Parameter-free layers of the compact network with their backward passes.

#include "ttc/image.hpp"

namespace ttc::nn {

inline constexpr double kLeakySlope = 0.1;

ImageBuffer leaky_relu(const ImageBuffer& z);
// dz = dy * (z > 0 ? 1 : slope)
ImageBuffer leaky_relu_backward(const ImageBuffer& z, const ImageBuffer& dy);

ImageBuffer sigmoid(const ImageBuffer& z);
double sigmoid(double z);

// Channel concatenation of equally sized maps, and its inverse.
ImageBuffer concat_channels(const ImageBuffer& a, const ImageBuffer& b);
void split_channels(const ImageBuffer& ab, int a_channels, ImageBuffer& a, ImageBuffer& b);

// Nearest-neighbour upsampling by 2 to an explicit target extent
// (out(y, x) = in(min(y / 2, h - 1), min(x / 2, w - 1))).
ImageBuffer upsample_nearest(const ImageBuffer& in, int height, int width);
ImageBuffer upsample_nearest_adjoint(const ImageBuffer& grad, int in_height, int in_width);

ImageBuffer select_channel(const ImageBuffer& in, int channel);

}  // namespace ttc::nn
