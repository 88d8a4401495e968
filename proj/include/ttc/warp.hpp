#pragma once

// Geometric resampling of images and feature maps: scaling about the image
// center, sub-pixel shifts, 1.5x zero padding and its inverse crop. All warps
// use bilinear interpolation with zero boundary and are linear in the sample
// values; each has an adjoint used for back-propagation.

#include <string>

#include "ttc/image.hpp"

namespace ttc {

enum class WarpKind { scale, shift_h, shift_v };

std::string to_string(WarpKind kind);

// Task parameter applied to the second frame: a scale factor (dimensionless,
// > 0) or a horizontal / vertical shift in pixels.
struct WarpParam {
  WarpKind kind = WarpKind::scale;
  double value = 1.0;

  static WarpParam scale(double alpha) { return {WarpKind::scale, alpha}; }
  static WarpParam shift_h(double u) { return {WarpKind::shift_h, u}; }
  static WarpParam shift_v(double v) { return {WarpKind::shift_v, v}; }

  // Throws DomainError for scale <= 0 or non-finite values.
  void validate() const;
};

// Output pixel p samples the input at center + (p - center) / alpha, with
// center = (H/2 - 0.5, W/2 - 0.5). Content grows by alpha about the center.
ImageBuffer scale_about_center(const ImageBuffer& img, double alpha);
ImageBuffer scale_about_center_adjoint(const ImageBuffer& grad, double alpha);

// output(x, y) = input(x - du, y - dv).
ImageBuffer shift(const ImageBuffer& img, double du, double dv);
ImageBuffer shift_adjoint(const ImageBuffer& grad, double du, double dv);

ImageBuffer apply_warp(const ImageBuffer& img, const WarpParam& param);
ImageBuffer apply_warp_adjoint(const ImageBuffer& grad, const WarpParam& param);

struct PadRecord {
  int height = 0;
  int width = 0;
  int top = 0;
  int left = 0;
  int padded_height = 0;
  int padded_width = 0;
};

struct PaddedImage {
  ImageBuffer image;
  PadRecord record;
};

// Zero-pads to ceil(1.5 H) x ceil(1.5 W) with the input centered.
PadRecord pad_record_for(int height, int width);
PaddedImage pad_to_1p5(const ImageBuffer& img);
// Throws ShapeError when `img` does not have the padded extent of `record`.
ImageBuffer crop_back(const ImageBuffer& img, const PadRecord& record);
// Adjoint of crop_back: embeds into a zero canvas of the padded extent.
ImageBuffer embed_padded(const ImageBuffer& img, const PadRecord& record);

// Bilinear resize with half-pixel centers and edge clamping.
ImageBuffer resize_bilinear(const ImageBuffer& img, int height, int width);
ImageBuffer resize_bilinear_adjoint(const ImageBuffer& grad, int in_height, int in_width);

}  // namespace ttc
