#include "ttc/warp.hpp"

#include <cmath>

#include "ttc/kernels.hpp"

namespace ttc {

namespace {

using kernels::AxisMap;
using kernels::Boundary;

AxisMap scale_axis(int n, double alpha) {
  const double center = n / 2.0 - 0.5;
  return {1.0 / alpha, center * (1.0 - 1.0 / alpha)};
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("scale factor must be positive and finite, got " + std::to_string(alpha));
  }
}

AxisMap resize_axis(int in, int out) {
  const double s = static_cast<double>(in) / out;
  return {s, 0.5 * s - 0.5};
}

}  // namespace

std::string to_string(WarpKind kind) {
  switch (kind) {
    case WarpKind::scale:
      return "scale";
    case WarpKind::shift_h:
      return "shift_h";
    case WarpKind::shift_v:
      return "shift_v";
  }
  return "unknown";
}

void WarpParam::validate() const {
  if (!std::isfinite(value)) throw DomainError("warp parameter must be finite");
  if (kind == WarpKind::scale) require_alpha(value);
}

ImageBuffer scale_about_center(const ImageBuffer& img, double alpha) {
  require_alpha(alpha);
  ImageBuffer out(img.height(), img.width(), img.channels());
  kernels::affine_warp(img, out, scale_axis(img.height(), alpha), scale_axis(img.width(), alpha),
                       Boundary::zero);
  return out;
}

ImageBuffer scale_about_center_adjoint(const ImageBuffer& grad, double alpha) {
  require_alpha(alpha);
  ImageBuffer out(grad.height(), grad.width(), grad.channels());
  kernels::affine_warp_adjoint(grad, out, scale_axis(grad.height(), alpha),
                               scale_axis(grad.width(), alpha), Boundary::zero);
  return out;
}

ImageBuffer shift(const ImageBuffer& img, double du, double dv) {
  if (!std::isfinite(du) || !std::isfinite(dv)) throw DomainError("shift must be finite");
  ImageBuffer out(img.height(), img.width(), img.channels());
  kernels::affine_warp(img, out, {1.0, -dv}, {1.0, -du}, Boundary::zero);
  return out;
}

ImageBuffer shift_adjoint(const ImageBuffer& grad, double du, double dv) {
  ImageBuffer out(grad.height(), grad.width(), grad.channels());
  kernels::affine_warp_adjoint(grad, out, {1.0, -dv}, {1.0, -du}, Boundary::zero);
  return out;
}

ImageBuffer apply_warp(const ImageBuffer& img, const WarpParam& param) {
  param.validate();
  switch (param.kind) {
    case WarpKind::scale:
      return scale_about_center(img, param.value);
    case WarpKind::shift_h:
      return shift(img, param.value, 0.0);
    case WarpKind::shift_v:
      return shift(img, 0.0, param.value);
  }
  return img;
}

ImageBuffer apply_warp_adjoint(const ImageBuffer& grad, const WarpParam& param) {
  param.validate();
  switch (param.kind) {
    case WarpKind::scale:
      return scale_about_center_adjoint(grad, param.value);
    case WarpKind::shift_h:
      return shift_adjoint(grad, param.value, 0.0);
    case WarpKind::shift_v:
      return shift_adjoint(grad, 0.0, param.value);
  }
  return grad;
}

PadRecord pad_record_for(int height, int width) {
  PadRecord r;
  r.height = height;
  r.width = width;
  r.padded_height = (3 * height + 1) / 2;
  r.padded_width = (3 * width + 1) / 2;
  r.top = (r.padded_height - height) / 2;
  r.left = (r.padded_width - width) / 2;
  return r;
}

PaddedImage pad_to_1p5(const ImageBuffer& img) {
  const PadRecord r = pad_record_for(img.height(), img.width());
  return {embed_padded(img, r), r};
}

ImageBuffer embed_padded(const ImageBuffer& img, const PadRecord& r) {
  if (img.height() != r.height || img.width() != r.width) {
    throw ShapeError("embed_padded: image does not match pad record");
  }
  ImageBuffer out(r.padded_height, r.padded_width, img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) out.at(c, y + r.top, x + r.left) = img.at(c, y, x);
    }
  }
  return out;
}

ImageBuffer crop_back(const ImageBuffer& img, const PadRecord& r) {
  if (img.height() != r.padded_height || img.width() != r.padded_width) {
    throw ShapeError("crop_back: " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                     " does not match padded extent " + std::to_string(r.padded_height) + "x" +
                     std::to_string(r.padded_width));
  }
  ImageBuffer out(r.height, r.width, img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < r.height; ++y) {
      for (int x = 0; x < r.width; ++x) out.at(c, y, x) = img.at(c, y + r.top, x + r.left);
    }
  }
  return out;
}

ImageBuffer resize_bilinear(const ImageBuffer& img, int height, int width) {
  if (height <= 0 || width <= 0) throw ShapeError("resize_bilinear: non-positive target size");
  if (height == img.height() && width == img.width()) return img;
  ImageBuffer out(height, width, img.channels());
  kernels::affine_warp(img, out, resize_axis(img.height(), height), resize_axis(img.width(), width),
                       Boundary::clamp);
  return out;
}

ImageBuffer resize_bilinear_adjoint(const ImageBuffer& grad, int in_height, int in_width) {
  if (grad.height() == in_height && grad.width() == in_width) return grad;
  ImageBuffer out(in_height, in_width, grad.channels());
  kernels::affine_warp_adjoint(grad, out, resize_axis(in_height, grad.height()),
                               resize_axis(in_width, grad.width()), Boundary::clamp);
  return out;
}

}  // namespace ttc
