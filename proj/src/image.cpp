#include "ttc/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ttc {

ImageBuffer::ImageBuffer(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0 || channels < 0) {
    throw ShapeError("ImageBuffer: negative dimension");
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

void ImageBuffer::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool ImageBuffer::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Mask::Mask(int height, int width, bool fill) : height_(height), width_(width) {
  if (height < 0 || width < 0) throw ShapeError("Mask: negative dimension");
  data_.assign(static_cast<std::size_t>(height) * width, fill ? 1 : 0);
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

void require_same_extent(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ShapeError(std::string(what) + ": extent mismatch " + std::to_string(a.height()) + "x" +
                     std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                     std::to_string(b.width()));
  }
}

void require_same_extent(const ImageBuffer& a, const Mask& m, const char* what) {
  if (!m.same_shape(a)) {
    throw ShapeError(std::string(what) + ": mask extent " + std::to_string(m.height()) + "x" +
                     std::to_string(m.width()) + " does not match map " +
                     std::to_string(a.height()) + "x" + std::to_string(a.width()));
  }
}

}  // namespace ttc
