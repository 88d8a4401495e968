#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ttc/errors.hpp"

namespace ttc {

// Dense H x W x C grid of real samples. Storage is planar: channel c is a
// row-major H x W plane starting at c * H * W. Images, feature maps, eta/TTC
// maps and probability maps all use this type.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int height, int width, int channels = 1, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t plane_size() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  double at(int c, int y, int x) const { return data_[index(c, y, x)]; }
  double& operator()(int y, int x) { return data_[index(0, y, x)]; }
  double operator()(int y, int x) const { return data_[index(0, y, x)]; }

  std::span<double> plane(int c) { return {data_.data() + c * plane_size(), plane_size()}; }
  std::span<const double> plane(int c) const {
    return {data_.data() + c * plane_size(), plane_size()};
  }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const ImageBuffer& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }
  void fill(double value);
  bool all_finite() const;

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Per-pixel boolean map (validity masks, geofences, GT thresholds).
class Mask {
 public:
  Mask() = default;
  Mask(int height, int width, bool fill = false);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  bool operator()(int y, int x) const { return data_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int y, int x, bool value) { data_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0; }
  bool operator[](std::size_t i) const { return data_[i] != 0; }
  void set(std::size_t i, bool value) { data_[i] = value ? 1 : 0; }

  std::size_t count() const;
  bool same_shape(const ImageBuffer& img) const {
    return height_ == img.height() && width_ == img.width();
  }
  bool same_shape(const Mask& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

// Throws ShapeError when the spatial extents differ.
void require_same_extent(const ImageBuffer& a, const ImageBuffer& b, const char* what);
void require_same_extent(const ImageBuffer& a, const Mask& m, const char* what);

}  // namespace ttc
