#pragma once

// Netpbm-family readers and writers: binary PPM (P6) for RGB images, binary
// PGM (P5) for 8-bit masks and labels, PFM for float maps.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ttc/image.hpp"

namespace ttc::io {

// 8-bit RGB, samples mapped from [0, 1] with rounding and clamping.
void write_ppm(const std::filesystem::path& path, const ImageBuffer& rgb);
ImageBuffer read_ppm(const std::filesystem::path& path);

struct Gray8 {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;
};

void write_pgm(const std::filesystem::path& path, const Gray8& image);
void write_pgm(const std::filesystem::path& path, const Mask& mask);  // 0 / 255
Gray8 read_pgm(const std::filesystem::path& path);
Mask read_mask_pgm(const std::filesystem::path& path);  // nonzero -> true

// Writes "Pf" (1 channel) or "PF" (3 channels), little-endian, bottom-up
// scanlines, samples as 32-bit floats.
void write_pfm(const std::filesystem::path& path, const ImageBuffer& map);
// Honors the endianness declared by the scale token. Throws FormatError on a
// malformed header, truncated payload or a channel count other than
// `expected_channels`.
ImageBuffer read_pfm(const std::filesystem::path& path, int expected_channels = 1);

}  // namespace ttc::io
