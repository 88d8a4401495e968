#include "ttc/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

namespace ttc::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open for writing: " + path.string());
  return out;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Header tokens of a netpbm file; `pos` ends just past the single whitespace
// character that separates the header from the payload.
struct Header {
  std::vector<std::string> tokens;
  std::size_t payload = 0;
};

Header parse_header(const std::string& bytes, int token_count, const std::string& name) {
  Header h;
  std::size_t pos = 0;
  while (static_cast<int>(h.tokens.size()) < token_count) {
    while (pos < bytes.size() && (std::isspace(static_cast<unsigned char>(bytes[pos])) || bytes[pos] == '#')) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        ++pos;
      }
    }
    if (pos >= bytes.size()) throw FormatError(name + ": truncated header");
    std::size_t end = pos;
    while (end < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[end]))) ++end;
    h.tokens.push_back(bytes.substr(pos, end - pos));
    pos = end;
  }
  if (pos >= bytes.size()) throw FormatError(name + ": missing payload");
  h.payload = pos + 1;
  return h;
}

int parse_dim(const std::string& token, const std::string& name) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used != token.size() || v <= 0) throw FormatError(name + ": bad dimension '" + token + "'");
    return v;
  } catch (const std::logic_error&) {
    throw FormatError(name + ": bad dimension '" + token + "'");
  }
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const ImageBuffer& rgb) {
  if (rgb.channels() != 3) throw FormatError("write_ppm: expected 3 channels");
  auto out = open_out(path);
  out << "P6\n" << rgb.width() << ' ' << rgb.height() << "\n255\n";
  std::vector<char> payload;
  payload.reserve(rgb.size());
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) {
      for (int c = 0; c < 3; ++c) payload.push_back(static_cast<char>(quantize(rgb.at(c, y, x))));
    }
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

ImageBuffer read_ppm(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  const std::string name = "PPM " + path.string();
  const Header h = parse_header(bytes, 4, name);
  if (h.tokens[0] != "P6") throw FormatError(name + ": not a binary PPM");
  const int w = parse_dim(h.tokens[1], name);
  const int ht = parse_dim(h.tokens[2], name);
  if (h.tokens[3] != "255") throw FormatError(name + ": only 8-bit PPM is supported");
  const std::size_t need = static_cast<std::size_t>(w) * ht * 3;
  if (bytes.size() - h.payload < need) throw FormatError(name + ": truncated payload");
  ImageBuffer img(ht, w, 3);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + h.payload);
  for (int y = 0; y < ht; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = *p++ / 255.0;
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const Gray8& image) {
  if (image.pixels.size() != static_cast<std::size_t>(image.height) * image.width) {
    throw FormatError("write_pgm: pixel count mismatch");
  }
  auto out = open_out(path);
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
}

void write_pgm(const std::filesystem::path& path, const Mask& mask) {
  Gray8 g{mask.height(), mask.width(), std::vector<std::uint8_t>(mask.size())};
  for (std::size_t i = 0; i < mask.size(); ++i) g.pixels[i] = mask[i] ? 255 : 0;
  write_pgm(path, g);
}

Gray8 read_pgm(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  const std::string name = "PGM " + path.string();
  const Header h = parse_header(bytes, 4, name);
  if (h.tokens[0] != "P5") throw FormatError(name + ": not a binary PGM");
  Gray8 g;
  g.width = parse_dim(h.tokens[1], name);
  g.height = parse_dim(h.tokens[2], name);
  if (h.tokens[3] != "255") throw FormatError(name + ": only 8-bit PGM is supported");
  const std::size_t need = static_cast<std::size_t>(g.width) * g.height;
  if (bytes.size() - h.payload < need) throw FormatError(name + ": truncated payload");
  g.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(h.payload),
                  bytes.begin() + static_cast<std::ptrdiff_t>(h.payload + need));
  return g;
}

Mask read_mask_pgm(const std::filesystem::path& path) {
  const Gray8 g = read_pgm(path);
  Mask m(g.height, g.width);
  for (std::size_t i = 0; i < g.pixels.size(); ++i) m.set(i, g.pixels[i] != 0);
  return m;
}

void write_pfm(const std::filesystem::path& path, const ImageBuffer& map) {
  if (map.channels() != 1 && map.channels() != 3) {
    throw FormatError("write_pfm: only 1 or 3 channels are representable");
  }
  auto out = open_out(path);
  out << (map.channels() == 1 ? "Pf" : "PF") << '\n' << map.width() << ' ' << map.height() << "\n-1.0\n";
  std::vector<char> payload;
  payload.reserve(map.size() * 4);
  for (int y = map.height() - 1; y >= 0; --y) {
    for (int x = 0; x < map.width(); ++x) {
      for (int c = 0; c < map.channels(); ++c) {
        const float f = static_cast<float>(map.at(c, y, x));
        std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
        if constexpr (std::endian::native == std::endian::big) bits = byteswap32(bits);
        char buf[4];
        std::memcpy(buf, &bits, 4);
        payload.insert(payload.end(), buf, buf + 4);
      }
    }
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

ImageBuffer read_pfm(const std::filesystem::path& path, int expected_channels) {
  const std::string bytes = slurp(path);
  const std::string name = "PFM " + path.string();
  const Header h = parse_header(bytes, 4, name);
  int channels = 0;
  if (h.tokens[0] == "Pf") {
    channels = 1;
  } else if (h.tokens[0] == "PF") {
    channels = 3;
  } else {
    throw FormatError(name + ": bad magic '" + h.tokens[0] + "'");
  }
  if (channels != expected_channels) {
    throw FormatError(name + ": has " + std::to_string(channels) + " channel(s), expected " +
                      std::to_string(expected_channels));
  }
  const int w = parse_dim(h.tokens[1], name);
  const int ht = parse_dim(h.tokens[2], name);
  double scale = 0.0;
  try {
    scale = std::stod(h.tokens[3]);
  } catch (const std::logic_error&) {
    throw FormatError(name + ": bad scale token '" + h.tokens[3] + "'");
  }
  if (scale == 0.0 || !std::isfinite(scale)) throw FormatError(name + ": zero scale token");
  const bool little = scale < 0.0;
  const std::size_t need = static_cast<std::size_t>(w) * ht * channels * 4;
  if (bytes.size() - h.payload < need) throw FormatError(name + ": truncated payload");
  const bool swap = little != (std::endian::native == std::endian::little);
  ImageBuffer map(ht, w, channels);
  const char* p = bytes.data() + h.payload;
  for (int y = ht - 1; y >= 0; --y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        std::uint32_t bits;
        std::memcpy(&bits, p, 4);
        p += 4;
        if (swap) bits = byteswap32(bits);
        map.at(c, y, x) = std::bit_cast<float>(bits);
      }
    }
  }
  return map;
}

}  // namespace ttc::io
