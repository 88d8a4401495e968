#pragma once

#include "ttc/image.hpp"
#include "ttc/ttc_math.hpp"

namespace ttc {

// Per-pixel TTC. Pixels at constant depth carry the explicit never state
// instead of an infinity. On disk the never state is encoded as 0 s, a value
// no finite motion-in-depth can produce.
class TtcMap {
 public:
  TtcMap() = default;
  TtcMap(int height, int width);

  int height() const { return seconds_.height(); }
  int width() const { return seconds_.width(); }

  Ttc at(int y, int x) const;
  void set(int y, int x, Ttc tau);

  ImageBuffer encoded() const;
  static TtcMap from_encoded(const ImageBuffer& seconds);

  friend bool operator==(const TtcMap&, const TtcMap&) = default;

 private:
  ImageBuffer seconds_;
  Mask never_;
};

// Applies ttc_from_eta per pixel.
TtcMap ttc_map_from_eta(const ImageBuffer& eta, FrameInterval interval);

}  // namespace ttc
