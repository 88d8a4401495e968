#include "ttc/maps.hpp"

namespace ttc {

TtcMap::TtcMap(int height, int width) : seconds_(height, width, 1), never_(height, width, true) {}

Ttc TtcMap::at(int y, int x) const {
  return never_(y, x) ? Ttc::never() : Ttc::seconds(seconds_(y, x));
}

void TtcMap::set(int y, int x, Ttc tau) {
  never_.set(y, x, tau.is_never());
  seconds_(y, x) = tau.value_or(0.0);
}

ImageBuffer TtcMap::encoded() const { return seconds_; }

TtcMap TtcMap::from_encoded(const ImageBuffer& seconds) {
  if (seconds.channels() != 1) throw ShapeError("TtcMap: expected a single-channel map");
  TtcMap map(seconds.height(), seconds.width());
  for (int y = 0; y < seconds.height(); ++y) {
    for (int x = 0; x < seconds.width(); ++x) {
      const double s = seconds(y, x);
      map.set(y, x, s == 0.0 ? Ttc::never() : Ttc::seconds(s));
    }
  }
  return map;
}

TtcMap ttc_map_from_eta(const ImageBuffer& eta, FrameInterval interval) {
  TtcMap map(eta.height(), eta.width());
  for (int y = 0; y < eta.height(); ++y) {
    for (int x = 0; x < eta.width(); ++x) map.set(y, x, ttc_from_eta(Eta(eta(y, x)), interval));
  }
  return map;
}

}  // namespace ttc
