#pragma once

// Closed-form relations between time-to-contact, motion-in-depth, scale
// factors, image sizes and optical flow. All functions are pure.

#include <optional>
#include <span>

#include "ttc/errors.hpp"

namespace ttc {

class ImageBuffer;
class Mask;

// Elapsed time between the two frames, seconds. Always > 0.
class FrameInterval {
 public:
  explicit FrameInterval(double seconds);
  double seconds() const { return seconds_; }

 private:
  double seconds_;
};

// Motion-in-depth Z(t1)/Z(t0). Always > 0.
class Eta {
 public:
  explicit Eta(double value);
  double value() const { return value_; }
  bool approaching() const { return value_ < 1.0; }
  bool receding() const { return value_ > 1.0; }

 private:
  double value_;
};

// Time-to-contact in seconds, or the explicit "never" state for objects at
// constant depth. Positive: crosses the camera plane in the future.
class Ttc {
 public:
  static Ttc seconds(double value);
  static Ttc never() { return Ttc(); }

  bool is_never() const { return !value_.has_value(); }
  // Throws DomainError on the never state.
  double value() const;
  double value_or(double fallback) const { return value_.value_or(fallback); }

  friend bool operator==(const Ttc&, const Ttc&) = default;

 private:
  Ttc() = default;
  explicit Ttc(double v) : value_(v) {}
  std::optional<double> value_;
};

// Focus of expansion, principal-point-relative pixels.
struct Foe {
  double x0 = 0.0;
  double y0 = 0.0;
};

Ttc ttc_from_depth_velocity(double depth, double depth_rate);
Ttc ttc_from_depth_ratio(double depth0, double depth1, FrameInterval interval);
Ttc ttc_from_scale(double alpha, FrameInterval interval);
double alpha_from_ttc(Ttc tau, FrameInterval interval);

Eta eta_from_ttc(Ttc tau, FrameInterval interval);
Ttc ttc_from_eta(Eta eta, FrameInterval interval);

double image_size_from_depth(double focal, double object_size, double depth);
Ttc ttc_from_size_rate(double size, double size_rate);

Foe foe_of_motion(double vx, double vy, double vz, double focal);

// Flow-based TTC from a pixel position relative to the FOE. (x, y) is the
// position the flow vector points to, i.e. the pixel in the second frame,
// and (u, v) the displacement over the frame interval. When both axes are
// usable the estimates are averaged with weights |u| and |v|.
Ttc ttc_from_flow(double x, double y, Foe foe, double u, double v, FrameInterval interval);

// Motion-in-depth error: mean |log eta_est - log eta_gt| over the mask, times
// 1e4. Eta values are clamped to at least kMidEtaFloor before the log.
inline constexpr double kMidEtaFloor = 1e-3;
double mid_error(const ImageBuffer& eta_est, const ImageBuffer& eta_gt,
                 const Mask* valid = nullptr);

}  // namespace ttc
