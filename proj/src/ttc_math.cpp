#include "ttc/ttc_math.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ttc/image.hpp"

namespace ttc {

namespace {

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(what) + " must be positive and finite, got " +
                      std::to_string(value));
  }
}

}  // namespace

FrameInterval::FrameInterval(double seconds) : seconds_(seconds) {
  require_positive(seconds, "frame interval");
}

Eta::Eta(double value) : value_(value) { require_positive(value, "motion-in-depth"); }

Ttc Ttc::seconds(double value) {
  if (!std::isfinite(value)) throw DomainError("TTC must be finite; use Ttc::never()");
  return Ttc(value);
}

double Ttc::value() const {
  if (!value_) throw DomainError("TTC is in the never state");
  return *value_;
}

Ttc ttc_from_depth_velocity(double depth, double depth_rate) {
  require_positive(depth, "depth");
  if (depth_rate == 0.0) return Ttc::never();
  return Ttc::seconds(-depth / depth_rate);
}

Ttc ttc_from_depth_ratio(double depth0, double depth1, FrameInterval interval) {
  require_positive(depth0, "depth at t0");
  require_positive(depth1, "depth at t1");
  return ttc_from_scale(depth1 / depth0, interval);
}

Ttc ttc_from_scale(double alpha, FrameInterval interval) {
  require_positive(alpha, "scale factor");
  if (alpha == 1.0) return Ttc::never();
  return Ttc::seconds(interval.seconds() / (1.0 - alpha));
}

double alpha_from_ttc(Ttc tau, FrameInterval interval) {
  return eta_from_ttc(tau, interval).value();
}

Eta eta_from_ttc(Ttc tau, FrameInterval interval) {
  if (tau.is_never()) return Eta(1.0);
  if (tau.value() == 0.0) throw DomainError("TTC of zero: object is at the camera plane");
  const double eta = 1.0 - interval.seconds() / tau.value();
  if (!(eta > 0.0)) {
    throw DomainError("TTC " + std::to_string(tau.value()) +
                      " s is shorter than the frame interval; depth would be non-positive");
  }
  return Eta(eta);
}

Ttc ttc_from_eta(Eta eta, FrameInterval interval) {
  return ttc_from_scale(eta.value(), interval);
}

double image_size_from_depth(double focal, double object_size, double depth) {
  require_positive(focal, "focal length");
  require_positive(object_size, "object size");
  require_positive(depth, "depth");
  return focal * object_size / depth;
}

Ttc ttc_from_size_rate(double size, double size_rate) {
  require_positive(size, "image size");
  if (size_rate == 0.0) return Ttc::never();
  return Ttc::seconds(size / size_rate);
}

Foe foe_of_motion(double vx, double vy, double vz, double focal) {
  require_positive(focal, "focal length");
  if (vz == 0.0) throw IndeterminateError("FOE undefined for motion parallel to the image plane");
  return {focal * vx / vz, focal * vy / vz};
}

Ttc ttc_from_flow(double x, double y, Foe foe, double u, double v, FrameInterval interval) {
  const double dx = x - foe.x0;
  const double dy = y - foe.y0;
  const bool use_x = u != 0.0 && dx != 0.0;
  const bool use_y = v != 0.0 && dy != 0.0;
  if (!use_x && !use_y) {
    throw IndeterminateError("TTC from flow is indeterminate at the FOE or without flow");
  }
  const double t = interval.seconds();
  if (use_x && !use_y) return Ttc::seconds(dx / u * t);
  if (use_y && !use_x) return Ttc::seconds(dy / v * t);
  const double wx = std::abs(u);
  const double wy = std::abs(v);
  return Ttc::seconds((wx * (dx / u * t) + wy * (dy / v * t)) / (wx + wy));
}

double mid_error(const ImageBuffer& eta_est, const ImageBuffer& eta_gt, const Mask* valid) {
  if (!eta_est.same_shape(eta_gt) || eta_est.channels() != 1) {
    throw ShapeError("mid_error: maps must be single-channel with equal shape");
  }
  if (valid) require_same_extent(eta_est, *valid, "mid_error");
  double sum = 0.0;
  std::size_t count = 0;
  const auto est = eta_est.values();
  const auto gt = eta_gt.values();
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (valid && !(*valid)[i]) continue;
    sum += std::abs(std::log(std::max(est[i], kMidEtaFloor)) -
                    std::log(std::max(gt[i], kMidEtaFloor)));
    ++count;
  }
  if (count == 0) throw DomainError("mid_error: no valid pixels");
  return sum / static_cast<double>(count) * 1e4;
}

}  // namespace ttc
