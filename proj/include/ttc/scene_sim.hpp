#pragma once

// Deterministic synthetic scenes of textured fronto-parallel planes seen by a
// static pinhole camera, with exact per-pixel ground truth.

#include <cstdint>
#include <vector>

#include "ttc/image.hpp"
#include "ttc/maps.hpp"
#include "ttc/ttc_math.hpp"

namespace ttc::sim {

// Principal point at the image center (W/2 - 0.5, H/2 - 0.5) in pixel-index
// coordinates.
struct CameraModel {
  double focal = 100.0;
  int width = 128;
  int height = 64;

  double cx() const { return width / 2.0 - 0.5; }
  double cy() const { return height / 2.0 - 0.5; }
};

enum class TextureKind { checker, noise, gradient };

struct PlanarObject {
  double x = 0.0, y = 0.0, z = 10.0;     // center at t0, meters
  double vx = 0.0, vy = 0.0, vz = 0.0;   // meters / second
  double half_width = 1.0;               // Sx
  double half_height = 1.0;              // Sy
  std::uint64_t texture_seed = 0;
  TextureKind texture = TextureKind::checker;

  double depth_at(double t) const { return z + vz * t; }
};

struct SceneSpec {
  CameraModel camera;
  std::vector<PlanarObject> objects;
  double background_depth = 40.0;
  double background_velocity = 0.0;  // along the optical axis
  double interval = 0.1;             // T, seconds
  std::uint64_t seed = 0;

  // Throws ConfigError: object behind the camera at either frame, eta
  // outside [0.5, 1.3], object entirely outside the view at t0, background
  // not behind every object.
  void validate() const;
};

inline constexpr double kSweepEtaMin = 0.5;
inline constexpr double kSweepEtaMax = 1.3;

struct GroundTruth {
  ImageBuffer eta;        // Z(t1) / Z(t0) of the surface seen at each I0 pixel
  TtcMap ttc;             // ttc_from_eta(eta)
  ImageBuffer flow_u;     // position in I1 minus position in I0, pixels
  ImageBuffer flow_v;
  ImageBuffer depth0;     // Z(t0) at each I0 pixel
  ImageBuffer depth1;     // Z(t1) of the same surface point
  std::vector<int> object_id;  // 0 = background, k + 1 = objects[k]
  Mask valid;             // surface point visible in both frames

  int height() const { return eta.height(); }
  int width() const { return eta.width(); }
  int object_at(int y, int x) const { return object_id[static_cast<std::size_t>(y) * width() + x]; }
};

struct RenderedPair {
  ImageBuffer i0;  // RGB in [0, 1]
  ImageBuffer i1;
  GroundTruth gt;
};

RenderedPair render_pair(const SceneSpec& spec);

// Renders a single frame at time t (seconds after t0). Exposed for tests.
ImageBuffer render_frame(const SceneSpec& spec, double t);

// Index of the front-most surface hit by the ray through pixel position
// (px, py) at time t: -1 for the background.
int front_surface(const SceneSpec& spec, double px, double py, double t);

// Per-pixel depth ratio Z1 / Z0. Throws DomainError for a non-positive depth
// at a valid pixel (all pixels when `valid` is null).
ImageBuffer eta_from_scene_flow(const ImageBuffer& depth0, const ImageBuffer& depth1,
                                const Mask* valid = nullptr);

Foe object_foe(const SceneSpec& spec, std::size_t object_index);

}  // namespace ttc::sim
