#include "ttc/scene_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "ttc/random.hpp"

namespace ttc::sim {

namespace {

using Rgb = std::array<double, 3>;

double unit_hash(std::uint64_t seed, std::int64_t a, std::int64_t b, int channel) {
  std::uint64_t h = seed;
  h = splitmix64(h ^ static_cast<std::uint64_t>(a) * 0x9E3779B97F4A7C15ull);
  h = splitmix64(h ^ static_cast<std::uint64_t>(b) * 0xC2B2AE3D27D4EB4Full);
  h = splitmix64(h + static_cast<std::uint64_t>(channel));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Rgb seeded_color(std::uint64_t seed, int which) {
  return {0.1 + 0.8 * unit_hash(seed, which, 7, 0), 0.1 + 0.8 * unit_hash(seed, which, 7, 1),
          0.1 + 0.8 * unit_hash(seed, which, 7, 2)};
}

// Lattice value noise with smoothstep interpolation; `cell` in meters.
Rgb value_noise(std::uint64_t seed, double u, double v, double cell) {
  const double gu = u / cell;
  const double gv = v / cell;
  const double fu = std::floor(gu);
  const double fv = std::floor(gv);
  const auto iu = static_cast<std::int64_t>(fu);
  const auto iv = static_cast<std::int64_t>(fv);
  auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
  const double su = smooth(gu - fu);
  const double sv = smooth(gv - fv);
  Rgb out{};
  for (int c = 0; c < 3; ++c) {
    const double a = unit_hash(seed, iu, iv, c);
    const double b = unit_hash(seed, iu + 1, iv, c);
    const double d = unit_hash(seed, iu, iv + 1, c);
    const double e = unit_hash(seed, iu + 1, iv + 1, c);
    const double top = a + (b - a) * su;
    const double bottom = d + (e - d) * su;
    out[c] = top + (bottom - top) * sv;
  }
  return out;
}

// Texture scale in meters: a few pixels at the object's t0 depth.
double texture_cell(const PlanarObject& obj, double focal) {
  return obj.z / focal * (3.0 + 3.0 * unit_hash(obj.texture_seed, 11, 13, 0));
}

Rgb object_texture(const PlanarObject& obj, double u, double v, double focal) {
  const double cell = texture_cell(obj, focal);
  switch (obj.texture) {
    case TextureKind::checker: {
      const auto iu = static_cast<std::int64_t>(std::floor(u / cell));
      const auto iv = static_cast<std::int64_t>(std::floor(v / cell));
      return seeded_color(obj.texture_seed, ((iu + iv) & 1) != 0 ? 1 : 2);
    }
    case TextureKind::noise:
      return value_noise(obj.texture_seed, u, v, cell);
    case TextureKind::gradient: {
      const double angle = 2.0 * M_PI * unit_hash(obj.texture_seed, 3, 5, 0);
      const double extent = std::max(obj.half_width, obj.half_height);
      const double t = 0.5 + 0.5 * (std::cos(angle) * u + std::sin(angle) * v) / extent;
      const Rgb a = seeded_color(obj.texture_seed, 1);
      const Rgb b = seeded_color(obj.texture_seed, 2);
      return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
    }
  }
  return {0.5, 0.5, 0.5};
}

double background_depth_at(const SceneSpec& s, double t) {
  return s.background_depth + s.background_velocity * t;
}

Rgb surface_color(const SceneSpec& s, int surface, double px, double py, double t) {
  const CameraModel& cam = s.camera;
  const double rx = (px - cam.cx()) / cam.focal;
  const double ry = (py - cam.cy()) / cam.focal;
  if (surface < 0) {
    // Background texture is attached to the plane, so it expands with the
    // background's own motion in depth.
    const double z = background_depth_at(s, t);
    const double cell = 3.0 * s.background_depth / cam.focal;
    return value_noise(splitmix64(s.seed ^ 0xB4C6ull), rx * z, ry * z, cell);
  }
  const PlanarObject& obj = s.objects[static_cast<std::size_t>(surface)];
  const double z = obj.depth_at(t);
  const double u = rx * z - (obj.x + obj.vx * t);
  const double v = ry * z - (obj.y + obj.vy * t);
  return object_texture(obj, u, v, cam.focal);
}

// Painter's order: far to near at time t, stable for equal depths.
std::vector<std::size_t> painter_order(const SceneSpec& s, double t) {
  std::vector<std::size_t> order(s.objects.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s.objects[a].depth_at(t) > s.objects[b].depth_at(t);
  });
  return order;
}

int front_surface_ordered(const SceneSpec& s, const std::vector<std::size_t>& order, double px,
                          double py, double t) {
  const CameraModel& cam = s.camera;
  const double rx = (px - cam.cx()) / cam.focal;
  const double ry = (py - cam.cy()) / cam.focal;
  int hit = -1;
  for (std::size_t k : order) {
    const PlanarObject& obj = s.objects[k];
    const double z = obj.depth_at(t);
    if (std::abs(rx * z - (obj.x + obj.vx * t)) <= obj.half_width &&
        std::abs(ry * z - (obj.y + obj.vy * t)) <= obj.half_height) {
      hit = static_cast<int>(k);
    }
  }
  return hit;
}

}  // namespace

void SceneSpec::validate() const {
  if (!(camera.focal > 0.0)) throw ConfigError("camera focal length must be positive");
  if (camera.width <= 0 || camera.height <= 0) throw ConfigError("camera size must be positive");
  if (!(interval > 0.0)) throw ConfigError("frame interval must be positive");
  const double bg0 = background_depth_at(*this, 0.0);
  const double bg1 = background_depth_at(*this, interval);
  if (!(bg0 > 0.0) || !(bg1 > 0.0)) throw ConfigError("background must stay in front of the camera");
  for (std::size_t k = 0; k < objects.size(); ++k) {
    const PlanarObject& o = objects[k];
    const std::string name = "object " + std::to_string(k);
    const double z1 = o.depth_at(interval);
    if (!(o.z > 0.0) || !(z1 > 0.0)) throw ConfigError(name + " is behind the camera");
    if (!(o.half_width > 0.0) || !(o.half_height > 0.0)) {
      throw ConfigError(name + " must have positive half-extents");
    }
    const double eta = z1 / o.z;
    if (eta < kSweepEtaMin - 1e-12 || eta > kSweepEtaMax + 1e-12) {
      throw ConfigError(name + " motion-in-depth " + std::to_string(eta) + " outside [0.5, 1.3]");
    }
    if (!(o.z < bg0) || !(z1 < bg1)) throw ConfigError(name + " is not in front of the background");
    const double left = camera.focal * (o.x - o.half_width) / o.z + camera.cx();
    const double right = camera.focal * (o.x + o.half_width) / o.z + camera.cx();
    const double top = camera.focal * (o.y - o.half_height) / o.z + camera.cy();
    const double bottom = camera.focal * (o.y + o.half_height) / o.z + camera.cy();
    if (right < -0.5 || left > camera.width - 0.5 || bottom < -0.5 || top > camera.height - 0.5) {
      throw ConfigError(name + " is outside the field of view at t0");
    }
  }
}

int front_surface(const SceneSpec& spec, double px, double py, double t) {
  return front_surface_ordered(spec, painter_order(spec, t), px, py, t);
}

ImageBuffer render_frame(const SceneSpec& spec, double t) {
  const CameraModel& cam = spec.camera;
  ImageBuffer img(cam.height, cam.width, 3);
  const auto order = painter_order(spec, t);
  static constexpr std::array<double, 2> kSub{-0.25, 0.25};
#pragma omp parallel for schedule(static)
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      Rgb acc{};
      for (double sy : kSub) {
        for (double sx : kSub) {
          const double px = x + sx;
          const double py = y + sy;
          const Rgb c = surface_color(spec, front_surface_ordered(spec, order, px, py, t), px, py, t);
          for (int ch = 0; ch < 3; ++ch) acc[ch] += c[ch];
        }
      }
      for (int ch = 0; ch < 3; ++ch) img.at(ch, y, x) = acc[ch] * 0.25;
    }
  }
  return img;
}

ImageBuffer eta_from_scene_flow(const ImageBuffer& depth0, const ImageBuffer& depth1, const Mask* valid) {
  if (!depth0.same_shape(depth1)) throw ShapeError("eta_from_scene_flow: depth maps differ in shape");
  if (valid) require_same_extent(depth0, *valid, "eta_from_scene_flow");
  ImageBuffer eta(depth0.height(), depth0.width(), 1, 1.0);
  const auto z0 = depth0.values();
  const auto z1 = depth1.values();
  for (std::size_t i = 0; i < z0.size(); ++i) {
    const bool check = !valid || (*valid)[i];
    if (!(z0[i] > 0.0) || !(z1[i] > 0.0)) {
      if (check) throw DomainError("eta_from_scene_flow: non-positive depth at a valid pixel");
      continue;
    }
    eta.values()[i] = z1[i] / z0[i];
  }
  return eta;
}

RenderedPair render_pair(const SceneSpec& spec) {
  spec.validate();
  const CameraModel& cam = spec.camera;
  const double t1 = spec.interval;
  RenderedPair out;
  out.i0 = render_frame(spec, 0.0);
  out.i1 = render_frame(spec, t1);

  GroundTruth& gt = out.gt;
  const int h = cam.height;
  const int w = cam.width;
  gt.flow_u = ImageBuffer(h, w);
  gt.flow_v = ImageBuffer(h, w);
  gt.depth0 = ImageBuffer(h, w);
  gt.depth1 = ImageBuffer(h, w);
  gt.object_id.assign(static_cast<std::size_t>(h) * w, 0);
  gt.valid = Mask(h, w);
  const auto order0 = painter_order(spec, 0.0);
  const auto order1 = painter_order(spec, t1);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int surface = front_surface_ordered(spec, order0, x, y, 0.0);
      double z0, vx = 0.0, vy = 0.0, vz;
      if (surface < 0) {
        z0 = spec.background_depth;
        vz = spec.background_velocity;
      } else {
        const PlanarObject& o = spec.objects[static_cast<std::size_t>(surface)];
        z0 = o.z;
        vx = o.vx;
        vy = o.vy;
        vz = o.vz;
      }
      const double z1 = z0 + vz * t1;
      const double shrink = z0 / z1 - 1.0;
      const double u = (x - cam.cx()) * shrink + cam.focal * vx * t1 / z1;
      const double v = (y - cam.cy()) * shrink + cam.focal * vy * t1 / z1;
      const double x1 = x + u;
      const double y1 = y + v;
      gt.flow_u(y, x) = u;
      gt.flow_v(y, x) = v;
      gt.depth0(y, x) = z0;
      gt.depth1(y, x) = z1;
      gt.object_id[static_cast<std::size_t>(y) * w + x] = surface + 1;
      const bool in_frame = x1 >= -0.5 && x1 < w - 0.5 && y1 >= -0.5 && y1 < h - 0.5;
      gt.valid.set(y, x, in_frame && front_surface_ordered(spec, order1, x1, y1, t1) == surface);
    }
  }
  gt.eta = eta_from_scene_flow(gt.depth0, gt.depth1, &gt.valid);
  gt.ttc = ttc_map_from_eta(gt.eta, FrameInterval(spec.interval));
  return out;
}

Foe object_foe(const SceneSpec& spec, std::size_t object_index) {
  const PlanarObject& o = spec.objects.at(object_index);
  return foe_of_motion(o.vx, o.vy, o.vz, spec.camera.focal);
}

}  // namespace ttc::sim
