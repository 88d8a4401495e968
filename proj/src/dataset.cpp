#include "ttc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "ttc/image_io.hpp"
#include "ttc/random.hpp"

namespace ttc::sim {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.txt";
constexpr const char* kInfo = "dataset_info.txt";

std::string pair_id(std::size_t index) {
  std::ostringstream os;
  os << std::setw(6) << std::setfill('0') << index;
  return os.str();
}

void write_info(const fs::path& dir, const GeneratorConfig& c, std::uint64_t seed, std::size_t n) {
  std::ofstream out(dir / kInfo);
  out << std::setprecision(17);
  out << "interval " << c.interval << "\n"
      << "pairs " << n << "\n"
      << "seed " << seed << "\n"
      << "width " << c.width << "\nheight " << c.height << "\nfocal " << c.focal << "\n"
      << "objects " << c.min_objects << ' ' << c.max_objects << "\n"
      << "depth " << c.depth_min << ' ' << c.depth_max << "\n"
      << "eta " << c.eta_min << ' ' << c.eta_max << "\n"
      << "background " << c.background_depth << ' ' << c.background_velocity << "\n";
}

void tally(DatasetSummary& s, const Sample& sample, std::size_t objects) {
  ++s.pairs;
  s.objects += objects;
  if (s.eta_histogram.empty()) {
    s.eta_histogram.assign(8, 0);
    s.eta_min = std::numeric_limits<double>::infinity();
    s.eta_max = -std::numeric_limits<double>::infinity();
  }
  const auto eta = sample.gt.eta.values();
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (!sample.gt.valid[i]) continue;
    ++s.valid_pixels;
    s.eta_min = std::min(s.eta_min, eta[i]);
    s.eta_max = std::max(s.eta_max, eta[i]);
    const int bin = std::clamp(static_cast<int>((eta[i] - kSweepEtaMin) / 0.1), 0, 7);
    ++s.eta_histogram[static_cast<std::size_t>(bin)];
  }
}

}  // namespace

void GeneratorConfig::validate() const {
  if (width <= 0 || height <= 0) throw ConfigError("image size must be positive");
  if (!(focal > 0.0)) throw ConfigError("focal length must be positive");
  if (!(interval > 0.0)) throw ConfigError("frame interval must be positive");
  if (min_objects < 0 || max_objects < min_objects) throw ConfigError("bad object count range");
  if (!(depth_min > 0.0) || depth_max < depth_min) throw ConfigError("bad depth range");
  if (eta_min < kSweepEtaMin || eta_max > kSweepEtaMax || eta_max < eta_min) {
    throw ConfigError("object motion-in-depth range must lie inside [0.5, 1.3]");
  }
  if (!(half_extent_min > 0.0) || half_extent_max < half_extent_min) {
    throw ConfigError("bad half-extent range");
  }
  if (lateral_speed_max < 0.0 || vertical_speed_max < 0.0) throw ConfigError("speed bounds must be >= 0");
  const double bg1 = background_depth + background_velocity * interval;
  if (!(background_depth > depth_max) || !(bg1 > depth_max * std::max(1.0, eta_max))) {
    throw ConfigError("background must lie behind every object at both frames");
  }
}

SceneSpec generate_scene(const GeneratorConfig& c, std::uint64_t seed, std::uint64_t index) {
  std::mt19937_64 rng(derive_seed(seed, index));
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  SceneSpec spec;
  spec.camera = {c.focal, c.width, c.height};
  spec.background_depth = c.background_depth;
  spec.background_velocity = c.background_velocity;
  spec.interval = c.interval;
  spec.seed = rng();
  const int count = std::uniform_int_distribution<int>(c.min_objects, c.max_objects)(rng);
  for (int k = 0; k < count; ++k) {
    PlanarObject o;
    o.z = uniform(c.depth_min, c.depth_max);
    const double px = uniform(0.0, c.width - 1.0);
    const double py = uniform(0.0, c.height - 1.0);
    o.x = (px - spec.camera.cx()) * o.z / c.focal;
    o.y = (py - spec.camera.cy()) * o.z / c.focal;
    const double eta = uniform(c.eta_min, c.eta_max);
    o.vz = (eta - 1.0) * o.z / c.interval;
    o.vx = uniform(-c.lateral_speed_max, c.lateral_speed_max);
    o.vy = uniform(-c.vertical_speed_max, c.vertical_speed_max);
    o.half_width = uniform(c.half_extent_min, c.half_extent_max);
    o.half_height = uniform(c.half_extent_min, c.half_extent_max);
    o.texture_seed = rng();
    o.texture = static_cast<TextureKind>(std::uniform_int_distribution<int>(0, 2)(rng));
    spec.objects.push_back(o);
  }
  return spec;
}

Dataset generate_dataset(std::size_t n, const GeneratorConfig& config, std::uint64_t seed) {
  config.validate();
  Dataset ds;
  ds.interval = config.interval;
  ds.samples.resize(n);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    RenderedPair pair = render_pair(generate_scene(config, seed, i));
    ds.samples[i] = {pair_id(i), std::move(pair.i0), std::move(pair.i1), std::move(pair.gt)};
  }
  return ds;
}

void write_sample(const fs::path& dir, const Sample& s, std::ostream& manifest) {
  const std::string i0 = s.id + "_i0.ppm", i1 = s.id + "_i1.ppm", eta = s.id + "_eta.pfm",
                    tau = s.id + "_ttc.pfm", fu = s.id + "_flow_u.pfm", fv = s.id + "_flow_v.pfm",
                    valid = s.id + "_valid.pgm";
  io::write_ppm(dir / i0, s.i0);
  io::write_ppm(dir / i1, s.i1);
  io::write_pfm(dir / eta, s.gt.eta);
  io::write_pfm(dir / tau, s.gt.ttc.encoded());
  io::write_pfm(dir / fu, s.gt.flow_u);
  io::write_pfm(dir / fv, s.gt.flow_v);
  io::write_pgm(dir / valid, s.gt.valid);
  if (!s.gt.object_id.empty()) {
    io::Gray8 ids{s.gt.height(), s.gt.width(), {}};
    ids.pixels.reserve(s.gt.object_id.size());
    for (int id : s.gt.object_id) ids.pixels.push_back(static_cast<std::uint8_t>(std::min(id, 255)));
    io::write_pgm(dir / (s.id + "_objects.pgm"), ids);
  }
  manifest << s.id << ' ' << i0 << ' ' << i1 << ' ' << eta << ' ' << tau << ' ' << fu << ' ' << fv
           << ' ' << valid << '\n';
}

DatasetSummary make_dataset(const fs::path& dir, std::size_t n, const GeneratorConfig& config,
                            std::uint64_t seed) {
  config.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream manifest(dir / kManifest, std::ios::trunc);
  if (!manifest) throw ConfigError("cannot write dataset into " + dir.string());
  write_info(dir, config, seed, n);
  DatasetSummary summary;
  // Chunked so memory stays bounded for large n.
  constexpr std::size_t kChunk = 64;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t count = std::min(kChunk, n - start);
    std::vector<Sample> chunk(count);
    std::vector<std::size_t> objects(count);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t j = 0; j < count; ++j) {
      const SceneSpec spec = generate_scene(config, seed, start + j);
      RenderedPair pair = render_pair(spec);
      chunk[j] = {pair_id(start + j), std::move(pair.i0), std::move(pair.i1), std::move(pair.gt)};
      objects[j] = spec.objects.size();
    }
    for (std::size_t j = 0; j < count; ++j) {
      write_sample(dir, chunk[j], manifest);
      tally(summary, chunk[j], objects[j]);
    }
  }
  if (!manifest) throw ConfigError("failed writing manifest in " + dir.string());
  return summary;
}

Dataset load_dataset(const fs::path& dir) {
  Dataset ds;
  {
    std::ifstream info(dir / kInfo);
    std::string key;
    while (info >> key) {
      if (key == "interval") {
        info >> ds.interval;
      } else {
        std::string rest;
        std::getline(info, rest);
      }
    }
  }
  std::ifstream manifest(dir / kManifest);
  if (!manifest) throw FormatError("missing manifest in " + dir.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string f[8];
    for (auto& field : f) is >> field;
    if (f[7].empty()) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": expected 8 fields");
    }
    Sample s;
    s.id = f[0];
    s.i0 = io::read_ppm(dir / f[1]);
    s.i1 = io::read_ppm(dir / f[2]);
    s.gt.eta = io::read_pfm(dir / f[3]);
    s.gt.ttc = TtcMap::from_encoded(io::read_pfm(dir / f[4]));
    s.gt.flow_u = io::read_pfm(dir / f[5]);
    s.gt.flow_v = io::read_pfm(dir / f[6]);
    s.gt.valid = io::read_mask_pgm(dir / f[7]);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

DatasetSummary audit_dataset(const Dataset& dataset, double lo, double hi) {
  DatasetSummary summary;
  for (const Sample& s : dataset.samples) {
    tally(summary, s, 0);
    const auto eta = s.gt.eta.values();
    for (std::size_t i = 0; i < eta.size(); ++i) {
      if (s.gt.valid[i] && (eta[i] < lo || eta[i] > hi)) {
        throw ConfigError("pair " + s.id + ": motion-in-depth " + std::to_string(eta[i]) +
                          " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      }
    }
  }
  return summary;
}

}  // namespace ttc::sim
