#include "ttc/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace ttc {

namespace {

double checked_step(std::span<const double> values, const char* what) {
  if (values.size() < 2) throw ConfigError(std::string(what) + ": needs at least 2 samples");
  const double step = (values.back() - values.front()) / static_cast<double>(values.size() - 1);
  if (!(step > 0.0)) throw ConfigError(std::string(what) + ": samples must be increasing");
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double d = values[i] - values[i - 1];
    if (std::abs(d - step) > 1e-9 * std::max(1.0, std::abs(step))) {
      throw ConfigError(std::string(what) + ": samples are not uniformly spaced");
    }
  }
  return step;
}

std::vector<ProbabilityMap> run_params(const PairPredictor& predictor, std::vector<WarpParam> jobs,
                                       int parallelism) {
  return sweep_executor(predictor, jobs, parallelism).maps;
}

}  // namespace

ScaleSweep ScaleSweep::uniform(double first, double last, int count, double interval) {
  if (count < 2) throw ConfigError("scale sweep: needs at least 2 samples");
  ScaleSweep s;
  s.interval = interval;
  const double step = (last - first) / (count - 1);
  for (int i = 0; i < count; ++i) s.alphas.push_back(i == count - 1 ? last : first + i * step);
  return s;
}

void ScaleSweep::validate() const {
  if (!(interval > 0.0)) throw ConfigError("scale sweep: frame interval must be positive");
  if (alphas.empty()) throw ConfigError("scale sweep is empty");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0)) throw ConfigError("scale sweep: scale factors must be positive");
    if (i > 0 && !(alphas[i] > alphas[i - 1])) throw ConfigError("scale sweep must be strictly increasing");
  }
}

double ScaleSweep::uniform_step() const {
  validate();
  return checked_step(alphas, "scale sweep");
}

ShiftSweep ShiftSweep::uniform(double first, double step, int count) {
  if (count < 2 || !(step > 0.0)) throw ConfigError("shift sweep: needs >= 2 increasing samples");
  ShiftSweep s;
  for (int i = 0; i < count; ++i) s.shifts.push_back(first + i * step);
  return s;
}

double ShiftSweep::uniform_step() const { return checked_step(shifts, "shift sweep"); }

SweepResult sweep_executor(const PairPredictor& predictor, std::span<const WarpParam> jobs, int parallelism) {
  SweepResult result;
  result.maps.resize(jobs.size());
  const int workers = std::max(1, parallelism);
  const auto start = std::chrono::steady_clock::now();
  if (workers == 1 || jobs.size() <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) result.maps[i] = predictor.predict(jobs[i]);
  } else {
    const int n = static_cast<int>(jobs.size());
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
    for (int i = 0; i < n; ++i) result.maps[static_cast<std::size_t>(i)] = predictor.predict(jobs[static_cast<std::size_t>(i)]);
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

GeofenceMask geofence_from_map(ProbabilityMap prob, double tau_i, double eta_i) {
  GeofenceMask g;
  g.tau = tau_i;
  g.eta = eta_i;
  g.inside = Mask(prob.prob.height(), prob.prob.width());
  const auto p = prob.prob.values();
  for (std::size_t i = 0; i < p.size(); ++i) g.inside.set(i, p[i] < kBinarizeThreshold);
  g.prob = std::move(prob);
  return g;
}

GeofenceMask binary_geofence(const PairPredictor& predictor, Ttc tau_i, FrameInterval interval) {
  if (tau_i.is_never() || !(tau_i.value() > 0.0)) {
    throw DomainError("geofence threshold must be a positive TTC");
  }
  const double t = interval.seconds();
  const double eta_i = 1.0 - t / tau_i.value();
  if (eta_i < kTrainedAlphaMin || eta_i > kTrainedAlphaMax) {
    std::ostringstream os;
    os << "TTC threshold " << tau_i.value() << " s maps to scale " << eta_i << ", outside the trained range ["
       << kTrainedAlphaMin << ", " << kTrainedAlphaMax << "]; valid thresholds for T = " << t
       << " s are tau >= " << t / (1.0 - kTrainedAlphaMin) << " s";
    throw OutOfRangeError(os.str());
  }
  return geofence_from_map(predictor.predict(WarpParam::scale(eta_i)), tau_i.value(), eta_i);
}

GeofenceMask binary_geofence(const Classifier& classifier, const ImageBuffer& i0, const ImageBuffer& i1,
                             Ttc tau_i, FrameInterval interval) {
  return binary_geofence(*classifier.prepare(i0, i1), tau_i, interval);
}

int quantization_bin(double eta, std::span<const double> edges) {
  // First edge >= eta: eta on an edge belongs to the lower bin.
  return static_cast<int>(std::lower_bound(edges.begin(), edges.end(), eta) - edges.begin());
}

QuantizedTtcMap quantize_maps(std::span<const ProbabilityMap> maps, std::span<const double> edges) {
  if (maps.size() != edges.size() || maps.size() < 2) {
    throw ConfigError("quantization needs one probability map per edge and at least 2 edges");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw ConfigError("quantization edges must be strictly increasing");
  }
  QuantizedTtcMap q;
  q.height = maps[0].prob.height();
  q.width = maps[0].prob.width();
  q.edges.assign(edges.begin(), edges.end());
  const std::size_t n = maps.size();
  const std::size_t pixels = static_cast<std::size_t>(q.height) * q.width;
  q.bins.assign(pixels, 0);
  q.probability_count = pixels * (n + 1);
  for (std::size_t px = 0; px < pixels; ++px) {
    // Bin probabilities: 1 - B_1, B_i - B_{i+1}, B_N.
    double best = 1.0 - maps[0].prob.values()[px];
    if (best < 0.0) {
      ++q.negative_count;
      best = 0.0;
    }
    int best_bin = 0;
    for (std::size_t i = 1; i <= n; ++i) {
      double p = i < n ? maps[i - 1].prob.values()[px] - maps[i].prob.values()[px]
                       : maps[n - 1].prob.values()[px];
      if (p < 0.0) {
        ++q.negative_count;
        p = 0.0;
      }
      if (p > best) {
        best = p;
        best_bin = static_cast<int>(i);
      }
    }
    q.bins[px] = best_bin;
  }
  return q;
}

QuantizedTtcMap quantized_ttc(const PairPredictor& predictor, const ScaleSweep& sweep, int parallelism) {
  sweep.validate();
  if (sweep.size() < 2) throw ConfigError("quantized TTC needs at least 2 scale factors");
  std::vector<WarpParam> jobs;
  for (double a : sweep.alphas) jobs.push_back(WarpParam::scale(a));
  const auto maps = run_params(predictor, std::move(jobs), parallelism);
  return quantize_maps(maps, sweep.alphas);
}

ImageBuffer auc_estimate(std::span<const ImageBuffer> probs, double first, double step) {
  if (probs.empty()) throw ConfigError("AUC estimate needs at least one map");
  ImageBuffer out(probs[0].height(), probs[0].width());
  const double lo = first - 0.5 * step;
  const double hi = first + step * (static_cast<double>(probs.size()) - 0.5);
  auto dst = out.values();
  for (const ImageBuffer& p : probs) {
    if (!p.same_shape(out)) throw ShapeError("AUC estimate: probability maps differ in shape");
    const auto src = p.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  for (double& v : dst) v = std::clamp(first + step * (v - 0.5), lo, hi);
  return out;
}

ImageBuffer auc_estimate(std::span<const ProbabilityMap> maps, double first, double step) {
  std::vector<ImageBuffer> probs;
  probs.reserve(maps.size());
  for (const auto& m : maps) probs.push_back(m.prob);
  return auc_estimate(probs, first, step);
}

ContinuousEta continuous_eta(const PairPredictor& predictor, const ScaleSweep& sweep, int parallelism) {
  const double step = sweep.uniform_step();
  std::vector<WarpParam> jobs;
  for (double a : sweep.alphas) jobs.push_back(WarpParam::scale(a));
  const auto maps = run_params(predictor, std::move(jobs), parallelism);
  ContinuousEta out;
  out.eta = auc_estimate(maps, sweep.alphas.front(), step);
  out.ttc = ttc_map_from_eta(out.eta, FrameInterval(sweep.interval));
  return out;
}

FlowEstimate continuous_flow(const PairPredictor& predictor, const ShiftSweep& u_sweep,
                             const ShiftSweep& v_sweep, int parallelism) {
  const double du = u_sweep.uniform_step();
  const double dv = v_sweep.uniform_step();
  std::vector<WarpParam> jobs;
  for (double u : u_sweep.shifts) jobs.push_back(WarpParam::shift_h(u));
  for (double v : v_sweep.shifts) jobs.push_back(WarpParam::shift_v(v));
  const auto maps = run_params(predictor, std::move(jobs), parallelism);
  const std::span<const ProbabilityMap> all(maps);
  FlowEstimate out;
  out.u = auc_estimate(all.first(u_sweep.shifts.size()), u_sweep.shifts.front(), du);
  out.v = auc_estimate(all.subspan(u_sweep.shifts.size()), v_sweep.shifts.front(), dv);
  return out;
}

}  // namespace ttc
