#include "ttc/eval.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ttc/image_io.hpp"

namespace ttc::eval {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct PairResult {
  std::vector<MaskCounts> counts;
  double mid_sum = 0.0;
  double qmid_sum = 0.0;
  std::size_t mid_pixels = 0;
  std::size_t violations = 0;
  std::size_t comparisons = 0;
  std::size_t negatives = 0;
  std::size_t probabilities = 0;
  double epe_sum = 0.0;
  std::size_t epe_pixels = 0;
  double t_features = 0.0, t_binary = 0.0, t_continuous = 0.0, t_flow = 0.0;
};

void check_ground_truth(const sim::Dataset& data, bool with_flow) {
  for (const auto& s : data.samples) {
    std::vector<std::string> missing;
    if (s.gt.eta.size() == 0) missing.push_back("eta");
    if (s.gt.valid.size() == 0) missing.push_back("valid");
    if (with_flow && s.gt.flow_u.size() == 0) missing.push_back("flow_u");
    if (with_flow && s.gt.flow_v.size() == 0) missing.push_back("flow_v");
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      throw ConfigError("pair " + s.id + " lacks ground truth: " + list);
    }
  }
}

Mask inside_mask(const ImageBuffer& eta, double threshold) {
  Mask m(eta.height(), eta.width());
  const auto v = eta.values();
  for (std::size_t i = 0; i < v.size(); ++i) m.set(i, v[i] <= threshold);
  return m;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

void MaskCounts::add(const MaskCounts& o) {
  intersection += o.intersection;
  union_ += o.union_;
  wrong += o.wrong;
  valid += o.valid;
}

double MaskCounts::iou() const {
  return union_ == 0 ? 1.0 : static_cast<double>(intersection) / static_cast<double>(union_);
}

double MaskCounts::pct_error() const {
  if (valid == 0) throw DomainError("percentage error over an empty pixel set");
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(valid);
}

MaskCounts mask_counts(const Mask& pred, const Mask& gt, const Mask& valid) {
  if (!pred.same_shape(gt) || !pred.same_shape(valid)) throw ShapeError("mask metrics: shapes differ");
  MaskCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!valid[i]) continue;
    ++c.valid;
    const bool p = pred[i];
    const bool g = gt[i];
    c.intersection += p && g;
    c.union_ += p || g;
    c.wrong += p != g;
  }
  return c;
}

double miou(const Mask& pred, const Mask& gt, const Mask& valid) { return mask_counts(pred, gt, valid).iou(); }

double pct_error(const Mask& pred, const Mask& gt, const Mask& valid) {
  return mask_counts(pred, gt, valid).pct_error();
}

double endpoint_error(const ImageBuffer& u, const ImageBuffer& v, const ImageBuffer& u_gt,
                      const ImageBuffer& v_gt, const Mask& valid) {
  if (!u.same_shape(v) || !u.same_shape(u_gt) || !u.same_shape(v_gt) || !valid.same_shape(u)) {
    throw ShapeError("endpoint error: shapes differ");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!valid[i]) continue;
    sum += std::hypot(u.values()[i] - u_gt.values()[i], v.values()[i] - v_gt.values()[i]);
    ++n;
  }
  if (n == 0) throw DomainError("endpoint error over an empty pixel set");
  return sum / static_cast<double>(n);
}

ImageBuffer ingest_pfm(const std::filesystem::path& path, int channels) { return io::read_pfm(path, channels); }

EvalConfig EvalConfig::standard(double interval) {
  EvalConfig c;
  for (int i = 0; i < 8; ++i) c.binary_etas.push_back(0.55 + 0.1 * i);
  c.continuous = ScaleSweep::uniform(0.5, 1.3, 24, interval);
  c.flow = ShiftSweep::uniform(-24.0, 48.0 / 15.0, 16);
  return c;
}

TimingStat timing_stat(std::string name, std::vector<double> seconds) {
  TimingStat t;
  t.name = std::move(name);
  t.samples = seconds.size();
  t.median_ms = 1e3 * percentile(seconds, 0.5);
  t.p95_ms = 1e3 * percentile(std::move(seconds), 0.95);
  return t;
}

PredictorFactory net_predictors(const nn::CompactNet& net) {
  return [&net](const sim::Sample& s) { return NetClassifier(net).prepare(s.i0, s.i1); };
}

PredictorFactory oracle_predictors(double softness) {
  return [softness](const sim::Sample& s) {
    return OracleClassifier(std::make_shared<const sim::GroundTruth>(s.gt), softness).prepare(s.i0, s.i1);
  };
}

ImageBuffer quantized_eta(const QuantizedTtcMap& q) {
  const auto& e = q.edges;
  const std::size_t n = e.size();
  std::vector<double> centre(n + 1);
  centre[0] = e[0] - 0.5 * (e[1] - e[0]);
  centre[n] = e[n - 1] + 0.5 * (e[n - 1] - e[n - 2]);
  for (std::size_t i = 1; i < n; ++i) centre[i] = 0.5 * (e[i - 1] + e[i]);
  ImageBuffer out(q.height, q.width);
  for (std::size_t i = 0; i < q.bins.size(); ++i) out.values()[i] = centre[static_cast<std::size_t>(q.bins[i])];
  return out;
}

EvalReport evaluate(const PredictorFactory& factory, const sim::Dataset& data, const EvalConfig& config,
                    std::string model, std::string dataset) {
  if (data.samples.empty()) throw ConfigError("evaluation dataset is empty");
  if (config.binary_etas.empty()) throw ConfigError("evaluation needs at least one geofence threshold");
  check_ground_truth(data, config.with_flow);
  const double step = config.continuous.uniform_step();
  const double flow_step = config.with_flow ? config.flow.uniform_step() : 0.0;

  std::vector<PairResult> results(data.samples.size());
  const int n = static_cast<int>(data.samples.size());
#pragma omp parallel for num_threads(std::max(1, config.parallelism)) schedule(dynamic, 1)
  for (int k = 0; k < n; ++k) {
    const sim::Sample& s = data.samples[static_cast<std::size_t>(k)];
    PairResult& r = results[static_cast<std::size_t>(k)];
    auto t0 = Clock::now();
    const auto predictor = factory(s);
    r.t_features = since(t0);

    t0 = Clock::now();
    for (double eta : config.binary_etas) {
      const GeofenceMask g = geofence_from_map(predictor->predict(WarpParam::scale(eta)), 0.0, eta);
      r.counts.push_back(mask_counts(g.inside, inside_mask(s.gt.eta, eta), s.gt.valid));
    }
    r.t_binary = since(t0);

    t0 = Clock::now();
    std::vector<WarpParam> jobs;
    for (double a : config.continuous.alphas) jobs.push_back(WarpParam::scale(a));
    const auto maps = sweep_executor(*predictor, jobs, 1).maps;
    const ImageBuffer eta_hat = auc_estimate(maps, config.continuous.alphas.front(), step);
    r.t_continuous = since(t0);
    const QuantizedTtcMap q = quantize_maps(maps, config.continuous.alphas);
    r.mid_pixels = s.gt.valid.count();
    if (r.mid_pixels > 0) {
      r.mid_sum = mid_error(eta_hat, s.gt.eta, &s.gt.valid) * static_cast<double>(r.mid_pixels);
      r.qmid_sum = mid_error(quantized_eta(q), s.gt.eta, &s.gt.valid) * static_cast<double>(r.mid_pixels);
    }
    r.negatives = q.negative_count;
    r.probabilities = q.probability_count;
    for (std::size_t i = 1; i < maps.size(); ++i) {
      const auto a = maps[i - 1].prob.values();
      const auto b = maps[i].prob.values();
      for (std::size_t p = 0; p < a.size(); ++p) {
        if (!s.gt.valid[p]) continue;
        ++r.comparisons;
        r.violations += b[p] > a[p];
      }
    }

    if (config.with_flow) {
      t0 = Clock::now();
      const FlowEstimate f = continuous_flow(*predictor, config.flow, config.flow, 1);
      r.t_flow = since(t0);
      r.epe_pixels = s.gt.valid.count();
      if (r.epe_pixels > 0) {
        r.epe_sum = endpoint_error(f.u, f.v, s.gt.flow_u, s.gt.flow_v, s.gt.valid) *
                    static_cast<double>(r.epe_pixels);
      }
    }
  }

  EvalReport report;
  report.model = std::move(model);
  report.dataset = std::move(dataset);
  report.pairs = data.samples.size();
  report.interval = data.interval;
  report.has_flow = config.with_flow;
  report.flow_step = flow_step;
  for (std::size_t a = 0; a < config.binary_etas.size(); ++a) {
    AlphaMetrics m;
    m.eta = config.binary_etas[a];
    m.tau = m.eta < 1.0 ? data.interval / (1.0 - m.eta) : std::numeric_limits<double>::infinity();
    for (const auto& r : results) {
      m.counts.add(r.counts[a]);
      m.miou += r.counts[a].iou();
    }
    m.miou /= static_cast<double>(results.size());
    m.pooled_iou = m.counts.iou();
    m.pct_error = m.counts.pct_error();
    report.per_alpha.push_back(m);
  }
  for (const auto& m : report.per_alpha) {
    report.miou += m.miou;
    report.pooled_miou += m.pooled_iou;
    report.pct_error += m.pct_error;
  }
  const double thresholds = static_cast<double>(report.per_alpha.size());
  report.miou /= thresholds;
  report.pooled_miou /= thresholds;
  report.pct_error /= thresholds;
  double mid = 0.0, qmid = 0.0, epe = 0.0;
  std::size_t violations = 0, comparisons = 0, negatives = 0, probabilities = 0;
  std::vector<double> tf, tb, tc, tfl;
  for (const auto& r : results) {
    mid += r.mid_sum;
    qmid += r.qmid_sum;
    report.mid_pixels += r.mid_pixels;
    epe += r.epe_sum;
    report.epe_pixels += r.epe_pixels;
    violations += r.violations;
    comparisons += r.comparisons;
    negatives += r.negatives;
    probabilities += r.probabilities;
    tf.push_back(r.t_features);
    tb.push_back(r.t_binary);
    tc.push_back(r.t_continuous);
    if (config.with_flow) tfl.push_back(r.t_flow);
  }
  if (report.mid_pixels == 0) throw DomainError("evaluation dataset has no valid pixels");
  report.mid = mid / static_cast<double>(report.mid_pixels);
  report.quantized_mid = qmid / static_cast<double>(report.mid_pixels);
  if (report.epe_pixels > 0) report.epe = epe / static_cast<double>(report.epe_pixels);
  report.monotonicity_violation_rate =
      comparisons ? static_cast<double>(violations) / static_cast<double>(comparisons) : 0.0;
  report.negative_bin_rate = probabilities ? static_cast<double>(negatives) / static_cast<double>(probabilities) : 0.0;
  report.timings.push_back(timing_stat("feature_extraction", tf));
  report.timings.push_back(timing_stat("binary_sweep_" + std::to_string(config.binary_etas.size()), tb));
  report.timings.push_back(timing_stat("continuous_sweep_" + std::to_string(config.continuous.size()), tc));
  if (config.with_flow) report.timings.push_back(timing_stat("flow_sweep_" + std::to_string(2 * config.flow.shifts.size()), tfl));
  return report;
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << "model: " << (model.empty() ? "-" : model) << "\n";
  os << "dataset: " << (dataset.empty() ? "-" : dataset) << " (" << pairs << " pairs, T = " << interval << " s)\n";
  os << "mIOU: inside-fence (eta <= eta_i) IOU over the valid pixels of each pair (1 when both masks are\n"
        "      empty), averaged over pairs and thresholds; pooled IOU sums intersections and unions over pairs\n";
  os << "% error: 100 * misclassified / valid pixels per threshold, averaged over thresholds\n\n";
  os << "  eta_i    tau_i[s]   mIOU     pooled   %error   valid_px\n";
  for (const auto& m : per_alpha) {
    os << "  " << fmt(m.eta, 3) << "   " << std::setw(8) << (std::isfinite(m.tau) ? fmt(m.tau, 3) : "never")
       << "   " << fmt(m.miou) << "   " << fmt(m.pooled_iou) << "   " << std::setw(6) << fmt(m.pct_error, 3) << "   " << m.counts.valid << "\n";
  }
  os << "\nmIOU            " << fmt(miou) << "\n";
  os << "pooled mIOU     " << fmt(pooled_miou) << "\n";
  os << "pct_error       " << fmt(pct_error, 3) << "\n";
  os << "MiD (x1e4)      " << fmt(mid, 2) << "  (" << mid_pixels << " px)\n";
  os << "MiD quantized   " << fmt(quantized_mid, 2) << "\n";
  os << "CCDF violations " << fmt(100.0 * monotonicity_violation_rate, 3) << " %\n";
  os << "negative bins   " << fmt(100.0 * negative_bin_rate, 3) << " %\n";
  if (has_flow) os << "flow EPE [px]   " << fmt(epe, 3) << "  (step " << fmt(flow_step, 3) << ", " << epe_pixels << " px)\n";
  os << "\ntiming           samples  median[ms]   p95[ms]\n";
  for (const auto& t : timings) {
    os << "  " << std::left << std::setw(22) << t.name << std::right << std::setw(6) << t.samples << "  "
       << std::setw(10) << fmt(t.median_ms, 2) << "  " << std::setw(8) << fmt(t.p95_ms, 2) << "\n";
  }
  return os.str();
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "metric,eta,value,pixels\n";
  for (const auto& m : per_alpha) {
    os << "miou," << m.eta << "," << m.miou << "," << m.counts.valid << "\n";
    os << "pooled_iou," << m.eta << "," << m.pooled_iou << "," << m.counts.valid << "\n";
    os << "pct_error," << m.eta << "," << m.pct_error << "," << m.counts.valid << "\n";
  }
  const std::size_t binary_px = per_alpha.empty() ? 0 : per_alpha.front().counts.valid;
  os << "miou,mean," << miou << "," << binary_px << "\n";
  os << "pooled_miou,mean," << pooled_miou << "," << binary_px << "\n";
  os << "pct_error,mean," << pct_error << "," << binary_px << "\n";
  os << "mid,,"<< mid << "," << mid_pixels << "\n";
  os << "mid_quantized,," << quantized_mid << "," << mid_pixels << "\n";
  os << "ccdf_violation_rate,," << monotonicity_violation_rate << "," << mid_pixels << "\n";
  os << "negative_bin_rate,," << negative_bin_rate << "," << mid_pixels << "\n";
  if (has_flow) os << "epe,," << epe << "," << epe_pixels << "\n";
  for (const auto& t : timings) {
    os << "time_median_ms," << t.name << "," << t.median_ms << "," << t.samples << "\n";
    os << "time_p95_ms," << t.name << "," << t.p95_ms << "," << t.samples << "\n";
  }
  return os.str();
}

std::vector<BenchRow> bench(const nn::CompactNet& net, const ImageBuffer& i0, const ImageBuffer& i1,
                            const BenchConfig& config) {
  std::vector<BenchRow> rows;
  const NetClassifier classifier(net);
  for (int n : config.sweep_sizes) {
    if (n < 1) throw ConfigError("bench sweep sizes must be >= 1");
    std::vector<WarpParam> jobs;
    for (int i = 0; i < n; ++i) {
      jobs.push_back(WarpParam::scale(n == 1 ? 0.9 : kTrainedAlphaMin + (kTrainedAlphaMax - kTrainedAlphaMin) * i / (n - 1)));
    }
    for (int p : config.parallelism) {
      if (p < 1) throw ConfigError("bench parallelism must be >= 1");
      std::vector<double> total, sweep;
      const std::uint64_t calls0 = net.feature_extractions();
      for (int r = 0; r < config.warmup + config.repeats; ++r) {
        const auto t0 = Clock::now();
        const auto predictor = classifier.prepare(i0, i1);
        const auto t1 = Clock::now();
        const SweepResult s = sweep_executor(*predictor, jobs, p);
        if (r >= config.warmup) {
          total.push_back(since(t0));
          sweep.push_back(std::chrono::duration<double>(Clock::now() - t1).count());
        }
      }
      BenchRow row;
      row.sweep_size = n;
      row.parallelism = p;
      row.repeats = config.repeats;
      row.median_ms = 1e3 * percentile(total, 0.5);
      row.p95_ms = 1e3 * percentile(total, 0.95);
      row.sweep_median_ms = 1e3 * percentile(sweep, 0.5);
      row.feature_calls_per_pair = static_cast<double>(net.feature_extractions() - calls0) /
                                   static_cast<double>(config.warmup + config.repeats);
      rows.push_back(row);
    }
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "sweep_size,parallelism,repeats,median_ms,p95_ms,sweep_median_ms,feature_calls_per_pair\n";
  for (const auto& r : rows) {
    os << r.sweep_size << "," << r.parallelism << "," << r.repeats << "," << fmt(r.median_ms, 3) << ","
       << fmt(r.p95_ms, 3) << "," << fmt(r.sweep_median_ms, 3) << "," << r.feature_calls_per_pair << "\n";
  }
  return os.str();
}

}  // namespace ttc::eval
