#include "ttc/cli/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "ttc/classifier.hpp"
#include "ttc/cli/config.hpp"
#include "ttc/dataset.hpp"
#include "ttc/errors.hpp"
#include "ttc/eval.hpp"
#include "ttc/image_io.hpp"
#include "ttc/nn/checkpoint.hpp"
#include "ttc/nn/trainer.hpp"
#include "ttc/pipeline.hpp"

namespace fs = std::filesystem;

namespace ttc::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AssertionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string join(const std::vector<double>& v, int precision = 10) {
  std::ostringstream os;
  os << std::setprecision(precision);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("invalid number '") + item + "' in " + what);
    }
  }
  if (out.empty()) throw UsageError(std::string(what) + " is empty");
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  for (double v : parse_list(s, what)) {
    if (v != static_cast<int>(v)) throw UsageError(std::string(what) + " must hold integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

struct Globals {
  std::string config_file;
  std::vector<std::string> overrides;
  int parallelism = 0;
};

Config resolve_config(const Globals& g) {
  Config c;
  if (!g.config_file.empty()) c.load(g.config_file);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.parallelism > 0) c.parallelism = g.parallelism;
  c.validate();
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw FormatError("cannot write " + path.string());
  os << text;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string out;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const Config& c, const SimulateArgs& a, std::ostream& out) {
  const std::size_t n = a.n.value_or(c.dataset_size);
  const std::uint64_t seed = a.seed.value_or(c.dataset_seed);
  const auto t0 = Clock::now();
  const sim::DatasetSummary s = sim::make_dataset(a.out, n, c.generator, seed);
  out << "wrote " << s.pairs << " pairs to " << a.out << " (seed " << seed << ", " << std::fixed
      << std::setprecision(1) << ms_since(t0) / 1e3 << " s)\n";
  out << "objects: " << s.objects << "  valid pixels: " << s.valid_pixels << "\n";
  if (s.pairs > 0) {
    out << std::setprecision(4) << "eta range over valid pixels: [" << s.eta_min << ", " << s.eta_max << "]\n";
    out << "eta histogram over [0.5, 1.3] (valid pixels):\n";
    for (std::size_t i = 0; i < s.eta_histogram.size(); ++i) {
      out << "  [" << std::setprecision(2) << 0.5 + 0.1 * i << ", " << 0.6 + 0.1 * i << ")  " << s.eta_histogram[i]
          << "\n";
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string out;
  std::string stage = "binary";
  std::string init;
  std::string loss_csv;
  bool resume = false;
  int stop_after = 0;
};

int cmd_train(const Config& c, const TrainArgs& a, std::ostream& out) {
  const fs::path ckpt_path = a.out.empty() ? fs::path(c.checkpoint) : fs::path(a.out);
  const fs::path data_dir = a.data.empty() ? fs::path(c.train_dir) : fs::path(a.data);
  const fs::path loss_path = a.loss_csv.empty() ? fs::path(ckpt_path.string() + ".loss.csv") : fs::path(a.loss_csv);
  nn::TrainConfig tc = c.train;
  tc.parallelism = c.parallelism;

  nn::CompactNet net;
  nn::TrainState state;
  bool resumed = false;
  if (a.resume && fs::exists(ckpt_path)) {
    nn::Checkpoint ck = nn::load_checkpoint(ckpt_path);
    if (a.stage == "binary" && ck.state.stage != "binary") {
      throw ConfigError("stage error: " + ckpt_path.string() + " holds a '" + ck.state.stage +
                        "' checkpoint; the binary stage can only resume a binary checkpoint");
    }
    net = ck.net;
    state = std::move(ck.state);
    resumed = true;
  }
  if (!resumed) {
    if (a.stage == "binary") {
      if (!a.init.empty()) throw UsageError("--init applies to the continuous stage only");
      net.initialize(c.init_seed);
    } else {
      if (a.init.empty()) {
        throw ConfigError("stage error: the continuous stage needs a binary-stage checkpoint (--init PATH)");
      }
      nn::Checkpoint ck = nn::load_checkpoint(a.init);
      if (ck.state.stage != "binary" || ck.state.epoch == 0) {
        throw ConfigError("stage error: " + a.init + " is not a trained binary-stage checkpoint (stage '" +
                          ck.state.stage + "')");
      }
      net = ck.net;
      state = std::move(ck.state);
    }
  }
  if (a.stage == "continuous" && state.stage != "binary" && state.stage != "continuous") {
    throw ConfigError("stage error: the continuous stage needs a binary-stage checkpoint");
  }

  const sim::Dataset data = sim::load_dataset(data_dir);
  out << "training " << a.stage << " stage on " << data.samples.size() << " pairs from " << data_dir.string()
      << (resumed ? " (resumed at epoch " + std::to_string(state.epoch) + ")" : "") << "\n";

  const auto t0 = Clock::now();
  int epochs_run = 0;
  const int total = a.stage == "binary" ? tc.epochs : tc.continuous_epochs;
  auto hook = [&](const nn::CompactNet& n, const nn::TrainState& s) {
    nn::save_checkpoint(ckpt_path, n, s);
    ++epochs_run;
    out << "epoch " << s.epoch << "/" << total << "  best loss " << std::setprecision(5) << s.best_loss << "  lr "
        << s.learning_rate << "  elapsed " << std::fixed << std::setprecision(1) << ms_since(t0) / 1e3 << " s\n"
        << std::defaultfloat;
    out.flush();
    return a.stop_after <= 0 || epochs_run < a.stop_after;
  };
  const nn::TrainResult r = a.stage == "binary" ? nn::train_binary(net, data, tc, state, hook)
                                                : nn::train_continuous(net, data, tc, state, hook);
  if (epochs_run == 0) nn::save_checkpoint(ckpt_path, net, state);

  const bool append = resumed && fs::exists(loss_path);
  std::ofstream csv(loss_path, append ? std::ios::app : std::ios::trunc);
  if (!csv) throw FormatError("cannot write " + loss_path.string());
  if (!append) csv << "step,task,loss\n";
  csv << std::setprecision(17);
  for (const auto& l : r.losses) csv << l.step << "," << l.task << "," << l.loss << "\n";

  out << (r.finished ? "finished" : "stopped") << " after " << epochs_run << " epoch(s) in this run; checkpoint "
      << ckpt_path.string() << ", losses " << loss_path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- infer

struct InferArgs {
  std::string checkpoint;
  std::string oracle_eta;
  std::string i0, i1;
  std::string mode = "continuous";
  std::optional<double> tau;
  std::string edges;
  std::string tau_edges;
  std::optional<double> interval;
  std::string out;
  bool flow = false;
  std::string gt_eta;
  std::string gt_valid;
};

void write_sidecar(const fs::path& dir, const std::string& body) { write_text(dir / "sweep.txt", body); }

int cmd_infer(const Config& c, const InferArgs& a, std::ostream& out) {
  const double t = a.interval.value_or(c.generator.interval);
  const FrameInterval interval(t);
  const fs::path dir = a.out.empty() ? fs::path(c.output_dir) : fs::path(a.out);
  fs::create_directories(dir);

  const ImageBuffer i0 = io::read_ppm(a.i0);
  const ImageBuffer i1 = io::read_ppm(a.i1);
  require_same_extent(i0, i1, "infer: frames");

  std::unique_ptr<Classifier> classifier;
  std::optional<nn::CompactNet> net;
  std::string source;
  if (!a.oracle_eta.empty()) {
    auto gt = std::make_shared<sim::GroundTruth>();
    gt->eta = io::read_pfm(a.oracle_eta, 1);
    require_same_extent(gt->eta, i0, "infer: oracle eta map");
    gt->valid = Mask(gt->eta.height(), gt->eta.width(), true);
    classifier = std::make_unique<OracleClassifier>(gt, c.oracle_softness);
    source = "oracle " + a.oracle_eta;
  } else {
    const std::string path = a.checkpoint.empty() ? c.checkpoint : a.checkpoint;
    net = nn::load_checkpoint(path).net;
    classifier = std::make_unique<NetClassifier>(*net);
    source = "checkpoint " + path;
  }

  std::ostringstream side;
  side << std::setprecision(10);
  side << "source = " << source << "\nmode = " << a.mode << "\ninterval = " << t << "\nparallelism = "
       << c.parallelism << "\n";

  const auto t0 = Clock::now();
  const auto predictor = classifier->prepare(i0, i1);
  const double feature_ms = ms_since(t0);
  std::optional<ImageBuffer> eta_for_mid;

  if (a.mode == "binary") {
    if (!a.tau) throw UsageError("binary mode needs --tau SECONDS");
    const GeofenceMask g = binary_geofence(*predictor, Ttc::seconds(*a.tau), interval);
    io::write_pgm(dir / "geofence.pgm", g.inside);
    io::write_pfm(dir / "probability.pfm", g.prob.prob);
    side << "tau = " << g.tau << "\neta = " << g.eta << "\nthreshold = " << kBinarizeThreshold
         << "\ngeofence = geofence.pgm (255 = 0 < tau <= tau_i)\nprobability = probability.pfm (p(eta > eta_i))\n";
    out << "geofence tau_i = " << g.tau << " s (eta_i = " << g.eta << "): " << g.inside.count() << " of "
        << g.inside.size() << " pixels inside\n";
    if (!g.prob.warning.empty()) out << "warning: " << g.prob.warning << "\n";
  } else if (a.mode == "quantized") {
    std::vector<double> edges;
    if (!a.edges.empty() && !a.tau_edges.empty()) throw UsageError("give either --edges or --tau-edges");
    if (!a.edges.empty()) {
      edges = parse_list(a.edges, "--edges");
    } else if (!a.tau_edges.empty()) {
      for (double tau : parse_list(a.tau_edges, "--tau-edges")) edges.push_back(eta_from_ttc(Ttc::seconds(tau), interval).value());
    } else {
      throw UsageError("quantized mode needs --edges ETA,... or --tau-edges SECONDS,...");
    }
    for (double e : edges) {
      if (e < kTrainedAlphaMin || e > kTrainedAlphaMax) {
        throw OutOfRangeError("quantization edge eta = " + std::to_string(e) +
                              " lies outside the trained range [0.5, 1.3]; valid TTC edges for T = " +
                              std::to_string(t) + " s are tau >= " + std::to_string(t / (1.0 - kTrainedAlphaMin)) +
                              " s or tau <= " + std::to_string(t / (1.0 - kTrainedAlphaMax)) + " s");
      }
    }
    ScaleSweep sweep{edges, t};
    const QuantizedTtcMap q = quantized_ttc(*predictor, sweep, c.parallelism);
    io::Gray8 g{q.height, q.width, {}};
    const int bins = q.bin_count() - 1;
    for (int b : q.bins) g.pixels.push_back(static_cast<std::uint8_t>(bins > 0 ? (b * 255) / bins : 0));
    io::write_pgm(dir / "bins.pgm", g);
    side << "edges_eta = " << join(q.edges) << "\nbins = 0.." << bins
         << " (0: eta <= first edge, " << bins << ": eta > last edge)\nbins_pgm_value = bin * 255 / " << bins
         << " (integer division)\nnegative_bin_rate = " << q.negative_rate() << "\n";
    out << "quantized into " << q.bin_count() << " bins (values 0.." << bins << "), negative bin probability rate "
        << q.negative_rate() << "\n";
  } else if (a.mode == "continuous") {
    const ScaleSweep sweep = c.continuous_sweep(t);
    const ContinuousEta est = continuous_eta(*predictor, sweep, c.parallelism);
    io::write_pfm(dir / "eta.pfm", est.eta);
    io::write_pfm(dir / "ttc.pfm", est.ttc.encoded());
    const double step = sweep.uniform_step();
    side << "alphas = " << join(sweep.alphas) << "\nstep = " << step << "\nclamp = " << sweep.alphas.front() - step / 2
         << " " << sweep.alphas.back() + step / 2 << "\neta = eta.pfm\nttc = ttc.pfm (seconds, 0 = never)\n";
    if (a.flow) {
      if (!a.oracle_eta.empty()) throw UsageError("--flow needs a network checkpoint");
      const ShiftSweep fs_ = c.flow_sweep();
      const FlowEstimate f = continuous_flow(*predictor, fs_, fs_, c.parallelism);
      io::write_pfm(dir / "flow_u.pfm", f.u);
      io::write_pfm(dir / "flow_v.pfm", f.v);
      side << "shifts = " << join(fs_.shifts) << "\nflow = flow_u.pfm flow_v.pfm (pixels)\n";
    }
    eta_for_mid = est.eta;
  } else {
    throw UsageError("unknown mode '" + a.mode + "' (binary | quantized | continuous)");
  }
  const double total_ms = ms_since(t0);
  write_sidecar(dir, side.str());
  out << std::fixed << std::setprecision(2) << "wall clock: " << total_ms << " ms (features " << feature_ms
      << " ms)\n" << std::defaultfloat;

  if (!a.gt_eta.empty()) {
    if (!eta_for_mid) throw UsageError("--gt-eta applies to continuous mode");
    const ImageBuffer gt = io::read_pfm(a.gt_eta, 1);
    const Mask valid = a.gt_valid.empty() ? Mask(gt.height(), gt.width(), true) : io::read_mask_pgm(a.gt_valid);
    out << std::setprecision(6) << "MiD: " << mid_error(*eta_for_mid, gt, &valid) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoint;
  bool oracle = false;
  std::optional<double> softness;
  std::string data;
  bool assert_thresholds = false;
  std::string report;
  std::string csv;
  bool no_flow = false;
};

int cmd_eval(const Config& c, const EvalArgs& a, std::ostream& out) {
  const fs::path data_dir = a.data.empty() ? fs::path(c.test_dir) : fs::path(a.data);
  const sim::Dataset data = sim::load_dataset(data_dir);
  eval::EvalConfig ec = c.eval_config(data.interval);
  ec.with_flow = !a.no_flow && !a.oracle;

  std::optional<nn::CompactNet> net;
  eval::PredictorFactory factory;
  std::string model;
  if (a.oracle) {
    const double softness = a.softness.value_or(c.oracle_softness);
    factory = eval::oracle_predictors(softness);
    std::ostringstream os;
    os << "oracle (softness " << softness << ")";
    model = os.str();
  } else {
    const std::string path = a.checkpoint.empty() ? c.checkpoint : a.checkpoint;
    net = nn::load_checkpoint(path).net;
    if (!net->trained()) out << "warning: evaluating an untrained network\n";
    factory = eval::net_predictors(*net);
    model = path;
  }
  const eval::EvalReport r = eval::evaluate(factory, data, ec, model, data_dir.string());
  out << r.to_text();
  if (!a.report.empty()) write_text(a.report, r.to_text());
  if (!a.csv.empty()) write_text(a.csv, r.to_csv());

  if (a.assert_thresholds) {
    bool ok = true;
    auto check = [&](const char* name, double value, const char* op, double bound, bool pass) {
      out << "assert " << name << " " << value << " " << op << " " << bound << ": " << (pass ? "PASS" : "FAIL")
          << "\n";
      ok = ok && pass;
    };
    check("mIOU", r.miou, ">=", kAssertMiou, r.miou >= kAssertMiou);
    check("pct_error", r.pct_error, "<=", kAssertPctError, r.pct_error <= kAssertPctError);
    check("MiD", r.mid, "<=", kAssertMid, r.mid <= kAssertMid);
    if (r.has_flow) {
      const double bound = kAssertEpeSteps * r.flow_step;
      check("EPE", r.epe, "<=", bound, r.epe <= bound);
    }
    if (!ok) throw AssertionFailure("acceptance thresholds not met");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string checkpoint;
  std::string data;
  std::string i0, i1;
  std::string sizes = "1,8,24";
  std::string workers = "1,2,4";
  int repeats = 5;
  std::string csv;
};

int cmd_bench(const Config& c, const BenchArgs& a, std::ostream& out) {
  nn::CompactNet net;
  if (!a.checkpoint.empty()) {
    net = nn::load_checkpoint(a.checkpoint).net;
  } else {
    net.initialize(c.init_seed);
    out << "note: no checkpoint given; timing a freshly initialized network\n";
  }
  ImageBuffer i0, i1;
  if (!a.i0.empty() || !a.i1.empty()) {
    if (a.i0.empty() || a.i1.empty()) throw UsageError("give both --i0 and --i1");
    i0 = io::read_ppm(a.i0);
    i1 = io::read_ppm(a.i1);
  } else if (!a.data.empty()) {
    const sim::Dataset d = sim::load_dataset(a.data);
    if (d.samples.empty()) throw ConfigError("bench dataset is empty");
    i0 = d.samples.front().i0;
    i1 = d.samples.front().i1;
  } else {
    const auto pair = sim::render_pair(sim::generate_scene(c.generator, c.dataset_seed, 0));
    i0 = pair.i0;
    i1 = pair.i1;
  }
  eval::BenchConfig bc;
  bc.sweep_sizes = parse_int_list(a.sizes, "--sizes");
  bc.parallelism = parse_int_list(a.workers, "--workers");
  bc.repeats = a.repeats;
  if (bc.repeats < 1) throw UsageError("--repeats must be >= 1");
  const auto rows = eval::bench(net, i0, i1, bc);
  const std::string csv = eval::bench_csv(rows);
  out << csv;
  if (!a.csv.empty()) write_text(a.csv, csv);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monocular time-to-contact from binary classification sweeps"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer("\n" + key_documentation() +
             "\nExit codes: 0 success, 1 usage error, 2 validation failure, 3 assertion failure.");
  Globals g;
  app.add_option("--config", g.config_file, "key = value configuration file");
  app.add_option("--set", g.overrides, "override one config key (key=value), repeatable");
  app.add_option("--parallelism", g.parallelism, "worker threads (overrides the parallelism key)")->check(CLI::PositiveNumber);

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic dataset");
  sim_cmd->add_option("--out", sa.out, "output directory")->required();
  sim_cmd->add_option("--n", sa.n, "number of pairs (default dataset.size)");
  sim_cmd->add_option("--seed", sa.seed, "master seed (default dataset.seed)");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "train the network");
  train_cmd->add_option("--data", ta.data, "training dataset directory (default paths.train_dir)");
  train_cmd->add_option("--out", ta.out, "checkpoint to write (default paths.checkpoint)");
  train_cmd->add_option("--stage", ta.stage, "binary | continuous")->check(CLI::IsMember({"binary", "continuous"}));
  train_cmd->add_option("--init", ta.init, "binary-stage checkpoint the continuous stage starts from");
  train_cmd->add_option("--loss-csv", ta.loss_csv, "loss curve (default <checkpoint>.loss.csv)");
  train_cmd->add_flag("--resume", ta.resume, "continue from the checkpoint at --out if present");
  train_cmd->add_option("--stop-after-epochs", ta.stop_after, "stop after this many epochs in this run");

  InferArgs ia;
  auto* infer_cmd = app.add_subcommand("infer", "run the pipeline on one image pair");
  infer_cmd->add_option("--checkpoint", ia.checkpoint, "network checkpoint (default paths.checkpoint)");
  infer_cmd->add_option("--oracle-eta", ia.oracle_eta, "use the ground-truth oracle with this eta PFM instead");
  infer_cmd->add_option("--i0", ia.i0, "first frame (PPM)")->required();
  infer_cmd->add_option("--i1", ia.i1, "second frame (PPM)")->required();
  infer_cmd->add_option("--mode", ia.mode, "binary | quantized | continuous")
      ->check(CLI::IsMember({"binary", "quantized", "continuous"}));
  infer_cmd->add_option("--tau", ia.tau, "geofence TTC threshold in seconds (binary mode)");
  infer_cmd->add_option("--edges", ia.edges, "comma-separated eta bin edges (quantized mode)");
  infer_cmd->add_option("--tau-edges", ia.tau_edges, "comma-separated TTC bin edges in seconds (quantized mode)");
  infer_cmd->add_option("--T", ia.interval, "frame interval in seconds (default dataset.interval)");
  infer_cmd->add_option("--out", ia.out, "output directory (default paths.output_dir)");
  infer_cmd->add_flag("--flow", ia.flow, "also estimate optical flow (continuous mode)");
  infer_cmd->add_option("--gt-eta", ia.gt_eta, "ground-truth eta PFM; prints MiD (continuous mode)");
  infer_cmd->add_option("--gt-valid", ia.gt_valid, "validity PGM for --gt-eta");

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate on a held-out dataset");
  eval_cmd->add_option("--checkpoint", ea.checkpoint, "network checkpoint (default paths.checkpoint)");
  eval_cmd->add_flag("--oracle", ea.oracle, "evaluate the ground-truth oracle instead");
  eval_cmd->add_option("--softness", ea.softness, "oracle softness (default oracle.softness)");
  eval_cmd->add_option("--data", ea.data, "dataset directory (default paths.test_dir)");
  eval_cmd->add_flag("--assert", ea.assert_thresholds, "exit 3 unless the acceptance thresholds hold");
  eval_cmd->add_option("--report", ea.report, "write the text report here");
  eval_cmd->add_option("--csv", ea.csv, "write the CSV report here");
  eval_cmd->add_flag("--no-flow", ea.no_flow, "skip the flow sweep");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "time sweeps of several sizes and worker counts");
  bench_cmd->add_option("--checkpoint", ba.checkpoint, "network checkpoint");
  bench_cmd->add_option("--data", ba.data, "take the first pair of this dataset");
  bench_cmd->add_option("--i0", ba.i0, "first frame (PPM)");
  bench_cmd->add_option("--i1", ba.i1, "second frame (PPM)");
  bench_cmd->add_option("--sizes", ba.sizes, "comma-separated sweep sizes");
  bench_cmd->add_option("--workers", ba.workers, "comma-separated worker counts");
  bench_cmd->add_option("--repeats", ba.repeats, "timed repetitions per row");
  bench_cmd->add_option("--csv", ba.csv, "write the timing table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const Config c = resolve_config(g);
    if (*sim_cmd) return cmd_simulate(c, sa, out);
    if (*train_cmd) return cmd_train(c, ta, out);
    if (*infer_cmd) return cmd_infer(c, ia, out);
    if (*eval_cmd) return cmd_eval(c, ea, out);
    if (*bench_cmd) return cmd_bench(c, ba, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const AssertionFailure& e) {
    err << "assertion failure: " << e.what() << "\n";
    return kExitAssertion;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace ttc::cli
