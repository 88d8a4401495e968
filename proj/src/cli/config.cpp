#include "ttc/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "ttc/errors.hpp"

namespace ttc::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) throw ConfigError("invalid value '" + value + "' for key " + key);
  return out;
}

std::string show(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

template <class T>
std::string show_int(T v) {
  return std::to_string(v);
}

struct Entry {
  std::string description;
  std::function<void(Config&, const std::string&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

template <class T>
Entry number(std::string description, T Config::*member) {
  return {std::move(description),
          [member](Config& c, const std::string& k, const std::string& v) { c.*member = parse_number<T>(k, v); },
          [member](const Config& c) {
            if constexpr (std::is_floating_point_v<T>) return show(c.*member);
            else return show_int(c.*member);
          }};
}

template <class Outer, class T>
Entry nested(std::string description, Outer Config::*outer, T Outer::*member) {
  return {std::move(description),
          [outer, member](Config& c, const std::string& k, const std::string& v) {
            (c.*outer).*member = parse_number<T>(k, v);
          },
          [outer, member](const Config& c) {
            if constexpr (std::is_floating_point_v<T>) return show((c.*outer).*member);
            else return show_int((c.*outer).*member);
          }};
}

Entry text(std::string description, std::string Config::*member) {
  return {std::move(description), [member](Config& c, const std::string&, const std::string& v) { c.*member = v; },
          [member](const Config& c) { return c.*member; }};
}

// Ordered as documented.
const std::vector<std::pair<std::string, Entry>>& table() {
  using G = sim::GeneratorConfig;
  using N = nn::TrainConfig;
  static const std::vector<std::pair<std::string, Entry>> t = {
      {"dataset.size", number("pairs generated by simulate", &Config::dataset_size)},
      {"dataset.seed", number("master seed of simulate", &Config::dataset_seed)},
      {"dataset.width", nested("image width [px]", &Config::generator, &G::width)},
      {"dataset.height", nested("image height [px]", &Config::generator, &G::height)},
      {"dataset.focal", nested("focal length [px]", &Config::generator, &G::focal)},
      {"dataset.interval", nested("frame interval T [s]", &Config::generator, &G::interval)},
      {"dataset.min_objects", nested("fewest objects per scene", &Config::generator, &G::min_objects)},
      {"dataset.max_objects", nested("most objects per scene", &Config::generator, &G::max_objects)},
      {"dataset.depth_min", nested("nearest object depth at t0 [m]", &Config::generator, &G::depth_min)},
      {"dataset.depth_max", nested("farthest object depth at t0 [m]", &Config::generator, &G::depth_max)},
      {"dataset.eta_min", nested("smallest object motion-in-depth", &Config::generator, &G::eta_min)},
      {"dataset.eta_max", nested("largest object motion-in-depth", &Config::generator, &G::eta_max)},
      {"dataset.lateral_speed_max", nested("largest |Vx| [m/s]", &Config::generator, &G::lateral_speed_max)},
      {"dataset.vertical_speed_max", nested("largest |Vy| [m/s]", &Config::generator, &G::vertical_speed_max)},
      {"dataset.half_extent_min", nested("smallest object half-size [m]", &Config::generator, &G::half_extent_min)},
      {"dataset.half_extent_max", nested("largest object half-size [m]", &Config::generator, &G::half_extent_max)},
      {"dataset.background_depth", nested("background plane depth [m]", &Config::generator, &G::background_depth)},
      {"dataset.background_velocity", nested("background plane Vz [m/s]", &Config::generator, &G::background_velocity)},
      {"train.init_seed", number("parameter initialization seed", &Config::init_seed)},
      {"train.seed", nested("sampling seed of training", &Config::train, &N::seed)},
      {"train.optimizer", {"sgd (momentum) or adam",
                           [](Config& c, const std::string& k, const std::string& v) {
                             if (v == "sgd") c.train.optimizer = nn::Optimizer::sgd;
                             else if (v == "adam") c.train.optimizer = nn::Optimizer::adam;
                             else throw ConfigError("invalid value '" + v + "' for key " + k + " (sgd | adam)");
                           },
                           [](const Config& c) { return std::string(c.train.optimizer == nn::Optimizer::adam ? "adam" : "sgd"); }}},
      {"train.learning_rate", nested("binary-stage learning rate", &Config::train, &N::learning_rate)},
      {"train.momentum", nested("SGD momentum / Adam beta1", &Config::train, &N::momentum)},
      {"train.adam_beta2", nested("Adam beta2", &Config::train, &N::adam_beta2)},
      {"train.lr_decay", nested("learning-rate factor on plateau", &Config::train, &N::lr_decay)},
      {"train.plateau_patience", nested("epochs without improvement before decay", &Config::train, &N::plateau_patience)},
      {"train.batch_size", nested("pairs per update", &Config::train, &N::batch_size)},
      {"train.epochs", nested("binary-stage epochs (flow-only epochs included)", &Config::train, &N::epochs)},
      {"train.pretrain_epochs", nested("flow-only epochs at the start", &Config::train, &N::pretrain_epochs)},
      {"train.ttc_weight", nested("TTC head loss weight", &Config::train, &N::ttc_weight)},
      {"train.flow_weight", nested("flow heads loss weight (split over u and v)", &Config::train, &N::flow_weight)},
      {"train.alpha_min", nested("smallest sampled scale factor", &Config::train, &N::alpha_min)},
      {"train.alpha_max", nested("largest sampled scale factor", &Config::train, &N::alpha_max)},
      {"train.shift_max", nested("largest sampled |shift| [px]", &Config::train, &N::shift_max)},
      {"train.focus_fraction", nested("fraction of draws centered on a moving pixel's motion", &Config::train, &N::focus_fraction)},
      {"train.focus_eta_jitter", nested("eta jitter of focused draws", &Config::train, &N::focus_eta_jitter)},
      {"train.focus_shift_jitter", nested("shift jitter of focused draws [px]", &Config::train, &N::focus_shift_jitter)},
      {"train.continuous_epochs", nested("continuous-stage epochs", &Config::train, &N::continuous_epochs)},
      {"train.continuous_pairs", nested("pairs per continuous epoch (0 = all)", &Config::train, &N::continuous_pairs)},
      {"train.continuous_learning_rate", nested("continuous-stage learning rate", &Config::train, &N::continuous_learning_rate)},
      {"train.continuous_scales", nested("scale samples per continuous step", &Config::train, &N::continuous_scales)},
      {"train.continuous_shifts", nested("shift samples per axis per continuous step", &Config::train, &N::continuous_shifts)},
      {"train.bce_weight", nested("continuous-stage BCE weight", &Config::train, &N::bce_weight)},
      {"train.regression_weight", nested("continuous-stage smooth-L1 weight", &Config::train, &N::regression_weight)},
      {"eval.thresholds", number("geofence thresholds in the evaluation sweep", &Config::eval_thresholds)},
      {"eval.eta_min", number("first evaluation threshold (eta)", &Config::eval_eta_min)},
      {"eval.eta_max", number("last evaluation threshold (eta)", &Config::eval_eta_max)},
      {"sweep.scales", number("scale factors of the continuous sweep", &Config::sweep_scales)},
      {"sweep.alpha_min", number("first scale factor of the continuous sweep", &Config::sweep_alpha_min)},
      {"sweep.alpha_max", number("last scale factor of the continuous sweep", &Config::sweep_alpha_max)},
      {"sweep.flow_shifts", number("shifts per axis of the flow sweep", &Config::flow_shifts)},
      {"sweep.flow_shift_max", number("flow sweep spans [-max, max] px", &Config::flow_shift_max)},
      {"oracle.softness", number("oracle logistic softness (0 = hard)", &Config::oracle_softness)},
      {"parallelism", number("worker threads", &Config::parallelism)},
      {"paths.train_dir", text("training dataset directory", &Config::train_dir)},
      {"paths.test_dir", text("held-out dataset directory", &Config::test_dir)},
      {"paths.checkpoint", text("checkpoint file", &Config::checkpoint)},
      {"paths.output_dir", text("inference output directory", &Config::output_dir)},
  };
  return t;
}

const Entry* find(const std::string& key) {
  for (const auto& [k, e] : table()) {
    if (k == key) return &e;
  }
  return nullptr;
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  const Entry* e = find(key);
  if (!e) throw ConfigError("unknown config key: " + key);
  e->set(*this, key, value);
}

void Config::apply(const std::string& text, const std::string& origin) {
  std::istringstream is(text);
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected key = value");
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void Config::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  apply(buf.str(), path.string());
  validate();
}

void Config::validate() const {
  generator.validate();
  train.validate();
  if (eval_thresholds < 1) throw ConfigError("eval.thresholds must be >= 1");
  if (eval_thresholds > 1 && !(eval_eta_min < eval_eta_max)) throw ConfigError("eval.eta_min must be < eval.eta_max");
  if (eval_eta_min < kTrainedAlphaMin || eval_eta_max > kTrainedAlphaMax) {
    throw ConfigError("evaluation thresholds must lie in the trained range [0.5, 1.3]");
  }
  if (sweep_scales < 2 || !(sweep_alpha_min > 0.0 && sweep_alpha_min < sweep_alpha_max)) {
    throw ConfigError("continuous sweep needs >= 2 scales and 0 < sweep.alpha_min < sweep.alpha_max");
  }
  if (flow_shifts < 2 || !(flow_shift_max > 0.0)) throw ConfigError("flow sweep needs >= 2 shifts and a positive span");
  if (!(oracle_softness >= 0.0)) throw ConfigError("oracle.softness must be >= 0");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
}

ScaleSweep Config::continuous_sweep(double interval) const {
  return ScaleSweep::uniform(sweep_alpha_min, sweep_alpha_max, sweep_scales, interval);
}

ShiftSweep Config::flow_sweep() const {
  return ShiftSweep::uniform(-flow_shift_max, 2.0 * flow_shift_max / (flow_shifts - 1), flow_shifts);
}

eval::EvalConfig Config::eval_config(double interval) const {
  eval::EvalConfig c;
  for (int i = 0; i < eval_thresholds; ++i) {
    c.binary_etas.push_back(eval_thresholds == 1 ? eval_eta_min
                                                 : eval_eta_min + (eval_eta_max - eval_eta_min) * i / (eval_thresholds - 1));
  }
  c.continuous = continuous_sweep(interval);
  c.flow = flow_sweep();
  c.parallelism = parallelism;
  return c;
}

std::vector<KeyDoc> documented_keys() {
  const Config defaults;
  std::vector<KeyDoc> out;
  for (const auto& [k, e] : table()) out.push_back({k, e.get(defaults), e.description});
  return out;
}

std::string key_documentation() {
  std::ostringstream os;
  os << "Config keys (key = value; defaults shown):\n";
  for (const auto& d : documented_keys()) {
    os << "  " << std::left << std::setw(34) << d.key << std::setw(12) << d.default_value << d.description << "\n";
  }
  return os.str();
}

}  // namespace ttc::cli
