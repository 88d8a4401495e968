#include "ttc/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ttc/errors.hpp"

namespace ttc::nn {

namespace {

constexpr char kMagic[8] = {'T', 'T', 'C', 'N', 'E', 'T', '\r', '\n'};

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os_.write(reinterpret_cast<const char*>(b), 8);
  }
  void u32(std::uint32_t v) { u64(v); }
  void i32(int v) { u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void doubles(const std::vector<double>& v) {
    for (double d : v) f64(d);
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}
  std::uint64_t u64() {
    unsigned char b[8];
    if (!is_.read(reinterpret_cast<char*>(b), 8)) throw FormatError("checkpoint is truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(u64()); }
  int i32() { return static_cast<int>(static_cast<std::int64_t>(u64())); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t n = u64();
    if (n > 4096) throw FormatError("checkpoint string field is implausibly long");
    std::string s(n, '\0');
    if (!is_.read(s.data(), static_cast<std::streamsize>(n))) throw FormatError("checkpoint is truncated");
    return s;
  }
  void doubles(std::vector<double>& v) {
    for (double& d : v) d = f64();
  }

 private:
  std::istream& is_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const CompactNet& net, const TrainState& state) {
  std::ostringstream buf;
  buf.write(kMagic, sizeof kMagic);
  Writer w(buf);
  w.u32(kCheckpointVersion);
  const NetConfig& cfg = net.config();
  for (int c : cfg.feature_channels) w.i32(c);
  for (int c : cfg.encoder_channels) w.i32(c);
  w.i32(cfg.decoder_channels);
  w.u32(static_cast<std::uint32_t>(net.layers().size()));
  for (const ConvLayer& l : net.layers()) {
    w.str(l.name);
    w.i32(l.shape.in_channels);
    w.i32(l.shape.out_channels);
    w.i32(l.shape.kernel);
    w.i32(l.shape.stride);
    w.i32(l.shape.pad);
  }
  w.u32(net.trained() ? 1 : 0);
  w.str(state.stage);
  w.i32(state.epoch);
  w.u64(state.step);
  w.u64(state.stage_steps);
  w.f64(state.learning_rate);
  w.f64(state.best_loss);
  w.i32(state.plateau);
  w.u32(state.has_velocity ? 1 : 0);
  const bool has_second = state.has_velocity && !state.second_moment.weight.empty();
  w.u32(has_second ? 1 : 0);
  for (const ConvLayer& l : net.layers()) {
    w.doubles(l.weight);
    w.doubles(l.bias);
  }
  if (state.has_velocity) {
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
      w.doubles(state.velocity.weight.at(i));
      w.doubles(state.velocity.bias.at(i));
    }
  }
  if (has_second) {
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
      w.doubles(state.second_moment.weight.at(i));
      w.doubles(state.second_moment.bias.at(i));
    }
  }
  // Write to a sibling file first so an interrupted save never leaves a
  // half-written checkpoint under the final name.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot open checkpoint for writing: " + path.string());
    const std::string bytes = buf.str();
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw FormatError("failed writing checkpoint: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open checkpoint: " + path.string());
  char magic[sizeof kMagic];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw FormatError("not a checkpoint file: " + path.string());
  }
  Reader r(is);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  NetConfig cfg;
  for (int& c : cfg.feature_channels) c = r.i32();
  for (int& c : cfg.encoder_channels) c = r.i32();
  cfg.decoder_channels = r.i32();
  for (int c : cfg.feature_channels) if (c <= 0 || c > 4096) throw FormatError("checkpoint: bad channel count");
  for (int c : cfg.encoder_channels) if (c <= 0 || c > 4096) throw FormatError("checkpoint: bad channel count");
  if (cfg.decoder_channels <= 0 || cfg.decoder_channels > 4096) throw FormatError("checkpoint: bad channel count");

  Checkpoint ck{CompactNet(cfg), {}};
  const std::uint32_t count = r.u32();
  if (count != ck.net.layers().size()) throw FormatError("checkpoint layer count does not match the network");
  for (const ConvLayer& l : ck.net.layers()) {
    const std::string name = r.str();
    kernels::ConvShape s;
    s.in_channels = r.i32();
    s.out_channels = r.i32();
    s.kernel = r.i32();
    s.stride = r.i32();
    s.pad = r.i32();
    if (name != l.name || s.in_channels != l.shape.in_channels || s.out_channels != l.shape.out_channels ||
        s.kernel != l.shape.kernel || s.stride != l.shape.stride || s.pad != l.shape.pad) {
      throw FormatError("checkpoint layer manifest mismatch at layer " + l.name);
    }
  }
  ck.net.set_trained(r.u32() != 0);
  TrainState& st = ck.state;
  st.stage = r.str();
  st.epoch = r.i32();
  st.step = r.u64();
  st.stage_steps = r.u64();
  st.learning_rate = r.f64();
  st.best_loss = r.f64();
  st.plateau = r.i32();
  st.has_velocity = r.u32() != 0;
  const bool has_second = r.u32() != 0;
  for (ConvLayer& l : ck.net.layers()) {
    r.doubles(l.weight);
    r.doubles(l.bias);
  }
  if (st.has_velocity) {
    st.velocity = ck.net.make_gradients();
    for (std::size_t i = 0; i < ck.net.layers().size(); ++i) {
      r.doubles(st.velocity.weight[i]);
      r.doubles(st.velocity.bias[i]);
    }
  }
  if (has_second) {
    st.second_moment = ck.net.make_gradients();
    for (std::size_t i = 0; i < ck.net.layers().size(); ++i) {
      r.doubles(st.second_moment.weight[i]);
      r.doubles(st.second_moment.bias[i]);
    }
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("checkpoint has trailing bytes");
  return ck;
}

}  // namespace ttc::nn
