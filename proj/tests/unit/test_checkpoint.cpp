#include <doctest.h>

#include <cstring>
#include <fstream>

#include "support/testing.hpp"
#include "ttc/nn/checkpoint.hpp"

using namespace ttc;
using namespace ttc::nn;
namespace fs = std::filesystem;

namespace {

std::string read_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void write_bytes(const fs::path& p, const std::string& b) {
  std::ofstream f(p, std::ios::binary);
  f.write(b.data(), static_cast<std::streamsize>(b.size()));
}

}  // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("save and load are bit exact") {
  testing::ScratchDir dir("ckpt");
  testing::Gen g(91);
  CompactNet net;
  net.initialize(7);
  for (auto& l : net.layers()) for (double& b : l.bias) b = g.signed_log(1e-300, 1e300);
  net.layers()[0].weight[0] = -0.0;
  net.layers()[0].weight[1] = 5e-324;
  net.set_trained(true);
  TrainState s;
  s.stage = "continuous";
  s.epoch = 3;
  s.step = 12345;
  s.stage_steps = 17;
  s.learning_rate = 2.5e-4;
  s.best_loss = 0.123456789;
  s.plateau = 1;
  s.has_velocity = true;
  s.velocity = net.make_gradients();
  s.second_moment = net.make_gradients();
  for (auto& w : s.velocity.weight) for (double& v : w) v = g.uniform(-1, 1);
  for (auto& w : s.second_moment.bias) for (double& v : w) v = g.uniform(0, 1);
  save_checkpoint(dir / "a.ckpt", net, s);
  const Checkpoint c = load_checkpoint(dir / "a.ckpt");
  CHECK(c.net.config() == net.config());
  CHECK(c.net.trained());
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    CHECK(c.net.layers()[l].name == net.layers()[l].name);
    CHECK(std::memcmp(c.net.layers()[l].weight.data(), net.layers()[l].weight.data(),
                      net.layers()[l].weight.size() * sizeof(double)) == 0);
    CHECK(c.net.layers()[l].bias == net.layers()[l].bias);
  }
  CHECK(c.state.stage == s.stage);
  CHECK(c.state.epoch == s.epoch);
  CHECK(c.state.step == s.step);
  CHECK(c.state.stage_steps == s.stage_steps);
  CHECK(c.state.learning_rate == s.learning_rate);
  CHECK(c.state.best_loss == s.best_loss);
  CHECK(c.state.plateau == s.plateau);
  CHECK(c.state.velocity.weight == s.velocity.weight);
  CHECK(c.state.second_moment.bias == s.second_moment.bias);
  save_checkpoint(dir / "b.ckpt", c.net, c.state);
  CHECK(read_bytes(dir / "a.ckpt") == read_bytes(dir / "b.ckpt"));
  CHECK_FALSE(fs::exists(dir / "a.ckpt.tmp"));
}

TEST_CASE("toy configuration round trips") {
  testing::ScratchDir dir("ckpt_toy");
  CompactNet net(NetConfig::toy());
  net.initialize(2);
  save_checkpoint(dir / "t.ckpt", net, TrainState{});
  const Checkpoint c = load_checkpoint(dir / "t.ckpt");
  CHECK(c.net.config() == NetConfig::toy());
  CHECK(c.net.parameter_count() == net.parameter_count());
  CHECK_FALSE(c.state.has_velocity);
  CHECK(c.state.stage == "init");
}

TEST_CASE("corrupt checkpoints are rejected") {
  testing::ScratchDir dir("ckpt_bad");
  CompactNet net(NetConfig::toy());
  net.initialize(2);
  save_checkpoint(dir / "ok.ckpt", net, TrainState{});
  const std::string good = read_bytes(dir / "ok.ckpt");

  std::string magic = good;
  magic[0] = 'X';
  write_bytes(dir / "magic.ckpt", magic);
  CHECK_THROWS_AS(load_checkpoint(dir / "magic.ckpt"), FormatError);

  std::string version = good;
  version[8] = 9;  // first byte of the version field after the 8-byte magic
  write_bytes(dir / "version.ckpt", version);
  try {
    load_checkpoint(dir / "version.ckpt");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }

  for (std::size_t cut : {std::size_t{4}, std::size_t{20}, good.size() / 2, good.size() - 1}) {
    write_bytes(dir / "trunc.ckpt", good.substr(0, cut));
    CHECK_THROWS_AS(load_checkpoint(dir / "trunc.ckpt"), FormatError);
  }
  write_bytes(dir / "extra.ckpt", good + "x");
  CHECK_THROWS_AS(load_checkpoint(dir / "extra.ckpt"), FormatError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), FormatError);
}

}  // TEST_SUITE
