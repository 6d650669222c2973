// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include <cmath>
#include <filesystem>

#include "bcil/errors.hpp"
#include "bcil/policy/gradcheck.hpp"
#include "bcil/policy/policy.hpp"
#include "bcil/rng.hpp"
#include "bcil/sim/camera.hpp"
#include "bcil/sim/world.hpp"
#include "doctest.h"

using namespace bcil;
using namespace bcil::policy;

namespace {

BiACTConfig micro_cfg() {
  BiACTConfig cfg = gradcheck_config();
  cfg.cameras = 2;
  cfg.img_w = cfg.img_h = 32;
  return cfg;
}

NormStats unit_stats(int n) {
  NormStats s;
  s.state_mean.assign(n, 0.0);
  s.state_std.assign(n, 1.0);
  s.action_mean.assign(n, 0.0);
  s.action_std.assign(n, 1.0);
  return s;
}

std::vector<std::uint8_t> gray_frame(int w, int h, std::uint8_t v = 100) {
  return std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3, v);
}

}  // namespace

TEST_SUITE_BEGIN("policy");

TEST_CASE("norm stats on a two-sample toy set match hand arithmetic") {
  const std::vector<std::vector<double>> states{{1.0, 4.0}, {3.0, 8.0}};
  const std::vector<std::vector<double>> actions{{0.0, 0.0}, {2.0, 0.0}};
  const NormStats s = NormStats::fit(states, actions);
  CHECK(s.state_mean[0] == doctest::Approx(2.0));
  CHECK(s.state_mean[1] == doctest::Approx(6.0));
  CHECK(s.state_std[0] == doctest::Approx(1.0));  // population sigma
  CHECK(s.state_std[1] == doctest::Approx(2.0));
  CHECK(s.action_mean[0] == doctest::Approx(1.0));
  // Constant dimension: sigma floored, normalized value 0.
  CHECK(s.action_std[1] == NormStats::kSigmaFloor);
  const auto z = NormStats::normalize(std::vector<double>{0.0, 0.0}, s.action_mean, s.action_std);
  CHECK(z[1] == 0.0);
}

TEST_CASE("normalize/denormalize round-trip within 1e-6 relative") {
  Rng rng(3);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 20; ++i) {
    rows.push_back({rng.uniform(-3, 3), rng.uniform(100, 200), rng.uniform(-0.01, 0.01)});
  }
  const NormStats s = NormStats::fit(rows, rows);
  for (const auto& r : rows) {
    const auto back =
        NormStats::denormalize(NormStats::normalize(r, s.state_mean, s.state_std), s.state_mean,
                               s.state_std);
    for (int i = 0; i < 3; ++i) {
      CHECK(back[i] == doctest::Approx(r[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("empty dataset is a configuration error") {
  CHECK_THROWS_AS(NormStats::fit({}, {}), ConfigError);
}

TEST_CASE("config validation and kv round-trip") {
  BiACTConfig cfg;
  cfg.validate();
  const KvConfig kv = cfg.to_kv();
  const BiACTConfig back = BiACTConfig::from_kv(kv);
  CHECK(back.chunk == cfg.chunk);
  CHECK(back.lr == cfg.lr);
  CHECK(back.force_mask == cfg.force_mask);

  SUBCASE("unknown key is rejected") {
    KvConfig bad = kv;
    bad.set("no_such_knob", "1");
    CHECK_THROWS_AS(BiACTConfig::from_kv(bad), ConfigError);
  }
  SUBCASE("heads must divide model dim") {
    BiACTConfig c;
    c.model_dim = 64;
    c.heads = 5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("image size must fit the conv stack") {
    BiACTConfig c;
    c.img_w = 30;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
}

TEST_CASE("two cameras give 2*16 + 1 = 33 observation tokens") {
  BiACTConfig cfg;  // defaults: 32x32, model_dim 64
  CHECK(cfg.obs_tokens() == 33);
  const BiACT<float> model(cfg, unit_stats(cfg.state_dim));
  nn::Tape<float> tape(const_cast<nn::ParamStore<float>*>(&model.store()));
  const auto img = gray_frame(32, 32);
  const std::vector<double> f(cfg.state_dim, 0.1);
  const auto toks =
      model.build_obs_tokens(tape, {img.data(), img.data()}, model.normalized_state(f));
  CHECK(tape.val(toks).shape == std::vector<int>{33, 64});
}

TEST_CASE("posterior outputs latent_dim mu and logvar") {
  const BiACTConfig cfg = micro_cfg();
  const BiACT<float> model(cfg, unit_stats(cfg.state_dim));
  nn::Tape<float> tape(const_cast<nn::ParamStore<float>*>(&model.store()));
  const std::vector<double> f(cfg.state_dim, 0.0);
  const std::vector<double> chunk(static_cast<std::size_t>(cfg.chunk) * cfg.state_dim, 0.2);
  const auto [mu, lv] = model.build_posterior(tape, chunk, f);
  CHECK(tape.val(mu).shape == std::vector<int>{1, cfg.latent_dim});
  CHECK(tape.val(lv).shape == std::vector<int>{1, cfg.latent_dim});
}

TEST_CASE("inference yields exactly k x N, deterministic, finite and bounded") {
  const BiACTConfig cfg = micro_cfg();
  const BiACT<float> model(cfg, unit_stats(cfg.state_dim));
  const auto img0 = gray_frame(cfg.img_w, cfg.img_h, 90);
  const auto img1 = gray_frame(cfg.img_w, cfg.img_h, 160);
  const std::vector<double> f(cfg.state_dim, 0.3);
  const ActionChunk a = model.infer({img0.data(), img1.data()}, f);
  CHECK(a.k == cfg.chunk);
  CHECK(a.n == cfg.state_dim);
  CHECK(a.v.size() == static_cast<std::size_t>(cfg.chunk) * cfg.state_dim);
  for (double v : a.v) {
    CHECK(std::isfinite(v));
    CHECK(std::abs(v) < 3.0);  // head init keeps the untrained output small
  }
  const ActionChunk b = model.infer({img0.data(), img1.data()}, f);
  CHECK(a.v == b.v);  // inference determinism
}

TEST_CASE("shifting the object by one pixel changes at least one image token") {
  sim::WorldConfig wc;
  sim::WorldState w = sim::make_world(wc, 1);
  sim::ContactObject obj;
  obj.center = 0.0;
  w.objects.push_back(obj);
  const auto before = sim::render_camera(w, wc, 0);
  w.objects[0].center += 3.2 / 31.0;  // exactly one overhead pixel
  const auto after = sim::render_camera(w, wc, 0);
  REQUIRE(before.rgb != after.rgb);

  const BiACTConfig cfg = micro_cfg();
  const BiACT<float> model(cfg, unit_stats(cfg.state_dim));
  nn::Tape<float> tape(const_cast<nn::ParamStore<float>*>(&model.store()));
  const std::vector<double> f(cfg.state_dim, 0.0);
  const auto fa = model.normalized_state(f);
  const auto t1 = model.build_obs_tokens(tape, {before.rgb.data(), before.rgb.data()}, fa);
  const auto t2 = model.build_obs_tokens(tape, {after.rgb.data(), after.rgb.data()}, fa);
  CHECK(tape.val(t1).v != tape.val(t2).v);
}

TEST_CASE("force mask zeroes exactly the torque components of the input") {
  BiACTConfig cfg = micro_cfg();
  cfg.force_mask = true;
  const BiACT<float> model(cfg, unit_stats(cfg.state_dim));
  const std::vector<double> f{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  const auto masked = model.normalized_state(f);
  CHECK(masked[0] == doctest::Approx(0.1));
  CHECK(masked[1] == doctest::Approx(0.2));
  CHECK(masked[2] == 0.0);  // tau of joint 0
  CHECK(masked[3] == doctest::Approx(0.4));
  CHECK(masked[5] == 0.0);  // tau of joint 1
}

TEST_CASE("save -> load -> infer is bitwise identical") {
  const BiACTConfig cfg = micro_cfg();
  const BiACT<float> model(cfg, unit_stats(cfg.state_dim));
  const auto dir = std::filesystem::temp_directory_path() / "bcil_policy_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "model.bin").string();
  model.save(path);
  const BiACT<float> back = BiACT<float>::load(path);
  const auto img = gray_frame(cfg.img_w, cfg.img_h);
  const std::vector<double> f(cfg.state_dim, -0.2);
  const ActionChunk a = model.infer({img.data(), img.data()}, f);
  const ActionChunk b = back.infer({img.data(), img.data()}, f);
  CHECK(a.v == b.v);
  std::filesystem::remove_all(dir);
}

TEST_CASE("model file fuzzing: truncation errors, never crashes") {
  const BiACTConfig cfg = micro_cfg();
  const BiACT<float> model(cfg, unit_stats(cfg.state_dim));
  const auto bytes = nn::encode_model(model.to_blob());
  for (std::size_t cut : {std::size_t(0), std::size_t(3), std::size_t(5), std::size_t(9),
                          bytes.size() / 3, bytes.size() - 2}) {
    std::vector<std::uint8_t> prefix(bytes.begin(), bytes.begin() + cut);
    CHECK_THROWS_AS(nn::decode_model(prefix), Error);
  }
  SUBCASE("bad magic") {
    auto junk = bytes;
    junk[0] = 'X';
    CHECK_THROWS_AS(nn::decode_model(junk), FormatError);
  }
  SUBCASE("round-trip is lossless") {
    const auto blob = nn::decode_model(bytes);
    CHECK(nn::encode_model(blob) == bytes);
  }
}

TEST_CASE("reparameterized sample is reproducible for a fixed seed") {
  const BiACTConfig cfg = micro_cfg();
  const BiACT<float> model(cfg, unit_stats(cfg.state_dim));
  const auto img = gray_frame(cfg.img_w, cfg.img_h);
  TrainExample ex;
  ex.frames = {img.data(), img.data()};
  ex.f.assign(cfg.state_dim, 0.1);
  ex.chunk.assign(static_cast<std::size_t>(cfg.chunk) * cfg.state_dim, -0.2);
  std::vector<float> eps(cfg.latent_dim);
  Rng rng(77);
  for (auto& e : eps) e = static_cast<float>(rng.normal());

  nn::Tape<float> t1(const_cast<nn::ParamStore<float>*>(&model.store()));
  LossParts p1;
  (void)model.build_loss(t1, ex, eps, &p1);
  nn::Tape<float> t2(const_cast<nn::ParamStore<float>*>(&model.store()));
  LossParts p2;
  (void)model.build_loss(t2, ex, eps, &p2);
  CHECK(p1.total == p2.total);
  CHECK(p1.l1 == p2.l1);
  CHECK(p1.kl == p2.kl);
}

TEST_CASE("loss decreases monotonically over the first 10 steps on a fixed batch") {
  BiACTConfig cfg = gradcheck_config();  // 1 camera micro net
  BiACT<float> model(cfg, unit_stats(cfg.state_dim));
  Rng rng(5);
  auto img = gray_frame(cfg.img_w, cfg.img_h);
  for (auto& p : img) p = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  TrainExample ex;
  ex.frames = {img.data()};
  ex.f.resize(cfg.state_dim);
  for (auto& v : ex.f) v = rng.uniform(-1, 1);
  ex.chunk.resize(static_cast<std::size_t>(cfg.chunk) * cfg.state_dim);
  for (auto& v : ex.chunk) v = rng.uniform(-1, 1);
  std::vector<float> eps(cfg.latent_dim, 0.0f);  // deterministic latent path

  double prev = 1e18;
  for (int step = 0; step < 10; ++step) {
    nn::Tape<float> tape(&model.store());
    LossParts parts;
    const auto loss = model.build_loss(tape, ex, eps, &parts);
    CHECK(parts.total < prev);
    prev = parts.total;
    model.store().zero_grad();
    tape.backward(loss);
    model.store().adam_step(static_cast<float>(1e-3));
  }
}

TEST_CASE("model/config mismatch is rejected at load") {
  const BiACTConfig cfg = micro_cfg();
  const BiACT<float> model(cfg, unit_stats(cfg.state_dim));
  auto blob = model.to_blob();
  blob.params.pop_back();  // drop a parameter
  CHECK_THROWS_AS(BiACT<float>::from_blob(blob), FormatError);
}

TEST_SUITE_END();
