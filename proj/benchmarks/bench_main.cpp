// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include <benchmark/benchmark.h>

#include "bcil/harness/collect.hpp"
#include "bcil/loop.hpp"
#include "bcil/nn/nn.hpp"
#include "bcil/policy/gradcheck.hpp"
#include "bcil/sim/camera.hpp"

using namespace bcil;

static void BM_WorldStep(benchmark::State& state) {
  sim::WorldConfig cfg;
  sim::WorldState w = sim::make_world(cfg, 1);
  sim::ContactObject obj;
  obj.center = 0.0;
  w.objects.push_back(obj);
  const std::vector<double> cmds(cfg.n_joints(), 0.05);
  for (auto _ : state) {
    sim::step_world(w, cfg, cmds, cmds);
    benchmark::DoNotOptimize(w.sim_time_us);
  }
}
BENCHMARK(BM_WorldStep);

static void BM_TeleopTick(benchmark::State& state) {
  LoopConfig lc;
  ControlLoop loop(lc, sim::make_world(lc.world, 1));
  const std::vector<double> hand(lc.world.n_joints(), 0.1);
  for (auto _ : state) {
    loop.step_teleop(hand);
    benchmark::DoNotOptimize(loop.world().sim_time_us);
  }
}
BENCHMARK(BM_TeleopTick);

static void BM_RenderOverhead(benchmark::State& state) {
  sim::WorldConfig cfg;
  sim::WorldState w = sim::make_world(cfg, 1);
  sim::ContactObject obj;
  w.objects.push_back(obj);
  for (auto _ : state) {
    auto img = sim::render_camera(w, cfg, 0);
    benchmark::DoNotOptimize(img.rgb.data());
  }
}
BENCHMARK(BM_RenderOverhead);

static void BM_MatMul64(benchmark::State& state) {
  nn::Tape<float> t;
  Rng rng(1);
  auto a = nn::Tensor<float>::zeros({33, 64});
  auto b = nn::Tensor<float>::zeros({64, 64});
  for (auto& x : a.v) x = static_cast<float>(rng.uniform(-1, 1));
  for (auto& x : b.v) x = static_cast<float>(rng.uniform(-1, 1));
  const auto va = t.leaf(a), vb = t.leaf(b);
  for (auto _ : state) {
    nn::Tape<float> local;
    benchmark::DoNotOptimize(local.val(local.matmul(local.leaf(a), local.leaf(b))).v.data());
  }
  (void)va;
  (void)vb;
}
BENCHMARK(BM_MatMul64);

static void BM_PolicyInference(benchmark::State& state) {
  policy::BiACTConfig cfg;  // full-size default architecture
  policy::NormStats stats;
  stats.state_mean.assign(cfg.state_dim, 0.0);
  stats.state_std.assign(cfg.state_dim, 1.0);
  stats.action_mean.assign(cfg.state_dim, 0.0);
  stats.action_std.assign(cfg.state_dim, 1.0);
  const policy::BiACTf model(cfg, stats);
  const std::vector<std::uint8_t> img(static_cast<std::size_t>(cfg.img_w) * cfg.img_h * 3, 99);
  const std::vector<double> f(cfg.state_dim, 0.1);
  for (auto _ : state) {
    const auto chunk = model.infer({img.data(), img.data()}, f);
    benchmark::DoNotOptimize(chunk.v.data());
  }
}
BENCHMARK(BM_PolicyInference);

static void BM_EpisodeEncode(benchmark::State& state) {
  const auto task = harness::TaskSpec::pick_place();
  harness::CollectOptions opts;
  const auto demo = harness::run_demo(task, 1, opts);
  for (auto _ : state) {
    auto bytes = data::encode_episode(demo.episode);
    benchmark::DoNotOptimize(bytes.data());
  }
}
BENCHMARK(BM_EpisodeEncode);

BENCHMARK_MAIN();
