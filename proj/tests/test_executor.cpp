// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include <cmath>

#include "bcil/dabi/dabi.hpp"
#include "bcil/errors.hpp"
#include "bcil/exec/executor.hpp"
#include "bcil/harness/collect.hpp"
#include "bcil/harness/evaluate.hpp"
#include "bcil/harness/scenarios.hpp"
#include "bcil/policy/dataset.hpp"
#include "doctest.h"

using namespace bcil;
using namespace bcil::exec;

TEST_SUITE_BEGIN("executor");

TEST_CASE("one chunk covers exactly k / command_rate of commands") {
  ScheduleConfig s;
  CHECK(s.ticks_per_command() == 10);
  const double horizon_ms = 20.0 * 1000.0 / s.command_rate_hz;
  CHECK(horizon_ms == 200.0);  // k=20 at 100 Hz
}

TEST_CASE("schedule validation") {
  ScheduleConfig s;
  s.command_rate_hz = 300;  // does not divide 1000
  CHECK_THROWS_AS(s.validate(20), ConfigError);
  s = ScheduleConfig{};
  s.refill_trigger = 20;
  CHECK_THROWS_AS(s.validate(20), ConfigError);
  s = ScheduleConfig{};
  CHECK_NOTHROW(s.validate(20));
}

TEST_CASE("popping an empty buffer is an execution fault") {
  ChunkBuffer b;
  CHECK_THROWS_AS(b.pop(), ExecFault);
}

TEST_CASE("replay source serves the rows at the requested command index") {
  ReplayChunkSource src;
  src.k = 3;
  src.n = 2;
  for (int i = 0; i < 10; ++i) src.rows.push_back({double(i), double(-i)});
  Observation obs;
  obs.t_us = 40000;  // command index 4
  const auto c = src.predict(obs);
  CHECK(c.at(0, 0) == 4.0);
  CHECK(c.at(1, 0) == 5.0);
  CHECK(c.at(2, 1) == -6.0);
}

TEST_CASE("default schedule runs clean: one latch per 10 ticks, zero underruns") {
  const auto m = harness::run_schedule_probe(14.3, 5.0);
  CHECK(m.underruns == 0);
  CHECK_FALSE(m.fault);
  CHECK(m.ticks == 5000);
  CHECK(m.latches == 500);  // exactly one latch per 10 motor ticks
  CHECK(m.inferences > 5);
}

TEST_CASE("underrun boundary sits exactly at (k - trigger) / command_rate") {
  SUBCASE("latency at the bound survives") {
    const auto m = harness::run_schedule_probe(180.0, 3.0);
    CHECK(m.underruns == 0);
    CHECK_FALSE(m.fault);
  }
  SUBCASE("one millisecond beyond the bound faults exactly once") {
    const auto m = harness::run_schedule_probe(181.0, 3.0);
    CHECK(m.underruns == 1);
    CHECK(m.fault);
  }
}

TEST_CASE("latency beyond the chunk horizon raises exactly one underrun fault") {
  const auto m = harness::run_schedule_probe(250.0, 3.0);
  CHECK(m.fault);
  CHECK(m.underruns == 1);
  CHECK(m.fault_message.find("underrun") != std::string::npos);
}

TEST_CASE("non-finite model output is an execution fault") {
  struct NanSource final : ChunkSource {
    policy::ActionChunk predict(const Observation&) override {
      policy::ActionChunk c;
      c.k = 20;
      c.n = 6;
      c.v.assign(120, std::numeric_limits<double>::quiet_NaN());
      return c;
    }
    int chunk_len() const override { return 20; }
    int state_dim() const override { return 6; }
  };
  const auto task = harness::TaskSpec::pick_place();
  NanSource src;
  const auto res = run_autonomous(task.loop_config(), task.make_world(3), src, ScheduleConfig{},
                                  1.0, false, "task=test\n");
  CHECK(res.fault);
  CHECK(res.fault_message.find("non-finite") != std::string::npos);
}

TEST_CASE("scripted-expert replay through the executor validates the bridge law") {
  // Record a demonstration, feed its 100 Hz leader rows back through the
  // chunk buffer + 4ch bridge, and require the same task outcome with
  // comparable tracking quality.
  const auto task = harness::TaskSpec::pick_place();
  const std::uint64_t seed = 11;
  const auto demo = harness::run_demo(task, seed);
  REQUIRE(demo.quality.acceptable());

  auto seqs = dabi::downsample_offsets(demo.episode, 10);
  ReplayChunkSource src;
  src.k = 20;
  src.n = 6;
  std::vector<double> f, l;
  for (const auto& sample : seqs[0].samples) {
    policy::split_sample(sample, 2, f, l);
    src.rows.push_back(l);
  }

  sim::WorldState world = task.make_world(seed);
  const auto res = run_autonomous(task.loop_config(), world, src, ScheduleConfig{},
                                  task.episode_s, false, task.world_meta(world, seed));
  CHECK_FALSE(res.fault);
  const auto outcome = harness::score_phases(res, task.make_world(seed));
  CHECK(outcome.pick);
  CHECK(outcome.move);
  CHECK(outcome.place);
  // Bridge correctness: tracking error within 10% of the demonstration's.
  CHECK(res.eq1_rms <= demo.quality.eq1_rms * 1.1 + 5e-4);
}

TEST_CASE("fixed source and seed give byte-identical recorded episodes") {
  const auto task = harness::TaskSpec::pick_place();
  auto run_once = [&]() {
    ReplayChunkSource src;
    src.k = 20;
    src.n = 6;
    std::vector<double> row(6, 0.0);
    sim::WorldState world = task.make_world(5);
    for (int j = 0; j < 2; ++j) row[3 * j] = world.follower[j].angle;
    src.rows.assign(1024, row);
    const auto res = run_autonomous(task.loop_config(), world, src, ScheduleConfig{}, 2.0, false,
                                    task.world_meta(world, 5));
    return data::encode_episode(res.episode);
  };
  CHECK(run_once() == run_once());
}

TEST_SUITE_END();
