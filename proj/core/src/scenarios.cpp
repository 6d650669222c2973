// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/harness/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace bcil::harness {

TrackingMetrics run_tracking_scenario(double duration_s) {
  const auto t0 = std::chrono::steady_clock::now();
  LoopConfig lc;  // one arm, free space
  sim::WorldState world = sim::make_world(lc.world, 1);
  ControlLoop loop(lc, world);

  const ExpertConfig hand;
  const int n = lc.world.n_joints();
  std::vector<double> hand_torque(n, 0.0);
  const std::int64_t ticks = static_cast<std::int64_t>(duration_s * 1000.0);

  TrackingMetrics m;
  double acc = 0.0;
  long count = 0;
  for (std::int64_t i = 0; i < ticks; ++i) {
    const double t = static_cast<double>(i) * sim::kDt;
    const double target = 0.5 * std::sin(2.0 * M_PI * 0.5 * t);
    const auto& w = loop.world();
    hand_torque[0] =
        std::clamp(hand.hand_kp * (target - w.leader[0].angle) - hand.hand_kd * w.leader[0].velocity,
                   -hand.hand_max_torque, hand.hand_max_torque);
    const double e = w.leader[0].angle - w.follower[0].angle;
    if (t >= 1.0) {
      acc += e * e;
      ++count;
      m.max_abs_e = std::max(m.max_abs_e, std::abs(e));
    }
    loop.step_teleop(hand_torque);
  }
  m.rms_after_1s = std::sqrt(acc / static_cast<double>(count));
  m.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

WallPressMetrics run_wall_press(double stiffness, double duration_s, double nominal_scale) {
  LoopConfig lc;
  lc.nominal_scale = nominal_scale;
  sim::WorldState world = sim::make_world(lc.world, 2);
  sim::ContactObject obj;
  obj.center = 0.0;  // arms start at x = 0, already engaged
  obj.stiffness = stiffness;
  obj.damping = 2.0;
  world.objects.push_back(obj);
  ControlLoop loop(lc, world);

  const ExpertConfig hand;
  const int grip = lc.world.grip_index(0);
  const double touch = sim::touch_angle(lc.world, obj);
  std::vector<double> hand_torque(lc.world.n_joints(), 0.0);

  const std::int64_t ticks = static_cast<std::int64_t>(duration_s * 1000.0);
  double target = 0.0;
  bool frozen = false;
  WallPressMetrics m;

  // Steady-state statistics over the final quarter of the run.
  const std::int64_t steady_from = (3 * ticks) / 4;
  double sum_l = 0.0, sum_f = 0.0, sum_true = 0.0;
  long count = 0;

  for (std::int64_t i = 0; i < ticks; ++i) {
    const auto& w = loop.world();
    if (!frozen) {
      const double rate =
          (w.leader[grip].angle < touch - hand.near_gap) ? hand.close_speed_fast : hand.close_speed;
      target = std::min(target + rate * sim::kDt, touch + 0.4);
      if (std::abs(loop.tau_hat_follower()[grip]) >= 1.0) {
        frozen = true;
        target = w.leader[grip].angle + hand.squeeze_margin;
      }
    }
    hand_torque[grip] = std::clamp(
        hand.hand_kp * (target - w.leader[grip].angle) - hand.hand_kd * w.leader[grip].velocity,
        -hand.hand_max_torque, hand.hand_max_torque);
    loop.step_teleop(hand_torque);
    if (i >= steady_from) {
      sum_l += loop.tau_hat_leader()[grip];
      sum_f += loop.tau_hat_follower()[grip];
      sum_true += loop.world().follower[grip].external_torque;
      ++count;
    }
  }
  m.tau_hat_l = sum_l / count;
  m.tau_hat_f = sum_f / count;
  m.tau_true_f = sum_true / count;
  m.residual_ratio = std::abs(m.tau_hat_l + m.tau_hat_f) / std::max(std::abs(m.tau_hat_f), 0.01);
  m.signs_opposite = (m.tau_hat_l > 0.0 && m.tau_hat_f < 0.0) ||
                     (m.tau_hat_l < 0.0 && m.tau_hat_f > 0.0);
  m.rfob_rel_err = std::abs(m.tau_hat_f - m.tau_true_f) / std::abs(m.tau_true_f);
  m.settle_used_s = static_cast<double>(ticks - steady_from) * sim::kDt;
  return m;
}

ScheduleMetrics run_schedule_probe(double latency_ms, double duration_s, int chunk_len,
                                   int refill_trigger) {
  const TaskSpec task = TaskSpec::pick_place();
  const LoopConfig lc = task.loop_config();
  sim::WorldState world = task.make_world(7);

  exec::ReplayChunkSource source;
  source.k = chunk_len;
  source.n = 3 * lc.world.n_joints();
  // Hold the initial pose: one row repeated.
  std::vector<double> row(static_cast<std::size_t>(source.n), 0.0);
  for (int j = 0; j < lc.world.n_joints(); ++j) row[3 * j + 0] = world.follower[j].angle;
  source.rows.assign(4096, row);

  exec::ScheduleConfig sched;
  sched.inference_latency_ms = latency_ms;
  sched.refill_trigger = refill_trigger;

  const auto res = exec::run_autonomous(lc, std::move(world), source, sched, duration_s,
                                        /*position_only=*/false, "task=schedule_probe\n");
  ScheduleMetrics m;
  m.underruns = res.underruns;
  m.latches = res.latches;
  m.inferences = res.inferences;
  m.fault = res.fault;
  m.fault_message = res.fault_message;
  m.ticks = static_cast<long>(res.episode.samples().size());
  return m;
}

}  // namespace bcil::harness
