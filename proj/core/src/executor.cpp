// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/exec/executor.hpp"

#include <cmath>

#include "bcil/errors.hpp"

namespace bcil::exec {

void ScheduleConfig::validate(int chunk_len) const {
  if (motor_rate_hz <= 0 || command_rate_hz <= 0 || motor_rate_hz % command_rate_hz != 0) {
    throw ConfigError("schedule: motor rate must be a positive multiple of the command rate");
  }
  if (refill_trigger < 1 || refill_trigger >= chunk_len) {
    throw ConfigError("schedule: refill trigger must be in [1, k)");
  }
  if (!(inference_latency_ms > 0.0)) {
    throw ConfigError("schedule: inference latency must be positive");
  }
  // Latencies beyond the chunk horizon are allowed to exist: they are the
  // designed-failure path exercised by the underrun tests.
}

std::vector<ctrl::JointObs> ChunkBuffer::pop() {
  if (rows_.empty()) throw ExecFault("chunk buffer underrun: no row to serve");
  auto row = std::move(rows_.front());
  rows_.pop_front();
  return row;
}

policy::ActionChunk PolicyChunkSource::predict(const Observation& obs) {
  return model->infer(obs.frames, obs.f);
}

policy::ActionChunk ReplayChunkSource::predict(const Observation& obs) {
  const std::int64_t idx = obs.t_us / 10000;
  policy::ActionChunk c;
  c.k = k;
  c.n = n;
  c.v.resize(static_cast<std::size_t>(k) * n);
  for (int i = 0; i < k; ++i) {
    const std::size_t src =
        std::min<std::size_t>(static_cast<std::size_t>(idx + i), rows.size() - 1);
    std::copy(rows[src].begin(), rows[src].end(), c.v.begin() + static_cast<std::size_t>(i) * n);
  }
  return c;
}

ExecutorLoop::ExecutorLoop(const LoopConfig& cfg, sim::WorldState initial, ChunkSource& source,
                           const ScheduleConfig& sched, bool position_only)
    : loop_(cfg, std::move(initial)),
      source_(source),
      sched_(sched),
      position_only_(position_only),
      n_joints_(cfg.world.n_joints()) {
  sched_.validate(source.chunk_len());
  if (source.state_dim() != 3 * n_joints_) {
    throw ConfigError("executor: source state_dim " + std::to_string(source.state_dim()) +
                      " does not match world (" + std::to_string(3 * n_joints_) + ")");
  }
  // Until the first chunk arrives the follower holds its pose.
  latched_.resize(n_joints_);
  for (int j = 0; j < n_joints_; ++j) {
    latched_[j] = ctrl::JointObs{loop_.world().follower[j].angle, 0.0, 0.0};
  }
  frame_cache_.resize(cfg.world.n_cameras());
}

void ExecutorLoop::render_frames() {
  for (int cam = 0; cam < loop_.config().world.n_cameras(); ++cam) {
    frame_cache_[cam] = sim::render_camera(loop_.world(), loop_.config().world, cam);
  }
}

std::vector<std::vector<ctrl::JointObs>> ExecutorLoop::rows_from_chunk(
    const policy::ActionChunk& c) const {
  if (c.k != source_.chunk_len() || c.n != 3 * n_joints_) {
    throw ExecFault("executor: model returned a chunk of wrong shape");
  }
  std::vector<std::vector<ctrl::JointObs>> rows(c.k);
  for (int i = 0; i < c.k; ++i) {
    rows[i].resize(n_joints_);
    for (int j = 0; j < n_joints_; ++j) {
      const double th = c.at(i, 3 * j + 0);
      const double dth = c.at(i, 3 * j + 1);
      const double tau = c.at(i, 3 * j + 2);
      if (!std::isfinite(th) || !std::isfinite(dth) || !std::isfinite(tau)) {
        throw ExecFault("executor: non-finite model output");
      }
      rows[i][j] = ctrl::JointObs{th, dth, tau};
    }
  }
  return rows;
}

void ExecutorLoop::maybe_schedule() {
  if (in_flight_ || scheduled_this_chunk_) return;
  const bool bootstrap = !serving_chunk_rows_ && buffer_.empty() && inferences_ == 0;
  if (!bootstrap && served_this_chunk_ < sched_.refill_trigger) return;

  Observation obs;
  obs.t_us = loop_.world().sim_time_us;
  for (const auto& img : frame_cache_) obs.frames.push_back(img.rgb.data());
  obs.f.resize(static_cast<std::size_t>(3) * n_joints_);
  const auto& tau_hat = loop_.tau_hat_follower();
  for (int j = 0; j < n_joints_; ++j) {
    obs.f[3 * j + 0] = loop_.world().follower[j].angle;
    obs.f[3 * j + 1] = loop_.world().follower[j].velocity;
    obs.f[3 * j + 2] = tau_hat[j];
  }
  pending_ = source_.predict(obs);
  in_flight_ = true;
  scheduled_this_chunk_ = true;
  arrival_tick_ = tick_ + sched_.latency_ticks();
  events_.push_back({ExecEvent::Kind::schedule, tick_});
  ++inferences_;
}

void ExecutorLoop::tick() {
  const int tpc = sched_.ticks_per_command();

  if (tick_ % tpc == 0) render_frames();

  // A finished inference lands before any pop at the same tick; fresher
  // predictions replace the stale tail.
  if (in_flight_ && tick_ >= arrival_tick_) {
    buffer_.replace(rows_from_chunk(*pending_));
    pending_.reset();
    in_flight_ = false;
    served_this_chunk_ = 0;
    scheduled_this_chunk_ = false;
    events_.push_back({ExecEvent::Kind::arrival, tick_});
  }

  if (tick_ % tpc == 0) {
    // The outgoing row has completed its service window.
    if (serving_chunk_rows_) ++served_this_chunk_;
    if (!buffer_.empty()) {
      latched_ = buffer_.pop();
      serving_chunk_rows_ = true;
      events_.push_back({ExecEvent::Kind::latch, tick_});
    } else if (serving_chunk_rows_) {
      events_.push_back({ExecEvent::Kind::underrun, tick_});
      throw ExecFault("chunk buffer underrun at tick " + std::to_string(tick_));
    } else {
      // Pre-start grace: hold the initial pose until the first chunk lands.
      events_.push_back({ExecEvent::Kind::latch, tick_});
    }
    maybe_schedule();
  }

  pre_follower_ = loop_.world().follower;
  loop_.step_autonomous(latched_, position_only_);
  ++tick_;
}

ExecResult run_autonomous(const LoopConfig& cfg, sim::WorldState initial, ChunkSource& source,
                          const ScheduleConfig& sched, double duration_s, bool position_only,
                          const std::string& meta) {
  ExecResult res;
  const int n_joints = cfg.world.n_joints();

  data::EpisodeHeader header;
  header.n_joints = static_cast<std::uint16_t>(n_joints);
  header.robot_rate_hz = static_cast<std::uint32_t>(sched.motor_rate_hz);
  header.image_rate_hz = static_cast<std::uint32_t>(sched.command_rate_hz);
  header.img_w = cfg.world.img_w;
  header.img_h = cfg.world.img_h;
  header.n_cameras = static_cast<std::uint8_t>(cfg.world.n_cameras());
  header.meta = meta;
  res.episode = data::Episode(header);
  res.debug.n_joints = static_cast<std::uint16_t>(n_joints);

  ExecutorLoop ex(cfg, std::move(initial), source, sched, position_only);
  const std::int64_t total_ticks = static_cast<std::int64_t>(std::llround(duration_s * 1000.0));
  const int tpc = sched.ticks_per_command();

  double eq1_acc = 0.0;
  long eq1_n = 0;
  double eq2_acc = 0.0;
  long eq2_n = 0;
  double grip_acc = 0.0;
  long grip_n = 0;

  std::vector<bool> was_grasped(ex.loop().world().objects.size());
  for (std::size_t i = 0; i < was_grasped.size(); ++i) {
    was_grasped[i] = ex.loop().world().objects[i].grasped;
  }

  try {
    for (std::int64_t n = 0; n < total_ticks; ++n) {
      const std::uint64_t t_us = static_cast<std::uint64_t>(n) * 1000u;
      ex.tick();

      if (n % tpc == 0) {
        for (int cam = 0; cam < cfg.world.n_cameras(); ++cam) {
          data::Frame f;
          f.t_us = t_us;
          f.cam_id = static_cast<std::uint8_t>(cam);
          f.pixels = ex.frame_cache()[cam].rgb;
          res.episode.append_frame(std::move(f));
        }
      }

      const auto& pre = ex.pre_follower();
      const auto& latched = ex.latched();
      const auto& tau_hat_f = ex.loop().tau_hat_follower();
      data::JointSample s;
      s.t_us = t_us;
      s.v.resize(static_cast<std::size_t>(6) * n_joints);
      for (int j = 0; j < n_joints; ++j) {
        s.v[6 * j + 0] = latched[j].angle;
        s.v[6 * j + 1] = latched[j].velocity;
        s.v[6 * j + 2] = latched[j].torque;
        s.v[6 * j + 3] = pre[j].angle;
        s.v[6 * j + 4] = pre[j].velocity;
        s.v[6 * j + 5] = tau_hat_f[j];
      }
      res.episode.append_sample(std::move(s));

      const auto& world = ex.loop().world();
      std::vector<double> zeros(n_joints, 0.0);
      std::vector<double> ext_l(n_joints), ext_f(n_joints), cmd_f(n_joints);
      for (int j = 0; j < n_joints; ++j) {
        ext_l[j] = world.leader[j].external_torque;
        ext_f[j] = world.follower[j].external_torque;
        cmd_f[j] = world.follower[j].applied_torque;
      }
      res.debug.append(t_us, zeros, cmd_f, ext_l, ext_f);

      // Residuals of the two bilateral goals, with the virtual leader.
      for (int j = 0; j < n_joints; ++j) {
        const double e = latched[j].angle - pre[j].angle;
        eq1_acc += e * e;
        ++eq1_n;
      }
      for (int a = 0; a < cfg.world.arms; ++a) {
        const int g = cfg.world.grip_index(a);
        if (std::abs(tau_hat_f[g]) > 0.05) {
          const double r = latched[g].torque + tau_hat_f[g];
          eq2_acc += r * r;
          ++eq2_n;
        }
      }

      bool any_grasped = false;
      for (std::size_t i = 0; i < world.objects.size(); ++i) {
        const bool g = world.objects[i].grasped;
        if (g != was_grasped[i]) {
          res.object_events.push_back({g ? ObjectEvent::Kind::attach : ObjectEvent::Kind::detach,
                                       static_cast<std::int64_t>(t_us), static_cast<int>(i),
                                       world.objects[i].center});
          was_grasped[i] = g;
        }
        any_grasped = any_grasped || g;
      }
      const int g0 = cfg.world.grip_index(0);
      res.grip_torque_trace.push_back(tau_hat_f[g0]);
      if (any_grasped) {
        for (int a = 0; a < cfg.world.arms; ++a) {
          grip_acc += std::abs(tau_hat_f[cfg.world.grip_index(a)]);
          ++grip_n;
        }
      }
    }
  } catch (const ExecFault& f) {
    res.fault = true;
    res.fault_message = f.what();
  }

  for (const auto& e : ex.events()) {
    if (e.kind == ExecEvent::Kind::latch) ++res.latches;
    if (e.kind == ExecEvent::Kind::underrun) ++res.underruns;
  }
  res.events = ex.events();
  res.inferences = ex.inferences();
  res.final_world = ex.loop().world();
  res.episode.finalize();
  res.eq1_rms = eq1_n > 0 ? std::sqrt(eq1_acc / eq1_n) : 0.0;
  res.eq2_rms = eq2_n > 0 ? std::sqrt(eq2_acc / eq2_n) : 0.0;
  res.mean_grip_torque = grip_n > 0 ? grip_acc / grip_n : 0.0;
  return res;
}

}  // namespace bcil::exec
