// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bcil/data/episode.hpp"
#include "bcil/data/episode_io.hpp"
#include "bcil/loop.hpp"
#include "bcil/policy/policy.hpp"
#include "bcil/sim/camera.hpp"

namespace bcil::exec {

struct ScheduleConfig {
  int motor_rate_hz = 1000;
  int command_rate_hz = 100;
  double inference_latency_ms = 14.3;  // ~1/70 s: the model "runs at 70 Hz" while inferring
  int refill_trigger = 2;              // rows of a chunk executed before the next inference

  int ticks_per_command() const { return motor_rate_hz / command_rate_hz; }
  int latency_ticks() const {
    return static_cast<int>(std::ceil(inference_latency_ms * motor_rate_hz / 1000.0));
  }

  void validate(int chunk_len) const;
};

// FIFO of predicted leader rows. Serving from an empty buffer is an
// execution fault (underrun); a freshly arrived chunk replaces whatever
// stale tail is left.
class ChunkBuffer {
 public:
  void replace(std::vector<std::vector<ctrl::JointObs>> rows) { rows_.assign(rows.begin(), rows.end()); }
  std::vector<ctrl::JointObs> pop();
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

 private:
  std::deque<std::vector<ctrl::JointObs>> rows_;
};

// What a predictor sees when an inference is scheduled.
struct Observation {
  std::int64_t t_us = 0;
  std::vector<const std::uint8_t*> frames;  // per camera, img_w*img_h*3
  std::vector<double> f;                    // follower state, N dims
};

struct ChunkSource {
  virtual ~ChunkSource() = default;
  virtual policy::ActionChunk predict(const Observation& obs) = 0;
  virtual int chunk_len() const = 0;
  virtual int state_dim() const = 0;
};

// Wraps a trained policy.
struct PolicyChunkSource final : ChunkSource {
  const policy::BiACTf* model;

  explicit PolicyChunkSource(const policy::BiACTf* m) : model(m) {}
  policy::ActionChunk predict(const Observation& obs) override;
  int chunk_len() const override { return model->config().chunk; }
  int state_dim() const override { return model->config().state_dim; }
};

// Plays back a recorded 100 Hz leader sequence, bypassing any model; used to
// validate the bilateral bridge law and the scheduler on their own.
struct ReplayChunkSource final : ChunkSource {
  std::vector<std::vector<double>> rows;  // N dims each, 100 Hz
  int k = 20;
  int n = 0;

  policy::ActionChunk predict(const Observation& obs) override;
  int chunk_len() const override { return k; }
  int state_dim() const override { return n; }
};

struct ExecEvent {
  enum class Kind { latch, schedule, arrival, underrun };
  Kind kind;
  std::int64_t tick = 0;
};

struct ObjectEvent {
  enum class Kind { attach, detach };
  Kind kind;
  std::int64_t t_us = 0;
  int object = 0;
  double center = 0.0;
};

struct ExecResult {
  data::Episode episode;
  data::DebugTrace debug;
  std::vector<ExecEvent> events;
  std::vector<ObjectEvent> object_events;
  sim::WorldState final_world;

  bool fault = false;
  std::string fault_message;
  int underruns = 0;
  int inferences = 0;
  long latches = 0;

  double eq1_rms = 0.0;  // position goal residual over the run
  double eq2_rms = 0.0;  // force goal residual during contact
  double mean_grip_torque = 0.0;  // mean |tau_hat_f| on grip joints while grasped
  std::vector<double> grip_torque_trace;  // per tick, first grip joint
};

// Single deterministic loop with simulated inference latency: every motor
// tick steps the world at 1 kHz, every 10th tick latches the buffer head as
// the command row, and a new inference is scheduled once `refill_trigger`
// rows of the current chunk have been executed. The chunk arrives
// latency_ms later and replaces the remaining tail.
class ExecutorLoop {
 public:
  ExecutorLoop(const LoopConfig& cfg, sim::WorldState initial, ChunkSource& source,
               const ScheduleConfig& sched, bool position_only);

  void tick();  // one 1 ms step; throws ExecFault on underrun or bad output

  const ControlLoop& loop() const { return loop_; }
  ControlLoop& loop() { return loop_; }
  std::int64_t ticks_done() const { return tick_; }
  const std::vector<ExecEvent>& events() const { return events_; }
  int inferences() const { return inferences_; }
  const std::vector<ctrl::JointObs>& latched() const { return latched_; }
  std::size_t buffer_size() const { return buffer_.size(); }
  const std::vector<sim::Image>& frame_cache() const { return frame_cache_; }

  // Pre-step world snapshot of the current tick (for recording).
  const std::vector<sim::JointState>& pre_follower() const { return pre_follower_; }

 private:
  void render_frames();
  void maybe_schedule();
  std::vector<std::vector<ctrl::JointObs>> rows_from_chunk(const policy::ActionChunk& c) const;

  ControlLoop loop_;
  ChunkSource& source_;
  ScheduleConfig sched_;
  bool position_only_;
  int n_joints_;

  ChunkBuffer buffer_;
  std::vector<ctrl::JointObs> latched_;
  bool serving_chunk_rows_ = false;  // latched_ comes from the current chunk
  int served_this_chunk_ = 0;
  bool scheduled_this_chunk_ = false;

  bool in_flight_ = false;
  std::int64_t arrival_tick_ = -1;
  std::optional<policy::ActionChunk> pending_;

  std::int64_t tick_ = 0;
  std::vector<ExecEvent> events_;
  int inferences_ = 0;
  std::vector<sim::Image> frame_cache_;
  std::vector<sim::JointState> pre_follower_;
};

// Full closed-loop rollout recorded in the demonstration format (replayable).
ExecResult run_autonomous(const LoopConfig& cfg, sim::WorldState initial, ChunkSource& source,
                          const ScheduleConfig& sched, double duration_s, bool position_only,
                          const std::string& meta);

}  // namespace bcil::exec
