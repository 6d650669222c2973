// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/harness/collect.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "bcil/errors.hpp"
#include "bcil/rng.hpp"
#include "bcil/sim/camera.hpp"

namespace fs = std::filesystem;

namespace bcil::harness {

DemoResult run_demo(const TaskSpec& task, std::uint64_t seed, const CollectOptions& opts) {
  task.validate();
  const LoopConfig lc = task.loop_config();
  const int n = lc.world.n_joints();

  sim::WorldState world = task.make_world(seed, opts.stiffness_override);
  const std::string meta = task.world_meta(world, seed);

  data::EpisodeHeader header;
  header.n_joints = static_cast<std::uint16_t>(n);
  header.robot_rate_hz = 1000;
  header.image_rate_hz = 100;
  header.img_w = lc.world.img_w;
  header.img_h = lc.world.img_h;
  header.n_cameras = static_cast<std::uint8_t>(lc.world.n_cameras());
  header.meta = meta;

  DemoResult out;
  out.episode = data::Episode(header);
  out.debug.n_joints = static_cast<std::uint16_t>(n);

  ControlLoop loop(lc, world);
  ScriptedExpert expert(task, loop.world());
  Rng jitter_rng(Rng::derive(seed, 99));

  const std::int64_t ticks = static_cast<std::int64_t>(std::llround(task.episode_s * 1000.0));
  std::vector<double> hand(n, 0.0);
  std::vector<double> prev_tau_hat_f(n, 0.0);
  std::vector<std::uint64_t> last_frame_t(lc.world.n_cameras(), 0);

  double eq1_acc = 0.0;
  long eq1_n = 0;
  double eq2_acc = 0.0;
  long eq2_n = 0;
  double grip_acc = 0.0;
  long grip_n = 0;

  for (std::int64_t tick = 0; tick < ticks; ++tick) {
    const std::uint64_t t_us = static_cast<std::uint64_t>(tick) * 1000u;

    if (tick % 10 == 0) {
      for (int cam = 0; cam < lc.world.n_cameras(); ++cam) {
        data::Frame f;
        f.cam_id = static_cast<std::uint8_t>(cam);
        std::int64_t jt = static_cast<std::int64_t>(t_us);
        if (opts.frame_jitter_ms > 0.0 && tick > 0) {
          jt += static_cast<std::int64_t>(
              std::llround(jitter_rng.uniform(-opts.frame_jitter_ms, opts.frame_jitter_ms) * 1000.0));
          // Keep per-camera monotonicity, which real capture hardware also
          // guarantees.
          jt = std::max<std::int64_t>(jt, static_cast<std::int64_t>(last_frame_t[cam]) + 1000);
        }
        f.t_us = static_cast<std::uint64_t>(jt);
        last_frame_t[cam] = f.t_us;
        f.pixels = sim::render_camera(loop.world(), lc.world, cam).rgb;
        out.episode.append_frame(std::move(f));
      }
    }

    expert.tick(loop.world(), prev_tau_hat_f, hand);
    const auto pre_l = loop.world().leader;
    const auto pre_f = loop.world().follower;
    loop.step_teleop(hand);
    prev_tau_hat_f = loop.tau_hat_follower();

    const auto& tau_l = loop.tau_hat_leader();
    const auto& tau_f = loop.tau_hat_follower();
    data::JointSample s;
    s.t_us = t_us;
    s.v.resize(static_cast<std::size_t>(6) * n);
    for (int j = 0; j < n; ++j) {
      s.v[6 * j + 0] = pre_l[j].angle;
      s.v[6 * j + 1] = pre_l[j].velocity;
      s.v[6 * j + 2] = tau_l[j];
      s.v[6 * j + 3] = pre_f[j].angle;
      s.v[6 * j + 4] = pre_f[j].velocity;
      s.v[6 * j + 5] = tau_f[j];
    }
    out.episode.append_sample(std::move(s));

    std::vector<double> cmd_l(n), cmd_f(n), ext_l(n), ext_f(n);
    for (int j = 0; j < n; ++j) {
      cmd_l[j] = loop.world().leader[j].applied_torque;
      cmd_f[j] = loop.world().follower[j].applied_torque;
      ext_l[j] = loop.world().leader[j].external_torque;
      ext_f[j] = loop.world().follower[j].external_torque;
    }
    out.debug.append(t_us, cmd_l, cmd_f, ext_l, ext_f);

    for (int j = 0; j < n; ++j) {
      const double e = pre_l[j].angle - pre_f[j].angle;
      eq1_acc += e * e;
      ++eq1_n;
    }
    bool grasped = false;
    for (const auto& obj : loop.world().objects) grasped = grasped || obj.grasped;
    for (int a = 0; a < lc.world.arms; ++a) {
      const int g = lc.world.grip_index(a);
      if (std::abs(tau_f[g]) > 0.05) {
        const double r = tau_l[g] + tau_f[g];
        eq2_acc += r * r;
        ++eq2_n;
      }
      if (grasped) {
        grip_acc += std::abs(tau_f[g]);
        ++grip_n;
      }
    }
  }

  out.episode.finalize();
  out.final_world = loop.world();
  out.quality.eq1_rms = eq1_n > 0 ? std::sqrt(eq1_acc / eq1_n) : 0.0;
  out.quality.eq2_rms_contact = eq2_n > 0 ? std::sqrt(eq2_acc / eq2_n) : 0.0;
  out.quality.expert_done = expert.done();
  out.quality.mean_grip_torque = grip_n > 0 ? grip_acc / grip_n : 0.0;
  return out;
}

CollectResult collect(const TaskSpec& task, int n_episodes, std::uint64_t seed,
                      const std::string& out_dir, const CollectOptions& opts) {
  fs::create_directories(out_dir);
  CollectResult res;
  for (int ep = 0; ep < n_episodes; ++ep) {
    bool written = false;
    for (int attempt = 0; attempt < 8 && !written; ++attempt) {
      ++res.attempts;
      const std::uint64_t ep_seed =
          Rng::derive(seed, static_cast<std::uint64_t>(ep) * 16 + attempt);
      DemoResult demo = run_demo(task, ep_seed, opts);
      const auto report = data::validate_episode(demo.episode);
      if (!demo.quality.acceptable() || !report.pass) {
        ++res.rejected;
        continue;
      }
      char name[32];
      std::snprintf(name, sizeof(name), "ep_%03d.biep", ep);
      const std::string path = (fs::path(out_dir) / name).string();
      data::write_episode(demo.episode, path);
      data::write_debug_trace(demo.debug, data::debug_sidecar_path(path));
      res.files.push_back(path);
      written = true;
    }
    if (!written) {
      throw ExecFault("collect: could not record an acceptable episode " + std::to_string(ep) +
                      " (demonstration fault)");
    }
  }
  return res;
}

}  // namespace bcil::harness
