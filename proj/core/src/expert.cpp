// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/harness/expert.hpp"

#include <algorithm>
#include <cmath>

#include "bcil/errors.hpp"

namespace bcil::harness {

ScriptedExpert::ScriptedExpert(const TaskSpec& task, const sim::WorldState& initial)
    : task_(task), cfg_(task.expert), lc_(task.loop_config()) {
  if (initial.objects.empty()) throw ConfigError("expert: world has no object to manipulate");
  object_x_ = initial.objects.front().center;
  target_.assign(static_cast<std::size_t>(lc_.world.n_joints()), 0.0);
  grip_frozen_.assign(static_cast<std::size_t>(task_.arms), false);
  for (int a = 0; a < task_.arms; ++a) {
    target_[lc_.world.transport_index(a)] = initial.leader[lc_.world.transport_index(a)].angle;
    target_[lc_.world.grip_index(a)] = cfg_.open_angle;
  }
}

void ScriptedExpert::advance(ExpertPhase next) {
  phase_ = next;
  phase_t_ = 0.0;
}

void ScriptedExpert::ramp(double& target, double goal, double rate) {
  const double step = rate * sim::kDt;
  if (target < goal) {
    target = std::min(goal, target + step);
  } else {
    target = std::max(goal, target - step);
  }
}

void ScriptedExpert::tick(const sim::WorldState& w, const std::vector<double>& tau_hat_follower,
                          std::vector<double>& hand_out) {
  const auto& obj = w.objects.front();
  const double grip_goal = lc_.world.grip.angle_max - 0.05;

  bool all = true;
  switch (phase_) {
    case ExpertPhase::approach:
      for (int a = 0; a < task_.arms; ++a) {
        const int tr = lc_.world.transport_index(a);
        ramp(target_[tr], object_x_, cfg_.approach_speed);
        ramp(target_[lc_.world.grip_index(a)], cfg_.open_angle, cfg_.close_speed_fast);
        all = all && std::abs(w.leader[tr].angle - object_x_) < 0.02 &&
              std::abs(w.leader[tr].velocity) < 0.2;
      }
      if (all && phase_t_ > 0.2) advance(ExpertPhase::close);
      break;

    case ExpertPhase::close:
      for (int a = 0; a < task_.arms; ++a) {
        const int gr = lc_.world.grip_index(a);
        if (!grip_frozen_[a]) {
          // Fast until the jaws are close, slow through the contact.
          const double touch = sim::touch_angle(lc_.world, obj);
          const double rate = (w.leader[gr].angle < touch - cfg_.near_gap) ? cfg_.close_speed_fast
                                                                           : cfg_.close_speed;
          ramp(target_[gr], grip_goal, rate);
          if (std::abs(tau_hat_follower[gr]) >= std::max(cfg_.grasp_torque, 0.02)) {
            grip_frozen_[a] = true;
            target_[gr] = std::min(grip_goal, w.leader[gr].angle + cfg_.squeeze_margin);
          }
        }
        all = all && grip_frozen_[a];
      }
      if (all) advance(ExpertPhase::confirm);
      break;

    case ExpertPhase::confirm:
      if (obj.grasped || phase_t_ > 1.0) advance(ExpertPhase::transport);
      break;

    case ExpertPhase::transport:
      for (int a = 0; a < task_.arms; ++a) {
        const int tr = lc_.world.transport_index(a);
        ramp(target_[tr], task_.place_center, cfg_.approach_speed);
        all = all && std::abs(w.leader[tr].angle - task_.place_center) < 0.02 &&
              std::abs(w.leader[tr].velocity) < 0.2;
      }
      if (all) advance(ExpertPhase::settle);
      break;

    case ExpertPhase::settle:
      if (phase_t_ > cfg_.settle_s) advance(ExpertPhase::open_grip);
      break;

    case ExpertPhase::open_grip:
      for (int a = 0; a < task_.arms; ++a) {
        ramp(target_[lc_.world.grip_index(a)], cfg_.open_angle, cfg_.close_speed_fast);
        grip_frozen_[a] = false;
      }
      if (!obj.grasped && phase_t_ > 0.3) advance(ExpertPhase::retreat);
      break;

    case ExpertPhase::retreat:
      for (int a = 0; a < task_.arms; ++a) {
        const int tr = lc_.world.transport_index(a);
        ramp(target_[tr], task_.home_x, cfg_.approach_speed);
        all = all && std::abs(w.leader[tr].angle - task_.home_x) < 0.05;
      }
      if (all) advance(ExpertPhase::done);
      break;

    case ExpertPhase::done:
      break;
  }
  phase_t_ += sim::kDt;

  hand_out.assign(target_.size(), 0.0);
  for (std::size_t j = 0; j < target_.size(); ++j) {
    const double tau =
        cfg_.hand_kp * (target_[j] - w.leader[j].angle) - cfg_.hand_kd * w.leader[j].velocity;
    hand_out[j] = std::clamp(tau, -cfg_.hand_max_torque, cfg_.hand_max_torque);
  }
}

}  // namespace bcil::harness
