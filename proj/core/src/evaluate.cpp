// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/harness/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "bcil/data/episode_io.hpp"
#include "bcil/errors.hpp"
#include "bcil/harness/analysis.hpp"
#include "bcil/rng.hpp"

namespace fs = std::filesystem;

namespace bcil::harness {

PhaseOutcome score_phases(const exec::ExecResult& run, const sim::WorldState& initial) {
  PhaseOutcome out;
  const double pick = initial.pick_center;
  const double place = initial.place_center;
  const double half = initial.region_halfwidth;

  // A drop counts against Move only in transit: releases inside the place
  // area are the point of the task, and a re-grasp inside the pick area is
  // part of picking, not of transport.
  bool dropped_in_transit = false;
  for (const auto& ev : run.object_events) {
    if (ev.object != 0) continue;
    if (ev.kind == exec::ObjectEvent::Kind::attach) out.pick = true;
    if (ev.kind == exec::ObjectEvent::Kind::detach &&
        std::abs(ev.center - place) > half && std::abs(ev.center - pick) > half) {
      dropped_in_transit = true;
    }
  }
  out.move = out.pick && !dropped_in_transit && !run.fault;
  const auto& obj = run.final_world.objects.front();
  out.place = out.move && !obj.grasped && std::abs(obj.center - place) <= half;
  return out;
}

bool EvalReport::phase_monotone() const {
  for (const auto& r : rows) {
    if (!(r.pick >= r.move && r.move >= r.place)) return false;
  }
  return true;
}

void EvalReport::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# bcil-eval-report v1\n";
  out << "task,ablated,seed,set,stiffness,episodes,pick,move,place,faults,"
         "mean_grip_torque,eq1_rms,eq2_rms\n";
  char buf[64];
  for (const auto& r : rows) {
    out << task << "," << (ablated ? 1 : 0) << "," << seed << "," << r.set << ",";
    std::snprintf(buf, sizeof(buf), "%.6g", r.stiffness);
    out << buf << "," << r.episodes << "," << r.pick << "," << r.move << "," << r.place << ","
        << r.faults;
    for (double v : {r.mean_grip_torque, r.eq1_rms, r.eq2_rms}) {
      std::snprintf(buf, sizeof(buf), ",%.6g", v);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

void EvalReport::print(std::ostream& os) const {
  os << "task " << task << (ablated ? " (w/o force)" : " (w/ force)") << ", seed " << seed << "\n";
  os << "  set        K      pick  move  place  grip[Nm]\n";
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "  %-9s %6.0f  %2d/%-2d %2d/%-2d %2d/%-2d  %7.3f\n",
                  r.set.c_str(), r.stiffness, r.pick, r.episodes, r.move, r.episodes, r.place,
                  r.episodes, r.mean_grip_torque);
    os << line;
  }
}

exec::ExecResult eval_episode(const policy::BiACTf& model, const TaskSpec& task,
                              std::uint64_t seed, double stiffness, const EvalOptions& opts) {
  const LoopConfig lc = task.loop_config();
  sim::WorldState world = task.make_world(seed, stiffness);
  const std::string meta = task.world_meta(world, seed);
  exec::PolicyChunkSource source(&model);
  // Autonomous rollouts run a little slower than the demonstrations they
  // imitate; success is judged on the outcome, not the clock.
  const double duration = opts.duration_s > 0.0 ? opts.duration_s : 1.5 * task.episode_s;
  return exec::run_autonomous(lc, std::move(world), source, opts.schedule, duration, opts.ablated,
                              meta);
}

EvalReport evaluate(const policy::BiACTf& model, const TaskSpec& task, std::uint64_t seed,
                    const EvalOptions& opts) {
  if (model.config().state_dim != 3 * task.loop_config().world.n_joints()) {
    throw ConfigError("evaluate: model state_dim does not match the task's joint count");
  }
  EvalReport report;
  report.task = task.name;
  report.ablated = opts.ablated;
  report.seed = seed;

  struct Cell {
    std::string set;
    double stiffness;
  };
  std::vector<Cell> cells;
  for (double k : task.trained_stiffness) cells.push_back({"trained", k});
  for (double k : task.untrained_stiffness) cells.push_back({"untrained", k});

  if (!opts.save_dir.empty()) fs::create_directories(opts.save_dir);

  for (std::size_t c = 0; c < cells.size(); ++c) {
    EvalRow row;
    row.set = cells[c].set;
    row.stiffness = cells[c].stiffness;
    row.episodes = opts.episodes;
    double grip_sum = 0.0, eq1_sum = 0.0, eq2_sum = 0.0;
    for (int i = 0; i < opts.episodes; ++i) {
      const std::uint64_t ep_seed = Rng::derive(seed, c * 1000 + static_cast<std::uint64_t>(i));
      sim::WorldState initial = task.make_world(ep_seed, cells[c].stiffness);
      auto run = eval_episode(model, task, ep_seed, cells[c].stiffness, opts);
      const PhaseOutcome outcome = score_phases(run, initial);
      row.pick += outcome.pick ? 1 : 0;
      row.move += outcome.move ? 1 : 0;
      row.place += outcome.place ? 1 : 0;
      row.faults += run.fault ? 1 : 0;
      grip_sum += steady_grip_torque(run.episode);
      eq1_sum += run.eq1_rms;
      eq2_sum += run.eq2_rms;
      if (!opts.save_dir.empty()) {
        char name[96];
        std::snprintf(name, sizeof(name), "eval_%s_%s_K%.0f_%02d.biep", task.name.c_str(),
                      opts.ablated ? "noforce" : "full", cells[c].stiffness, i);
        const std::string path = (fs::path(opts.save_dir) / name).string();
        data::write_episode(run.episode, path);
        data::write_debug_trace(run.debug, data::debug_sidecar_path(path));
      }
    }
    row.mean_grip_torque = grip_sum / opts.episodes;
    row.eq1_rms = eq1_sum / opts.episodes;
    row.eq2_rms = eq2_sum / opts.episodes;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace bcil::harness
