// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
//
// bcil: desk-scale bilateral-control imitation learning workbench.
//   collect   record scripted teleoperation demonstrations
//   augment   offset-phased 10x dataset augmentation
//   train     fit the action-chunking policy
//   eval      autonomous rollouts with a Table-style phase report
//   replay    re-simulate a recorded episode from its logged commands
//   gradcheck finite-difference check of the training gradients
//   selftest  controller/observer invariant probes
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "bcil/dabi/dabi.hpp"
#include "bcil/data/episode_io.hpp"
#include "bcil/errors.hpp"
#include "bcil/harness/analysis.hpp"
#include "bcil/harness/collect.hpp"
#include "bcil/harness/evaluate.hpp"
#include "bcil/harness/replay.hpp"
#include "bcil/harness/scenarios.hpp"
#include "bcil/policy/gradcheck.hpp"
#include "bcil/policy/train.hpp"

namespace fs = std::filesystem;
using namespace bcil;

namespace {

int cmd_collect(const std::string& task_name, int episodes, std::uint64_t seed,
                const std::string& out) {
  const auto task = harness::TaskSpec::by_name(task_name);
  const auto res = harness::collect(task, episodes, seed, out);
  std::cout << "wrote " << res.files.size() << " episodes to " << out << " (" << res.attempts
            << " attempts, " << res.rejected << " rejected by the quality gate)\n";
  for (const auto& f : res.files) std::cout << "  " << f << "\n";
  return 0;
}

int cmd_augment(const std::string& in_dir, int factor, const std::string& out_dir) {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(in_dir)) {
    if (e.path().extension() == ".biep") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .biep episodes in " + in_dir);

  fs::create_directories(out_dir);
  std::vector<dabi::ManifestEntry> entries;
  int seq_id = 0;
  for (const auto& f : files) {
    const auto ep = data::read_episode(f);
    auto seqs = dabi::downsample_offsets(ep, factor);
    for (auto& seq : seqs) {
      dabi::pair_images(seq, ep);  // fails fast if an episode has no frames
      dabi::ManifestEntry e;
      e.sequence_id = seq_id++;
      e.episode_file = fs::relative(fs::absolute(f), fs::absolute(out_dir)).string();
      e.offset = seq.offset;
      e.factor = factor;
      e.n_rows = seq.samples.size();
      entries.push_back(std::move(e));
    }
  }
  const std::string manifest = (fs::path(out_dir) / dabi::kManifestName).string();
  dabi::write_manifest(entries, manifest);
  std::cout << "augmented " << files.size() << " episodes x" << factor << " -> " << entries.size()
            << " sequences; manifest " << manifest << "\n";
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& config_path,
              const std::string& out_path) {
  KvConfig kv;
  if (!config_path.empty()) kv = KvConfig::parse_file(config_path);
  const auto ds = policy::load_dataset(data_dir);
  policy::BiACTConfig cfg = policy::BiACTConfig::from_kv(kv);
  if (!kv.has("state_dim")) cfg.state_dim = ds.state_dim();
  if (!kv.has("cameras")) cfg.cameras = ds.n_cameras;
  if (!kv.has("img_w")) cfg.img_w = ds.img_w;
  if (!kv.has("img_h")) cfg.img_h = ds.img_h;
  cfg.validate();
  std::cout << "dataset: " << ds.sequences.size() << " sequences ("
            << ds.train_seqs.size() << " train / " << ds.holdout_seqs.size() << " holdout), N="
            << ds.state_dim() << "\n";
  const auto res = policy::train_policy(ds, cfg, out_path, &std::cout);
  std::cout << "holdout L1 " << res.holdout_l1_initial << " -> " << res.holdout_l1_final << " ("
            << res.steps << " steps); model " << out_path << "\n";
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& task_name, int episodes,
             std::uint64_t seed, bool no_force, const std::string& out_dir) {
  const auto task = harness::TaskSpec::by_name(task_name);
  const auto model = policy::BiACTf::load(model_path);
  harness::EvalOptions opts;
  opts.episodes = episodes;
  opts.ablated = no_force;
  const auto report = harness::evaluate(model, task, seed, opts);
  report.print(std::cout);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const std::string csv = (fs::path(out_dir) / "eval_report.csv").string();
    report.write_csv(csv);
    std::cout << "report " << csv << "\n";
  }
  if (!report.phase_monotone()) throw ExecFault("phase monotonicity violated");
  return 0;
}

int cmd_replay(const std::string& episode_path) {
  const auto res = harness::replay_episode(episode_path);
  std::cout << "replayed " << res.ticks << " ticks; max angle deviation " << res.max_angle_dev
            << " rad, max velocity deviation " << res.max_velocity_dev << " rad/s\n";
  if (res.max_angle_dev > 1e-9) {
    std::cout << "MISMATCH: trajectory deviates beyond 1e-9\n";
    return static_cast<int>(ErrorClass::fault);
  }
  std::cout << "trajectory matches the log\n";
  return 0;
}

int cmd_gradcheck() {
  std::cout << "checking training gradients against central finite differences (f64, h=1e-5)\n";
  const auto res = policy::gradcheck_policy(1e-5);
  std::cout << "checked " << res.checked << " parameters, max relative error " << res.max_rel_err
            << " (worst: " << res.worst_param << ")\n";
  if (res.max_rel_err >= 1e-5) {
    std::cout << "FAIL: gradient check above 1e-5\n";
    return static_cast<int>(ErrorClass::fault);
  }
  std::cout << "PASS\n";
  return 0;
}

int cmd_selftest() {
  int failures = 0;
  auto report = [&failures](const char* name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    if (!ok) ++failures;
  };

  const auto tr = harness::run_tracking_scenario(3.0);
  report("tracking", tr.rms_after_1s < 0.01,
         "RMS(theta_l - theta_f) = " + std::to_string(tr.rms_after_1s) + " rad");

  const auto wp = harness::run_wall_press(200.0, 2.0);
  report("action-reaction", wp.residual_ratio < 0.05 && wp.signs_opposite,
         "|tau_l + tau_f| / |tau_f| = " + std::to_string(wp.residual_ratio));
  report("rfob-fidelity", wp.rfob_rel_err < 0.05,
         "estimate error vs plant truth = " + std::to_string(wp.rfob_rel_err));

  const auto sp = harness::run_schedule_probe(14.3, 5.0);
  report("schedule", sp.underruns == 0 && sp.latches == 500,
         std::to_string(sp.latches) + " latches, " + std::to_string(sp.underruns) + " underruns");

  const auto lateness = harness::run_schedule_probe(250.0, 2.0);
  report("underrun-fault", lateness.fault && lateness.underruns == 1,
         "forced 250 ms latency -> " + std::to_string(lateness.underruns) + " fault(s)");

  return failures == 0 ? 0 : static_cast<int>(ErrorClass::fault);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bcil: bilateral-control imitation learning workbench"};
  app.require_subcommand(1);

  std::string task = "pick";
  std::string in_dir, out_dir = "bcil_out", data_dir, config_path, model_path, episode_path;
  std::string model_out = "model.bin";
  int episodes = 5;
  int factor = 10;
  std::uint64_t seed = 7;
  bool no_force = false;

  auto* collect = app.add_subcommand("collect", "record scripted demonstrations");
  collect->add_option("--task", task, "pick|pick_place|lift_bar");
  collect->add_option("--episodes", episodes, "episodes to record");
  collect->add_option("--seed", seed, "seed");
  collect->add_option("--out", out_dir, "output directory")->required();

  auto* augment = app.add_subcommand("augment", "offset-phased dataset augmentation");
  augment->add_option("--in", in_dir, "directory of .biep episodes")->required();
  augment->add_option("--factor", factor, "downsampling factor");
  augment->add_option("--out", out_dir, "output directory for the manifest")->required();

  auto* train = app.add_subcommand("train", "train the policy");
  train->add_option("--data", data_dir, "augmented dataset directory")->required();
  train->add_option("--config", config_path, "key = value config file");
  train->add_option("--out", model_out, "model file to write");

  auto* eval = app.add_subcommand("eval", "evaluate a trained policy");
  eval->add_option("--model", model_path, "model file")->required();
  eval->add_option("--task", task, "pick|pick_place|lift_bar");
  eval->add_option("--episodes", episodes, "episodes per hardness cell");
  eval->add_option("--seed", seed, "seed");
  eval->add_flag("--no-force", no_force, "ablation: masked torques + position-only bridge");
  eval->add_option("--out", out_dir, "directory for the CSV report");

  auto* replay = app.add_subcommand("replay", "re-simulate an episode from its logs");
  replay->add_option("--episode", episode_path, "episode file (.biep)")->required();

  app.add_subcommand("gradcheck", "finite-difference gradient check");
  app.add_subcommand("selftest", "controller/observer invariant suite");

  try {
    app.parse(argc, argv);
    if (collect->parsed()) return cmd_collect(task, episodes, seed, out_dir);
    if (augment->parsed()) return cmd_augment(in_dir, factor, out_dir);
    if (train->parsed()) return cmd_train(data_dir, config_path, model_out);
    if (eval->parsed()) return cmd_eval(model_path, task, episodes, seed, no_force, out_dir);
    if (replay->parsed()) return cmd_replay(episode_path);
    if (app.get_subcommand("gradcheck")->parsed()) return cmd_gradcheck();
    if (app.get_subcommand("selftest")->parsed()) return cmd_selftest();
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      return app.exit(e);
    }
    std::cerr << "usage error: " << e.what() << "\n";
    return static_cast<int>(ErrorClass::usage);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
