// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/harness/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "bcil/data/episode_io.hpp"
#include "bcil/errors.hpp"
#include "bcil/kvconfig.hpp"

namespace fs = std::filesystem;

namespace bcil::harness {
namespace {

constexpr double kContactThreshold = 0.1;  // N*m on the grip joint

int grip_value_index(const data::Episode& ep) {
  // First grip joint is joint 1; follower tau is the 6th value of the sextuple.
  (void)ep;
  return 6 * 1 + 5;
}

}  // namespace

double steady_grip_torque(const data::Episode& ep) {
  const int idx = grip_value_index(ep);
  const auto& samples = ep.samples();
  // Longest contiguous run of contact.
  std::size_t best_start = 0, best_len = 0, run_start = 0, run_len = 0;
  for (std::size_t i = 0; i <= samples.size(); ++i) {
    const bool contact = i < samples.size() && std::abs(samples[i].v[idx]) > kContactThreshold;
    if (contact) {
      if (run_len == 0) run_start = i;
      ++run_len;
      if (run_len > best_len) {
        best_len = run_len;
        best_start = run_start;
      }
    } else {
      run_len = 0;
    }
  }
  if (best_len < 4) return 0.0;
  const std::size_t a = best_start + best_len / 4;
  const std::size_t b = best_start + (3 * best_len) / 4;
  double acc = 0.0;
  for (std::size_t i = a; i < b; ++i) acc += std::abs(samples[i].v[idx]);
  return acc / static_cast<double>(b - a);
}

bool AnalysisResult::torque_monotone_in_stiffness() const {
  for (std::size_t i = 1; i < groups.size(); ++i) {
    if (!(groups[i].mean_steady_torque > groups[i - 1].mean_steady_torque)) return false;
  }
  return !groups.empty();
}

AnalysisResult report_analysis(const std::vector<std::string>& episode_paths,
                               const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream series((fs::path(out_dir) / "torque_by_object.csv").string(), std::ios::trunc);
  series << "# bcil-analysis v1\n";
  series << "episode,stiffness,t_us,grip_torque\n";

  std::map<double, std::vector<double>> steady_by_k;
  char buf[64];
  for (std::size_t e = 0; e < episode_paths.size(); ++e) {
    const data::Episode ep = data::read_episode(episode_paths[e]);
    const KvConfig meta = KvConfig::parse_text(ep.header().meta);
    const double k = meta.get_double("object_stiffness", 0.0);
    const int idx = grip_value_index(ep);
    for (std::size_t i = 0; i < ep.samples().size(); i += 10) {  // 100 Hz series
      const auto& s = ep.samples()[i];
      std::snprintf(buf, sizeof(buf), "%.6g", s.v[idx]);
      series << e << "," << k << "," << s.t_us << "," << buf << "\n";
    }
    steady_by_k[k].push_back(steady_grip_torque(ep));
  }

  AnalysisResult res;
  std::ofstream summary((fs::path(out_dir) / "hardness_summary.csv").string(), std::ios::trunc);
  summary << "# bcil-analysis v1\n";
  summary << "stiffness,episodes,mean_steady_torque,var_steady_torque\n";
  for (const auto& [k, values] : steady_by_k) {
    HardnessGroup g;
    g.stiffness = k;
    g.episodes = static_cast<int>(values.size());
    for (double v : values) g.mean_steady_torque += v;
    g.mean_steady_torque /= values.size();
    for (double v : values) {
      const double d = v - g.mean_steady_torque;
      g.var_steady_torque += d * d;
    }
    g.var_steady_torque /= values.size();
    std::snprintf(buf, sizeof(buf), "%.6g,%d,%.6g,%.6g", g.stiffness, g.episodes,
                  g.mean_steady_torque, g.var_steady_torque);
    summary << buf << "\n";
    res.groups.push_back(g);
  }
  if (!series || !summary) throw IoError("analysis: CSV write failed in " + out_dir);
  return res;
}

}  // namespace bcil::harness
