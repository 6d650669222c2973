// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/dabi/dabi.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bcil/errors.hpp"

namespace bcil::dabi {

std::vector<TrainingSequence> downsample_offsets(const data::Episode& ep, int factor) {
  if (factor <= 0) throw ConfigError("downsample factor must be positive");
  const auto& h = ep.header();
  if (h.robot_rate_hz % static_cast<std::uint32_t>(factor) != 0) {
    throw ConfigError("downsample factor " + std::to_string(factor) +
                      " does not divide the robot rate " + std::to_string(h.robot_rate_hz));
  }

  std::vector<TrainingSequence> out(static_cast<std::size_t>(factor));
  for (int j = 0; j < factor; ++j) {
    out[j].offset = j;
    out[j].factor = factor;
  }
  const auto& samples = ep.samples();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto& seq = out[i % static_cast<std::size_t>(factor)];
    seq.t_us.push_back(samples[i].t_us);
    seq.samples.push_back(samples[i].v);  // bit-exact copy, never interpolated
  }
  return out;
}

void pair_images(TrainingSequence& seq, const data::Episode& ep) {
  if (ep.frames().empty()) {
    throw StateError("pair_images: episode has no frames to pair");
  }
  const int n_cams = ep.header().n_cameras;
  seq.frames.assign(seq.t_us.size(), {-1, -1, -1, -1});

  for (int cam = 0; cam < n_cams && cam < kMaxCameras; ++cam) {
    const auto idx = ep.frames_of_camera(cam);
    if (idx.empty()) continue;
    // Frames of one camera are monotone; walk them alongside the rows.
    std::size_t fi = 0;
    for (std::size_t row = 0; row < seq.t_us.size(); ++row) {
      const std::uint64_t t = seq.t_us[row];
      while (fi + 1 < idx.size() && ep.frames()[idx[fi + 1]].t_us <= t) ++fi;
      std::size_t best = fi;
      if (fi + 1 < idx.size()) {
        const std::uint64_t t0 = ep.frames()[idx[fi]].t_us;
        const std::uint64_t t1 = ep.frames()[idx[fi + 1]].t_us;
        const std::uint64_t d0 = t >= t0 ? t - t0 : t0 - t;
        const std::uint64_t d1 = t1 >= t ? t1 - t : t - t1;
        if (d1 < d0) best = fi + 1;  // strict: ties go to the earlier frame
      }
      seq.frames[row][cam] = static_cast<std::int32_t>(idx[best]);
    }
  }
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# bcil-dabi-manifest v1\n";
  out << "sequence_id\tepisode_file\toffset\tfactor\tn_rows\n";
  for (const auto& e : entries) {
    out << e.sequence_id << "\t" << e.episode_file << "\t" << e.offset << "\t" << e.factor << "\t"
        << e.n_rows << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# bcil-dabi-manifest v1", 0) != 0) {
    throw FormatError("not a bcil dabi manifest: " + path, 0);
  }
  std::getline(in, line);  // column header
  std::vector<ManifestEntry> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    ManifestEntry e;
    std::string cell;
    if (!std::getline(ss, cell, '\t')) continue;
    e.sequence_id = std::atoi(cell.c_str());
    if (!std::getline(ss, e.episode_file, '\t')) {
      throw FormatError("manifest row missing episode file", out.size() + 2);
    }
    if (!std::getline(ss, cell, '\t')) throw FormatError("manifest row missing offset", 0);
    e.offset = std::atoi(cell.c_str());
    if (!std::getline(ss, cell, '\t')) throw FormatError("manifest row missing factor", 0);
    e.factor = std::atoi(cell.c_str());
    if (!std::getline(ss, cell, '\t')) throw FormatError("manifest row missing n_rows", 0);
    e.n_rows = std::strtoull(cell.c_str(), nullptr, 10);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace bcil::dabi
