// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bcil/data/episode.hpp"

namespace bcil::dabi {

inline constexpr int kMaxCameras = 4;

// One offset-phased 100 Hz view of an episode. Sample values are bit-exact
// copies of the source; camera frames are referenced by index, never copied,
// so a 10x augmentation does not cost 10x the disk.
struct TrainingSequence {
  int episode_index = 0;
  int offset = 0;
  int factor = 1;
  std::vector<std::uint64_t> t_us;
  std::vector<std::vector<double>> samples;                   // 6*n_joints each
  std::vector<std::array<std::int32_t, kMaxCameras>> frames;  // -1 until paired
};

// Phase-shifted downsampling: sequence j takes source samples j, j+factor,
// j+2*factor, ... The union of all offsets is exactly the source sample
// multiset.
std::vector<TrainingSequence> downsample_offsets(const data::Episode& ep, int factor);

// Pairs every row with the nearest-in-time frame per camera; ties break
// toward the earlier frame so no pairing looks ahead further than it must.
void pair_images(TrainingSequence& seq, const data::Episode& ep);

// Dataset manifest listing (source episode, offset) per sequence.
struct ManifestEntry {
  int sequence_id = 0;
  std::string episode_file;  // path relative to the manifest
  int offset = 0;
  int factor = 1;
  std::uint64_t n_rows = 0;
};

inline constexpr const char* kManifestName = "manifest.tsv";

void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path);
std::vector<ManifestEntry> read_manifest(const std::string& path);

}  // namespace bcil::dabi
