// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include <cstring>
#include <filesystem>
#include <map>

#include "bcil/dabi/dabi.hpp"
#include "bcil/errors.hpp"
#include "bcil/rng.hpp"
#include "doctest.h"

using namespace bcil;
using namespace bcil::dabi;
using bcil::data::Episode;
using bcil::data::EpisodeHeader;
using bcil::data::Frame;
using bcil::data::JointSample;

namespace {

Episode make_episode(int duration_ms, int cams = 1, Rng* rng = nullptr,
                     const std::vector<std::uint64_t>* frame_times = nullptr) {
  EpisodeHeader h;
  h.n_joints = 1;
  h.img_w = h.img_h = 4;
  h.n_cameras = static_cast<std::uint8_t>(cams);
  Episode ep(h);
  Rng fallback(3);
  Rng& r = rng != nullptr ? *rng : fallback;
  for (int t = 0; t < duration_ms; ++t) {
    JointSample s;
    s.t_us = static_cast<std::uint64_t>(t) * 1000;
    s.v.resize(6);
    for (auto& v : s.v) v = r.uniform(-1.0, 1.0);
    ep.append_sample(std::move(s));
  }
  if (frame_times != nullptr) {
    for (std::uint64_t t : *frame_times) {
      for (int c = 0; c < cams; ++c) {
        Frame f;
        f.t_us = t;
        f.cam_id = static_cast<std::uint8_t>(c);
        f.pixels.assign(48, 0);
        ep.append_frame(std::move(f));
      }
    }
  } else {
    for (int t = 0; t < duration_ms; t += 10) {
      for (int c = 0; c < cams; ++c) {
        Frame f;
        f.t_us = static_cast<std::uint64_t>(t) * 1000;
        f.cam_id = static_cast<std::uint8_t>(c);
        f.pixels.assign(48, 0);
        ep.append_frame(std::move(f));
      }
    }
  }
  ep.finalize();
  return ep;
}

}  // namespace

TEST_SUITE_BEGIN("dabi");

TEST_CASE("5 episodes at factor 10 yield exactly 50 sequences") {
  int total = 0;
  for (int e = 0; e < 5; ++e) {
    const Episode ep = make_episode(100);
    total += static_cast<int>(downsample_offsets(ep, 10).size());
  }
  CHECK(total == 50);
}

TEST_CASE("factor 1 is the identity") {
  Rng rng(8);
  const Episode ep = make_episode(37, 1, &rng);
  const auto seqs = downsample_offsets(ep, 1);
  REQUIRE(seqs.size() == 1);
  REQUIRE(seqs[0].samples.size() == 37);
  for (std::size_t i = 0; i < seqs[0].samples.size(); ++i) {
    CHECK(std::memcmp(seqs[0].samples[i].data(), ep.samples()[i].v.data(), 6 * sizeof(double)) ==
          0);
  }
}

TEST_CASE("offset 7 of a 3000-sample episode: 300 rows with t = 7000 (mod 10000)") {
  const Episode ep = make_episode(3000);
  const auto seqs = downsample_offsets(ep, 10);
  REQUIRE(seqs.size() == 10);
  const auto& s7 = seqs[7];
  CHECK(s7.samples.size() == 300);
  for (std::uint64_t t : s7.t_us) CHECK(t % 10000 == 7000);
}

TEST_CASE("offset sequences partition the source exactly (property)") {
  Rng rng(15);
  const Episode ep = make_episode(517, 1, &rng);  // deliberately not a multiple of 10
  const auto seqs = downsample_offsets(ep, 10);
  std::size_t total = 0;
  std::map<std::uint64_t, int> seen;
  for (const auto& seq : seqs) {
    total += seq.samples.size();
    for (std::size_t i = 0; i < seq.samples.size(); ++i) {
      seen[seq.t_us[i]] += 1;
      const auto& src = ep.samples()[seq.t_us[i] / 1000];
      CHECK(std::memcmp(seq.samples[i].data(), src.v.data(), 6 * sizeof(double)) == 0);
    }
  }
  CHECK(total == ep.samples().size());
  CHECK(seen.size() == ep.samples().size());  // every sample exactly once
  for (const auto& [t, count] : seen) {
    (void)t;
    CHECK(count == 1);
  }
}

TEST_CASE("factor must divide the robot rate") {
  const Episode ep = make_episode(30);
  CHECK_THROWS_AS(downsample_offsets(ep, 7), ConfigError);
  CHECK_THROWS_AS(downsample_offsets(ep, 0), ConfigError);
  CHECK_THROWS_AS(downsample_offsets(ep, -3), ConfigError);
}

TEST_CASE("pairing picks the exact hit") {
  const std::vector<std::uint64_t> frames{0, 10000};
  Episode ep = make_episode(11, 1, nullptr, &frames);
  auto seqs = downsample_offsets(ep, 10);
  pair_images(seqs[0], ep);
  REQUIRE(seqs[0].t_us.size() == 2);
  CHECK(seqs[0].frames[1][0] == 1);  // row at t=10000 pairs with the frame there
}

TEST_CASE("pairing ties break toward the earlier frame") {
  const std::vector<std::uint64_t> frames{10000, 20000};
  Episode ep = make_episode(16, 1, nullptr, &frames);
  auto seqs = downsample_offsets(ep, 10);
  pair_images(seqs[5], ep);  // row at t = 15000, equidistant from both frames
  REQUIRE(seqs[5].t_us.size() == 2);
  CHECK(seqs[5].t_us[1] == 15000);
  CHECK(seqs[5].frames[1][0] == 0);
}

TEST_CASE("pairing with jittered cadence stays within 7 ms (brute-force oracle)") {
  Rng rng(23);
  std::vector<std::uint64_t> times;
  std::uint64_t last = 0;
  // Frames cover the full 600 ms span so no sample outruns its neighbors.
  for (int i = 0; i <= 60; ++i) {
    std::int64_t t = 10000ll * i + rng.uniform_int(-2000, 2000);
    if (i > 0) t = std::max<std::int64_t>(t, static_cast<std::int64_t>(last) + 1000);
    t = std::clamp<std::int64_t>(t, 0, 599000);
    times.push_back(static_cast<std::uint64_t>(t));
    last = times.back();
  }
  Episode ep = make_episode(600, 1, nullptr, &times);
  auto seqs = downsample_offsets(ep, 10);
  for (auto& seq : seqs) {
    pair_images(seq, ep);
    for (std::size_t row = 0; row < seq.t_us.size(); ++row) {
      const std::uint64_t t = seq.t_us[row];
      int best = -1;
      std::uint64_t best_d = ~0ull;
      for (std::size_t f = 0; f < ep.frames().size(); ++f) {
        const std::uint64_t ft = ep.frames()[f].t_us;
        const std::uint64_t d = ft > t ? ft - t : t - ft;
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(f);
        }
      }
      CHECK(seq.frames[row][0] == best);
      CHECK(best_d <= 7000);
    }
  }
}

TEST_CASE("pairing is idempotent") {
  const Episode ep = make_episode(50);
  auto seqs = downsample_offsets(ep, 10);
  pair_images(seqs[3], ep);
  const auto first = seqs[3].frames;
  pair_images(seqs[3], ep);
  CHECK(seqs[3].frames == first);
}

TEST_CASE("episode without frames cannot be paired") {
  EpisodeHeader h;
  h.n_joints = 1;
  Episode ep(h);
  JointSample s;
  s.t_us = 0;
  s.v.assign(6, 0.0);
  ep.append_sample(std::move(s));
  ep.finalize();
  auto seqs = downsample_offsets(ep, 10);
  CHECK_THROWS_AS(pair_images(seqs[0], ep), StateError);
}

TEST_CASE("manifest round-trip") {
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < 4; ++i) {
    entries.push_back({i, "raw/ep_" + std::to_string(i / 2) + ".biep", i % 2, 10, 100});
  }
  const auto dir = std::filesystem::temp_directory_path() / "bcil_dabi_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / kManifestName).string();
  write_manifest(entries, path);
  const auto back = read_manifest(path);
  REQUIRE(back.size() == entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CHECK(back[i].sequence_id == entries[i].sequence_id);
    CHECK(back[i].episode_file == entries[i].episode_file);
    CHECK(back[i].offset == entries[i].offset);
    CHECK(back[i].factor == entries[i].factor);
    CHECK(back[i].n_rows == entries[i].n_rows);
  }
  std::filesystem::remove_all(dir);
}

TEST_SUITE_END();
