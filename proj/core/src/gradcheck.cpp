// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/policy/gradcheck.hpp"

namespace bcil::policy {

GradCheckResult gradcheck_policy(double h) {
  const BiACTConfig cfg = gradcheck_config();

  // Backing storage for the synthetic frames must outlive the batch.
  std::vector<std::vector<std::uint8_t>> images;
  auto make_batch = [&images](const BiACTConfig& c) {
    Rng rng(Rng::derive(c.seed, 3));
    std::vector<TrainExample> batch;
    images.reserve(2u * static_cast<std::size_t>(c.cameras));  // keep data() stable
    for (int b = 0; b < 2; ++b) {
      TrainExample ex;
      for (int cam = 0; cam < c.cameras; ++cam) {
        std::vector<std::uint8_t> px(static_cast<std::size_t>(c.img_w) * c.img_h * 3);
        for (auto& p : px) p = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
        images.push_back(std::move(px));
        ex.frames.push_back(images.back().data());
      }
      ex.f.resize(static_cast<std::size_t>(c.state_dim));
      for (auto& v : ex.f) v = rng.uniform(-1.0, 1.0);
      ex.chunk.resize(static_cast<std::size_t>(c.chunk) * c.state_dim);
      for (auto& v : ex.chunk) v = rng.uniform(-1.0, 1.0);
      batch.push_back(std::move(ex));
    }
    return batch;
  };

  return gradcheck_policy_impl(cfg, make_batch, h);
}

}  // namespace bcil::policy
