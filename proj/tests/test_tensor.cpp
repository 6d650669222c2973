// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include <cmath>

#include "bcil/nn/nn.hpp"
#include "bcil/policy/gradcheck.hpp"
#include "doctest.h"

using namespace bcil;
using namespace bcil::nn;

namespace {

template <typename T>
Tensor<T> tensor2(int m, int n, std::initializer_list<T> v) {
  Tensor<T> t = Tensor<T>::zeros({m, n});
  std::copy(v.begin(), v.end(), t.v.begin());
  return t;
}

}  // namespace

TEST_SUITE_BEGIN("tensor");

TEST_CASE("matmul matches hand arithmetic") {
  Tape<double> t;
  const auto a = t.leaf(tensor2<double>(2, 3, {1, 2, 3, 4, 5, 6}));
  const auto b = t.leaf(tensor2<double>(3, 2, {7, 8, 9, 10, 11, 12}));
  const auto c = t.matmul(a, b);
  CHECK(t.val(c).v == std::vector<double>{58, 64, 139, 154});
}

TEST_CASE("softmax of a constant vector is uniform") {
  Tape<double> t;
  const auto x = t.leaf(tensor2<double>(1, 5, {3, 3, 3, 3, 3}));
  const auto y = t.softmax_rows(x);
  for (double v : t.val(y).v) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("kl_gaussian at the standard normal is zero") {
  Tape<double> t;
  const auto mu = t.leaf(Tensor<double>::zeros({1, 4}));
  const auto lv = t.leaf(Tensor<double>::zeros({1, 4}));
  CHECK(t.val(t.kl_gaussian(mu, lv)).v[0] == 0.0);
}

TEST_CASE("l1 of a constant offset is the offset") {
  Tape<double> t;
  auto pred = Tensor<double>::zeros({3, 4});
  for (auto& v : pred.v) v = 1.7;
  const auto p = t.leaf(std::move(pred));
  const auto q = t.leaf(Tensor<double>::zeros({3, 4}));
  CHECK(t.val(t.l1_loss(p, q)).v[0] == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("grad of x^2 at x=3 is 6") {
  Tape<double> t;
  const auto x = t.leaf(Tensor<double>({1}, {3.0}), /*requires_grad=*/true);
  const auto loss = t.mul(x, x);
  t.backward(loss);
  CHECK(t.grad(x).v[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("backward twice without zero_grad doubles gradients exactly") {
  Tape<double> t;
  const auto x = t.leaf(Tensor<double>({1}, {3.0}), true);
  const auto loss = t.mul(x, x);
  t.backward(loss);
  const double once = t.grad(x).v[0];
  t.backward(loss);
  CHECK(t.grad(x).v[0] == 2.0 * once);
}

TEST_CASE("backward rejects non-scalar losses") {
  Tape<double> t;
  const auto x = t.leaf(Tensor<double>::zeros({2, 2}), true);
  CHECK_THROWS_AS(t.backward(x), StateError);
}

TEST_CASE("shape mismatches name both shapes") {
  Tape<double> t;
  const auto a = t.leaf(Tensor<double>::zeros({2, 3}));
  const auto b = t.leaf(Tensor<double>::zeros({3, 3}));
  try {
    (void)t.add(a, b);
    FAIL("expected dimension error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(2,3)") != std::string::npos);
    CHECK(msg.find("(3,3)") != std::string::npos);
  }
}

TEST_CASE("adam step with zero gradients leaves parameters unchanged") {
  ParamStore<double> store;
  Rng rng(3);
  store.add("w", init_uniform<double>({4, 4}, 4, rng));
  const auto before = store.entries[0].value.v;
  store.zero_grad();
  store.adam_step(1e-2);
  CHECK(store.entries[0].value.v == before);
}

TEST_CASE("attention with a single query equal to the single key returns the value row") {
  Tape<double> t;
  const auto q = t.leaf(tensor2<double>(1, 4, {0.3, -0.2, 0.5, 0.1}));
  const auto v = t.leaf(tensor2<double>(1, 4, {7, 8, 9, 10}));
  const auto out = t.attention(q, q, v, 2);
  for (int i = 0; i < 4; ++i) CHECK(t.val(out).v[i] == doctest::Approx(t.val(v).v[i]));
}

TEST_CASE("two-token attention matches scalar softmax arithmetic") {
  Tape<double> t;
  const auto q = t.leaf(tensor2<double>(1, 2, {1.0, 0.0}));
  const auto k = t.leaf(tensor2<double>(2, 2, {1.0, 0.0, 0.0, 1.0}));
  const auto v = t.leaf(tensor2<double>(2, 2, {1.0, 2.0, 3.0, 4.0}));
  const auto out = t.attention(q, k, v, 1);
  // scores = [1, 0]/sqrt(2) -> softmax
  const double s0 = std::exp(1.0 / std::sqrt(2.0));
  const double w0 = s0 / (s0 + 1.0);
  const double w1 = 1.0 / (s0 + 1.0);
  CHECK(t.val(out).v[0] == doctest::Approx(w0 * 1.0 + w1 * 3.0).epsilon(1e-12));
  CHECK(t.val(out).v[1] == doctest::Approx(w0 * 2.0 + w1 * 4.0).epsilon(1e-12));
}

TEST_CASE("attention is equivariant to permuting key/value pairs together") {
  Rng rng(5);
  Tape<double> t;
  auto Q = Tensor<double>::zeros({3, 8});
  auto K = Tensor<double>::zeros({4, 8});
  auto V = Tensor<double>::zeros({4, 8});
  for (auto* m : {&Q, &K, &V}) {
    for (auto& x : m->v) x = rng.uniform(-1.0, 1.0);
  }
  // Permuted copies (rows 0<->2, 1<->3).
  auto Kp = K, Vp = V;
  const std::vector<int> perm{2, 3, 0, 1};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 8; ++c) {
      Kp.v[r * 8 + c] = K.v[perm[r] * 8 + c];
      Vp.v[r * 8 + c] = V.v[perm[r] * 8 + c];
    }
  }
  const auto out1 = t.attention(t.leaf(Q), t.leaf(K), t.leaf(V), 4);
  const auto out2 = t.attention(t.leaf(Q), t.leaf(Kp), t.leaf(Vp), 4);
  for (std::size_t i = 0; i < t.val(out1).v.size(); ++i) {
    CHECK(t.val(out1).v[i] == doctest::Approx(t.val(out2).v[i]).epsilon(1e-12));
  }
}

TEST_CASE("attention head divisibility is enforced") {
  Tape<double> t;
  const auto q = t.leaf(Tensor<double>::zeros({2, 6}));
  CHECK_THROWS_AS((void)t.attention(q, q, q, 4), ConfigError);
}

TEST_CASE("sinusoidal embeddings") {
  SUBCASE("position (0,0) has zeros in sine channels, ones in cosine channels") {
    const auto e = sinusoidal_embed_2d<double>(3, 3, 8);
    CHECK(e.shape == std::vector<int>{9, 8});
    for (int i = 0; i < 8; i += 2) CHECK(e.v[i] == 0.0);
    for (int i = 1; i < 8; i += 2) CHECK(e.v[i] == 1.0);
  }
  SUBCASE("distinct grid cells get distinct vectors") {
    const int h = 4, w = 4, dim = 16;
    const auto e = sinusoidal_embed_2d<double>(h, w, dim);
    for (int a = 0; a < h * w; ++a) {
      for (int b = a + 1; b < h * w; ++b) {
        double d = 0.0;
        for (int i = 0; i < dim; ++i) {
          const double diff = e.v[a * dim + i] - e.v[b * dim + i];
          d += diff * diff;
        }
        CHECK(d > 1e-9);
      }
    }
  }
  SUBCASE("dim not divisible by 4 is rejected") {
    CHECK_THROWS_AS(sinusoidal_embed_2d<double>(2, 2, 6), ConfigError);
  }
}

TEST_CASE("layer norm output has zero mean and unit variance before gain/bias") {
  Tape<double> t;
  ParamStore<double> store;
  Tape<double> tp(&store);
  auto ln = LayerNorm<double>::create(store, "ln", 8);
  Rng rng(9);
  auto x = Tensor<double>::zeros({3, 8});
  for (auto& v : x.v) v = rng.uniform(-4.0, 4.0);
  const auto y = ln(tp, tp.leaf(std::move(x)));
  for (int r = 0; r < 3; ++r) {
    double mean = 0.0, var = 0.0;
    for (int c = 0; c < 8; ++c) mean += tp.val(y).v[r * 8 + c];
    mean /= 8.0;
    for (int c = 0; c < 8; ++c) {
      const double d = tp.val(y).v[r * 8 + c] - mean;
      var += d * d;
    }
    var /= 8.0;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("training determinism: same seed gives bitwise-identical parameters") {
  auto run = []() {
    policy::BiACTConfig cfg = policy::gradcheck_config();
    policy::NormStats stats;
    stats.state_mean.assign(cfg.state_dim, 0.0);
    stats.state_std.assign(cfg.state_dim, 1.0);
    stats.action_mean.assign(cfg.state_dim, 0.0);
    stats.action_std.assign(cfg.state_dim, 1.0);
    policy::BiACT<float> model(cfg, stats);
    // Three optimizer steps on a fixed synthetic example.
    std::vector<std::uint8_t> img(static_cast<std::size_t>(cfg.img_w) * cfg.img_h * 3, 127);
    policy::TrainExample ex;
    ex.frames.assign(cfg.cameras, img.data());
    ex.f.assign(cfg.state_dim, 0.25);
    ex.chunk.assign(static_cast<std::size_t>(cfg.chunk) * cfg.state_dim, -0.4);
    std::vector<float> eps(cfg.latent_dim, 0.1f);
    for (int step = 0; step < 3; ++step) {
      Tape<float> tape(&model.store());
      const auto loss = model.build_loss(tape, ex, eps, nullptr);
      model.store().zero_grad();
      tape.backward(loss);
      model.store().adam_step(1e-3f);
    }
    std::vector<float> all;
    for (const auto& e : model.store().entries) {
      all.insert(all.end(), e.value.v.begin(), e.value.v.end());
    }
    return all;
  };
  const auto a = run();
  const auto b = run();
  CHECK(a == b);
}

TEST_CASE("full-policy gradient check against central finite differences (f64)") {
  const auto res = policy::gradcheck_policy(1e-5);
  CAPTURE(res.worst_param);
  CHECK(res.checked > 5000);
  CHECK(res.max_rel_err < 1e-5);
}

TEST_SUITE_END();
