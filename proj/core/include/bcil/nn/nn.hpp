// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <string>

#include "bcil/nn/adam.hpp"
#include "bcil/nn/tensor.hpp"

namespace bcil::nn {

// 1-D sinusoidal position embedding, (n, dim). Even channels sine, odd
// channels cosine over the standard frequency ladder.
template <typename T>
Tensor<T> sinusoidal_embed_1d(int n, int dim) {
  if (dim % 2 != 0) throw ConfigError("sinusoidal_embed_1d: dim must be even");
  Tensor<T> t = Tensor<T>::zeros({n, dim});
  for (int p = 0; p < n; ++p) {
    for (int i = 0; i < dim / 2; ++i) {
      const double freq = std::pow(10000.0, -2.0 * i / dim);
      t.v[p * dim + 2 * i] = static_cast<T>(std::sin(p * freq));
      t.v[p * dim + 2 * i + 1] = static_cast<T>(std::cos(p * freq));
    }
  }
  return t;
}

// 2-D variant for (h*w, dim) grids: the first dim/2 channels encode the row
// index, the second dim/2 the column index. dim must be divisible by 4.
template <typename T>
Tensor<T> sinusoidal_embed_2d(int h, int w, int dim) {
  if (dim % 4 != 0) throw ConfigError("sinusoidal_embed_2d: dim must be divisible by 4");
  const int half = dim / 2;
  const Tensor<T> rows = sinusoidal_embed_1d<T>(h, half);
  const Tensor<T> cols = sinusoidal_embed_1d<T>(w, half);
  Tensor<T> t = Tensor<T>::zeros({h * w, dim});
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int p = r * w + c;
      for (int i = 0; i < half; ++i) {
        t.v[p * dim + i] = rows.v[r * half + i];
        t.v[p * dim + half + i] = cols.v[c * half + i];
      }
    }
  }
  return t;
}

template <typename T>
struct Linear {
  int w = -1, b = -1;
  int in = 0, out = 0;

  static Linear create(ParamStore<T>& store, const std::string& name, int in, int out, Rng& rng,
                       double gain = 1.0) {
    Linear l;
    l.in = in;
    l.out = out;
    l.w = store.add(name + ".w", init_uniform<T>({in, out}, in, rng, gain));
    l.b = store.add(name + ".b", Tensor<T>::zeros({out}));
    return l;
  }

  // x: (m, in) -> (m, out)
  typename Tape<T>::Var operator()(Tape<T>& t, typename Tape<T>::Var x) const {
    return t.add(t.matmul(x, t.param(w)), t.param(b));
  }
};

template <typename T>
struct LayerNorm {
  int g = -1, b = -1;

  static LayerNorm create(ParamStore<T>& store, const std::string& name, int dim) {
    LayerNorm ln;
    Tensor<T> ones = Tensor<T>::zeros({dim});
    for (auto& x : ones.v) x = T(1);
    ln.g = store.add(name + ".g", std::move(ones));
    ln.b = store.add(name + ".b", Tensor<T>::zeros({dim}));
    return ln;
  }

  typename Tape<T>::Var operator()(Tape<T>& t, typename Tape<T>::Var x) const {
    return t.layer_norm(x, t.param(g), t.param(b));
  }
};

// Multi-head attention block: projections around the scaled-dot-product core.
template <typename T>
struct MultiHeadAttention {
  Linear<T> wq, wk, wv, wo;
  int heads = 1;

  static MultiHeadAttention create(ParamStore<T>& store, const std::string& name, int dim,
                                   int heads, Rng& rng) {
    if (heads < 1 || dim % heads != 0) {
      throw ConfigError("attention: model dim " + std::to_string(dim) + " not divisible by " +
                        std::to_string(heads) + " heads");
    }
    MultiHeadAttention m;
    m.heads = heads;
    m.wq = Linear<T>::create(store, name + ".q", dim, dim, rng);
    m.wk = Linear<T>::create(store, name + ".k", dim, dim, rng);
    m.wv = Linear<T>::create(store, name + ".v", dim, dim, rng);
    m.wo = Linear<T>::create(store, name + ".o", dim, dim, rng);
    return m;
  }

  typename Tape<T>::Var operator()(Tape<T>& t, typename Tape<T>::Var q_in,
                                   typename Tape<T>::Var kv_in) const {
    const auto q = wq(t, q_in);
    const auto k = wk(t, kv_in);
    const auto v = wv(t, kv_in);
    return wo(t, t.attention(q, k, v, heads));
  }
};

template <typename T>
struct FeedForward {
  Linear<T> up, down;

  static FeedForward create(ParamStore<T>& store, const std::string& name, int dim, int hidden,
                            Rng& rng) {
    FeedForward f;
    f.up = Linear<T>::create(store, name + ".up", dim, hidden, rng, std::sqrt(2.0));
    f.down = Linear<T>::create(store, name + ".down", hidden, dim, rng);
    return f;
  }

  typename Tape<T>::Var operator()(Tape<T>& t, typename Tape<T>::Var x) const {
    return down(t, t.relu(up(t, x)));
  }
};

// Pre-LN transformer encoder layer.
template <typename T>
struct EncoderLayer {
  LayerNorm<T> ln1, ln2;
  MultiHeadAttention<T> attn;
  FeedForward<T> ffn;

  static EncoderLayer create(ParamStore<T>& store, const std::string& name, int dim, int heads,
                             int hidden, Rng& rng) {
    EncoderLayer l;
    l.ln1 = LayerNorm<T>::create(store, name + ".ln1", dim);
    l.attn = MultiHeadAttention<T>::create(store, name + ".attn", dim, heads, rng);
    l.ln2 = LayerNorm<T>::create(store, name + ".ln2", dim);
    l.ffn = FeedForward<T>::create(store, name + ".ffn", dim, hidden, rng);
    return l;
  }

  typename Tape<T>::Var operator()(Tape<T>& t, typename Tape<T>::Var x) const {
    const auto a = ln1(t, x);
    const auto y = t.add(x, attn(t, a, a));
    return t.add(y, ffn(t, ln2(t, y)));
  }
};

// Pre-LN decoder layer: query self-attention, cross-attention to the memory,
// feed-forward.
template <typename T>
struct DecoderLayer {
  LayerNorm<T> ln1, ln2, ln3;
  MultiHeadAttention<T> self_attn, cross_attn;
  FeedForward<T> ffn;

  static DecoderLayer create(ParamStore<T>& store, const std::string& name, int dim, int heads,
                             int hidden, Rng& rng) {
    DecoderLayer l;
    l.ln1 = LayerNorm<T>::create(store, name + ".ln1", dim);
    l.self_attn = MultiHeadAttention<T>::create(store, name + ".self", dim, heads, rng);
    l.ln2 = LayerNorm<T>::create(store, name + ".ln2", dim);
    l.cross_attn = MultiHeadAttention<T>::create(store, name + ".cross", dim, heads, rng);
    l.ln3 = LayerNorm<T>::create(store, name + ".ln3", dim);
    l.ffn = FeedForward<T>::create(store, name + ".ffn", dim, hidden, rng);
    return l;
  }

  typename Tape<T>::Var operator()(Tape<T>& t, typename Tape<T>::Var x,
                                   typename Tape<T>::Var memory) const {
    const auto a = ln1(t, x);
    auto y = t.add(x, self_attn(t, a, a));
    y = t.add(y, cross_attn(t, ln2(t, y), memory));
    return t.add(y, ffn(t, ln3(t, y)));
  }
};

}  // namespace bcil::nn
