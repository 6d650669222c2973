// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "bcil/errors.hpp"

namespace bcil::nn {

template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> v;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<T> values) : shape(std::move(s)), v(std::move(values)) {}

  static Tensor zeros(std::vector<int> s) {
    Tensor t;
    t.shape = std::move(s);
    t.v.assign(numel_of(t.shape), T(0));
    return t;
  }
  static std::size_t numel_of(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
  }
  std::size_t numel() const { return v.size(); }
  int rows() const { return shape.empty() ? 1 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.v.reserve(v.size());
    for (T x : v) out.v.push_back(static_cast<U>(x));
    return out;
  }
};

inline std::string shape_str(const std::vector<int>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

template <typename T>
struct ParamStore;

// Reverse-mode autodiff tape. Nodes are appended in evaluation order, so the
// tape order is already topological; backward() walks it in reverse. Each
// backward() call propagates into a scratch buffer and then adds the result
// onto the persistent gradients of parameters and grad-requiring leaves, so
// running it twice without zero_grad doubles gradients exactly.
template <typename T>
class Tape {
 public:
  using Var = int;

  explicit Tape(ParamStore<T>* store = nullptr) : store_(store) {}

  const Tensor<T>& val(Var id) const { return nodes_[id].val; }
  const Tensor<T>& grad(Var id) const { return nodes_[id].sticky_grad; }
  std::size_t size() const { return nodes_.size(); }

  Var leaf(Tensor<T> t, bool requires_grad = false) {
    Node n;
    n.val = std::move(t);
    n.needs = requires_grad;
    n.sticky = requires_grad;
    if (requires_grad) n.sticky_grad = Tensor<T>::zeros(n.val.shape);
    nodes_.push_back(std::move(n));
    return static_cast<Var>(nodes_.size()) - 1;
  }

  Var param(int store_index);

  Var add(Var a, Var b) {
    const auto& A = nodes_[a].val;
    const auto& B = nodes_[b].val;
    const bool row_broadcast = A.shape.size() == 2 && B.numel() == static_cast<std::size_t>(A.cols());
    if (!row_broadcast && A.shape != B.shape) {
      throw ConfigError("add: dimension error " + shape_str(A.shape) + " vs " + shape_str(B.shape));
    }
    Tensor<T> out = A;
    if (row_broadcast) {
      const int m = A.rows(), n = A.cols();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.v[i * n + j] += B.v[j];
    } else {
      for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += B.v[i];
    }
    return make(std::move(out), {a, b}, [a, b, row_broadcast](Tape& t, const Tensor<T>& g, int) {
      if (t.wants(a)) t.acc(a, g.v);
      if (t.wants(b)) {
        if (row_broadcast) {
          auto& gb = t.scratch_[b].v;
          const int n = static_cast<int>(gb.size());
          const int m = static_cast<int>(g.v.size()) / n;
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) gb[j] += g.v[i * n + j];
        } else {
          t.acc(b, g.v);
        }
      }
    });
  }

  Var sub(Var a, Var b) {
    check_same(a, b, "sub");
    Tensor<T> out = nodes_[a].val;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] -= nodes_[b].val.v[i];
    return make(std::move(out), {a, b}, [a, b](Tape& t, const Tensor<T>& g, int) {
      if (t.wants(a)) t.acc(a, g.v);
      if (t.wants(b)) {
        auto& gb = t.scratch_[b].v;
        for (std::size_t i = 0; i < g.v.size(); ++i) gb[i] -= g.v[i];
      }
    });
  }

  Var mul(Var a, Var b) {
    check_same(a, b, "mul");
    Tensor<T> out = nodes_[a].val;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] *= nodes_[b].val.v[i];
    return make(std::move(out), {a, b}, [a, b](Tape& t, const Tensor<T>& g, int) {
      if (t.wants(a)) {
        auto& ga = t.scratch_[a].v;
        const auto& bv = t.nodes_[b].val.v;
        for (std::size_t i = 0; i < g.v.size(); ++i) ga[i] += g.v[i] * bv[i];
      }
      if (t.wants(b)) {
        auto& gb = t.scratch_[b].v;
        const auto& av = t.nodes_[a].val.v;
        for (std::size_t i = 0; i < g.v.size(); ++i) gb[i] += g.v[i] * av[i];
      }
    });
  }

  Var scale(Var a, T c) {
    Tensor<T> out = nodes_[a].val;
    for (auto& x : out.v) x *= c;
    return make(std::move(out), {a}, [a, c](Tape& t, const Tensor<T>& g, int) {
      if (!t.wants(a)) return;
      auto& ga = t.scratch_[a].v;
      for (std::size_t i = 0; i < g.v.size(); ++i) ga[i] += c * g.v[i];
    });
  }

  Var matmul(Var a, Var b) {
    const auto& A = nodes_[a].val;
    const auto& B = nodes_[b].val;
    if (A.shape.size() != 2 || B.shape.size() != 2 || A.cols() != B.rows()) {
      throw ConfigError("matmul: dimension error " + shape_str(A.shape) + " vs " +
                        shape_str(B.shape));
    }
    const int m = A.rows(), k = A.cols(), n = B.cols();
    Tensor<T> out = Tensor<T>::zeros({m, n});
    for (int i = 0; i < m; ++i) {
      for (int p = 0; p < k; ++p) {
        const T av = A.v[i * k + p];
        if (av == T(0)) continue;
        const T* brow = &B.v[p * n];
        T* orow = &out.v[i * n];
        for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
      }
    }
    return make(std::move(out), {a, b}, [a, b, m, k, n](Tape& t, const Tensor<T>& g, int) {
      const auto& A2 = t.nodes_[a].val;
      const auto& B2 = t.nodes_[b].val;
      if (t.wants(a)) {  // gA = g . B^T
        auto& ga = t.scratch_[a].v;
        for (int i = 0; i < m; ++i)
          for (int p = 0; p < k; ++p) {
            T s = 0;
            const T* grow = &g.v[i * n];
            const T* brow = &B2.v[p * n];
            for (int j = 0; j < n; ++j) s += grow[j] * brow[j];
            ga[i * k + p] += s;
          }
      }
      if (t.wants(b)) {  // gB = A^T . g
        auto& gb = t.scratch_[b].v;
        for (int p = 0; p < k; ++p)
          for (int i = 0; i < m; ++i) {
            const T av = A2.v[i * k + p];
            if (av == T(0)) continue;
            const T* grow = &g.v[i * n];
            T* brow = &gb[p * n];
            for (int j = 0; j < n; ++j) brow[j] += av * grow[j];
          }
      }
    });
  }

  Var transpose(Var a) {
    const auto& A = nodes_[a].val;
    if (A.shape.size() != 2) throw ConfigError("transpose: need rank 2, got " + shape_str(A.shape));
    const int m = A.rows(), n = A.cols();
    Tensor<T> out = Tensor<T>::zeros({n, m});
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) out.v[j * m + i] = A.v[i * n + j];
    return make(std::move(out), {a}, [a, m, n](Tape& t, const Tensor<T>& g, int) {
      if (!t.wants(a)) return;
      auto& ga = t.scratch_[a].v;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) ga[i * n + j] += g.v[j * m + i];
    });
  }

  Var relu(Var a) {
    Tensor<T> out = nodes_[a].val;
    for (auto& x : out.v) x = x > T(0) ? x : T(0);
    return make(std::move(out), {a}, [a](Tape& t, const Tensor<T>& g, int self) {
      if (!t.wants(a)) return;
      auto& ga = t.scratch_[a].v;
      const auto& y = t.nodes_[self].val.v;
      for (std::size_t i = 0; i < g.v.size(); ++i) {
        if (y[i] > T(0)) ga[i] += g.v[i];
      }
    });
  }

  Var exp(Var a) {
    Tensor<T> out = nodes_[a].val;
    for (auto& x : out.v) x = std::exp(x);
    return make(std::move(out), {a}, [a](Tape& t, const Tensor<T>& g, int self) {
      if (!t.wants(a)) return;
      auto& ga = t.scratch_[a].v;
      const auto& y = t.nodes_[self].val.v;
      for (std::size_t i = 0; i < g.v.size(); ++i) ga[i] += g.v[i] * y[i];
    });
  }

  // Row-wise softmax over the last axis of a rank-2 tensor.
  Var softmax_rows(Var a) {
    const auto& A = nodes_[a].val;
    if (A.shape.size() != 2) throw ConfigError("softmax: need rank 2, got " + shape_str(A.shape));
    const int m = A.rows(), n = A.cols();
    Tensor<T> out = A;
    for (int i = 0; i < m; ++i) {
      T* row = &out.v[i * n];
      T mx = row[0];
      for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
      T sum = 0;
      for (int j = 0; j < n; ++j) {
        row[j] = std::exp(row[j] - mx);
        sum += row[j];
      }
      for (int j = 0; j < n; ++j) row[j] /= sum;
    }
    return make(std::move(out), {a}, [a, m, n](Tape& t, const Tensor<T>& g, int self) {
      if (!t.wants(a)) return;
      auto& ga = t.scratch_[a].v;
      const auto& y = t.nodes_[self].val.v;
      for (int i = 0; i < m; ++i) {
        const T* yr = &y[i * n];
        const T* gr = &g.v[i * n];
        T dot = 0;
        for (int j = 0; j < n; ++j) dot += yr[j] * gr[j];
        T* gar = &ga[i * n];
        for (int j = 0; j < n; ++j) gar[j] += (gr[j] - dot) * yr[j];
      }
    });
  }

  // Row-wise layer normalization with learnable gain/bias.
  Var layer_norm(Var x, Var gamma, Var beta, T eps = T(1e-5)) {
    const auto& X = nodes_[x].val;
    if (X.shape.size() != 2) throw ConfigError("layer_norm: need rank 2, got " + shape_str(X.shape));
    const int m = X.rows(), n = X.cols();
    if (nodes_[gamma].val.numel() != static_cast<std::size_t>(n) ||
        nodes_[beta].val.numel() != static_cast<std::size_t>(n)) {
      throw ConfigError("layer_norm: gain/bias dimension error");
    }
    Tensor<T> out = Tensor<T>::zeros({m, n});
    std::vector<T> rstd(m), xhat(static_cast<std::size_t>(m) * n);
    const auto& G = nodes_[gamma].val.v;
    const auto& Bv = nodes_[beta].val.v;
    for (int i = 0; i < m; ++i) {
      const T* row = &X.v[i * n];
      T mean = 0;
      for (int j = 0; j < n; ++j) mean += row[j];
      mean /= T(n);
      T var = 0;
      for (int j = 0; j < n; ++j) var += (row[j] - mean) * (row[j] - mean);
      var /= T(n);
      const T r = T(1) / std::sqrt(var + eps);
      rstd[i] = r;
      for (int j = 0; j < n; ++j) {
        const T xh = (row[j] - mean) * r;
        xhat[i * n + j] = xh;
        out.v[i * n + j] = xh * G[j] + Bv[j];
      }
    }
    return make(std::move(out), {x, gamma, beta},
                [x, gamma, beta, m, n, rstd = std::move(rstd), xhat = std::move(xhat)](
                    Tape& t, const Tensor<T>& g, int) {
                  const auto& G = t.nodes_[gamma].val.v;
                  for (int i = 0; i < m; ++i) {
                    const T* gr = &g.v[i * n];
                    const T* xh = &xhat[i * n];
                    if (t.wants(gamma)) {
                      auto& gg = t.scratch_[gamma].v;
                      for (int j = 0; j < n; ++j) gg[j] += gr[j] * xh[j];
                    }
                    if (t.wants(beta)) {
                      auto& gb = t.scratch_[beta].v;
                      for (int j = 0; j < n; ++j) gb[j] += gr[j];
                    }
                    if (t.wants(x)) {
                      T mean_gy = 0, mean_gyxh = 0;
                      for (int j = 0; j < n; ++j) {
                        const T gy = gr[j] * G[j];
                        mean_gy += gy;
                        mean_gyxh += gy * xh[j];
                      }
                      mean_gy /= T(n);
                      mean_gyxh /= T(n);
                      auto& gx = t.scratch_[x].v;
                      for (int j = 0; j < n; ++j) {
                        const T gy = gr[j] * G[j];
                        gx[i * n + j] += (gy - mean_gy - xh[j] * mean_gyxh) * rstd[i];
                      }
                    }
                  }
                });
  }

  // Direct 2-D convolution on a (C,H,W) input with an (O,C,kh,kw) kernel.
  Var conv2d(Var x, Var w, Var b, int stride, int pad) {
    const auto& X = nodes_[x].val;
    const auto& W = nodes_[w].val;
    if (X.shape.size() != 3 || W.shape.size() != 4 || X.shape[0] != W.shape[1]) {
      throw ConfigError("conv2d: dimension error " + shape_str(X.shape) + " vs " +
                        shape_str(W.shape));
    }
    const int C = X.shape[0], H = X.shape[1], Wd = X.shape[2];
    const int O = W.shape[0], kh = W.shape[2], kw = W.shape[3];
    const int Ho = (H + 2 * pad - kh) / stride + 1;
    const int Wo = (Wd + 2 * pad - kw) / stride + 1;
    if (Ho <= 0 || Wo <= 0) throw ConfigError("conv2d: kernel larger than padded input");
    if (nodes_[b].val.numel() != static_cast<std::size_t>(O)) {
      throw ConfigError("conv2d: bias dimension error");
    }
    Tensor<T> out = Tensor<T>::zeros({O, Ho, Wo});
    const auto& Bv = nodes_[b].val.v;
    for (int o = 0; o < O; ++o) {
      for (int oy = 0; oy < Ho; ++oy) {
        for (int ox = 0; ox < Wo; ++ox) {
          T s = Bv[o];
          for (int c = 0; c < C; ++c) {
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = oy * stride + ky - pad;
              if (iy < 0 || iy >= H) continue;
              for (int kx = 0; kx < kw; ++kx) {
                const int ix = ox * stride + kx - pad;
                if (ix < 0 || ix >= Wd) continue;
                s += X.v[(c * H + iy) * Wd + ix] * W.v[((o * C + c) * kh + ky) * kw + kx];
              }
            }
          }
          out.v[(o * Ho + oy) * Wo + ox] = s;
        }
      }
    }
    return make(std::move(out), {x, w, b},
                [x, w, b, C, H, Wd, O, kh, kw, Ho, Wo, stride, pad](Tape& t, const Tensor<T>& g,
                                                                    int) {
                  const auto& X2 = t.nodes_[x].val;
                  const auto& W2 = t.nodes_[w].val;
                  const bool wx = t.wants(x), ww = t.wants(w), wb = t.wants(b);
                  for (int o = 0; o < O; ++o) {
                    for (int oy = 0; oy < Ho; ++oy) {
                      for (int ox = 0; ox < Wo; ++ox) {
                        const T go = g.v[(o * Ho + oy) * Wo + ox];
                        if (go == T(0)) continue;
                        if (wb) t.scratch_[b].v[o] += go;
                        for (int c = 0; c < C; ++c) {
                          for (int ky = 0; ky < kh; ++ky) {
                            const int iy = oy * stride + ky - pad;
                            if (iy < 0 || iy >= H) continue;
                            for (int kx = 0; kx < kw; ++kx) {
                              const int ix = ox * stride + kx - pad;
                              if (ix < 0 || ix >= Wd) continue;
                              const std::size_t xi = (c * H + iy) * Wd + ix;
                              const std::size_t wi = ((o * C + c) * kh + ky) * kw + kx;
                              if (ww) t.scratch_[w].v[wi] += go * X2.v[xi];
                              if (wx) t.scratch_[x].v[xi] += go * W2.v[wi];
                            }
                          }
                        }
                      }
                    }
                  }
                });
  }

  Var reshape(Var a, std::vector<int> shape) {
    if (Tensor<T>::numel_of(shape) != nodes_[a].val.numel()) {
      throw ConfigError("reshape: dimension error " + shape_str(nodes_[a].val.shape) + " vs " +
                        shape_str(shape));
    }
    Tensor<T> out = nodes_[a].val;
    out.shape = std::move(shape);
    return make(std::move(out), {a}, [a](Tape& t, const Tensor<T>& g, int) {
      if (t.wants(a)) t.acc(a, g.v);
    });
  }

  Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ConfigError("concat: no inputs");
    const int n = nodes_[parts[0]].val.cols();
    int m = 0;
    for (Var p : parts) {
      if (nodes_[p].val.shape.size() != 2 || nodes_[p].val.cols() != n) {
        throw ConfigError("concat: dimension error " + shape_str(nodes_[parts[0]].val.shape) +
                          " vs " + shape_str(nodes_[p].val.shape));
      }
      m += nodes_[p].val.rows();
    }
    Tensor<T> out = Tensor<T>::zeros({m, n});
    std::size_t off = 0;
    for (Var p : parts) {
      const auto& pv = nodes_[p].val.v;
      std::copy(pv.begin(), pv.end(), out.v.begin() + off);
      off += pv.size();
    }
    return make(std::move(out), parts, [parts](Tape& t, const Tensor<T>& g, int) {
      std::size_t off = 0;
      for (Var p : parts) {
        const std::size_t sz = t.nodes_[p].val.numel();
        if (t.wants(p)) {
          auto& gp = t.scratch_[p].v;
          for (std::size_t i = 0; i < sz; ++i) gp[i] += g.v[off + i];
        }
        off += sz;
      }
    });
  }

  Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ConfigError("concat: no inputs");
    const int m = nodes_[parts[0]].val.rows();
    int n = 0;
    for (Var p : parts) {
      if (nodes_[p].val.shape.size() != 2 || nodes_[p].val.rows() != m) {
        throw ConfigError("concat: dimension error " + shape_str(nodes_[parts[0]].val.shape) +
                          " vs " + shape_str(nodes_[p].val.shape));
      }
      n += nodes_[p].val.cols();
    }
    Tensor<T> out = Tensor<T>::zeros({m, n});
    int coff = 0;
    for (Var p : parts) {
      const int pn = nodes_[p].val.cols();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < pn; ++j) out.v[i * n + coff + j] = nodes_[p].val.v[i * pn + j];
      coff += pn;
    }
    return make(std::move(out), parts, [parts, m, n](Tape& t, const Tensor<T>& g, int) {
      int coff = 0;
      for (Var p : parts) {
        const int pn = t.nodes_[p].val.cols();
        if (t.wants(p)) {
          auto& gp = t.scratch_[p].v;
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < pn; ++j) gp[i * pn + j] += g.v[i * n + coff + j];
        }
        coff += pn;
      }
    });
  }

  Var slice_rows(Var a, int r0, int r1) {
    const auto& A = nodes_[a].val;
    const int m = A.rows(), n = A.cols();
    if (A.shape.size() != 2 || r0 < 0 || r1 > m || r0 >= r1) {
      throw ConfigError("slice_rows: bad range [" + std::to_string(r0) + "," +
                        std::to_string(r1) + ") for " + shape_str(A.shape));
    }
    Tensor<T> out = Tensor<T>::zeros({r1 - r0, n});
    std::copy(A.v.begin() + static_cast<std::size_t>(r0) * n,
              A.v.begin() + static_cast<std::size_t>(r1) * n, out.v.begin());
    return make(std::move(out), {a}, [a, r0, n](Tape& t, const Tensor<T>& g, int) {
      if (!t.wants(a)) return;
      auto& ga = t.scratch_[a].v;
      for (std::size_t i = 0; i < g.v.size(); ++i) ga[static_cast<std::size_t>(r0) * n + i] += g.v[i];
    });
  }

  Var slice_cols(Var a, int c0, int c1) {
    const auto& A = nodes_[a].val;
    const int m = A.rows(), n = A.cols();
    if (A.shape.size() != 2 || c0 < 0 || c1 > n || c0 >= c1) {
      throw ConfigError("slice_cols: bad range [" + std::to_string(c0) + "," +
                        std::to_string(c1) + ") for " + shape_str(A.shape));
    }
    const int w = c1 - c0;
    Tensor<T> out = Tensor<T>::zeros({m, w});
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < w; ++j) out.v[i * w + j] = A.v[i * n + c0 + j];
    return make(std::move(out), {a}, [a, c0, n, w](Tape& t, const Tensor<T>& g, int) {
      if (!t.wants(a)) return;
      auto& ga = t.scratch_[a].v;
      const int m2 = static_cast<int>(g.v.size()) / w;
      for (int i = 0; i < m2; ++i)
        for (int j = 0; j < w; ++j) ga[i * n + c0 + j] += g.v[i * w + j];
    });
  }

  Var mean_all(Var a) {
    const auto& A = nodes_[a].val;
    T s = 0;
    for (T x : A.v) s += x;
    const T inv = T(1) / T(A.numel());
    Tensor<T> out({1}, {s * inv});
    return make(std::move(out), {a}, [a, inv](Tape& t, const Tensor<T>& g, int) {
      if (!t.wants(a)) return;
      auto& ga = t.scratch_[a].v;
      for (auto& x : ga) x += g.v[0] * inv;
    });
  }

  // Mean absolute error between prediction and a constant target.
  Var l1_loss(Var pred, Var target) {
    check_same(pred, target, "l1_loss");
    const auto& P = nodes_[pred].val;
    const auto& Q = nodes_[target].val;
    T s = 0;
    for (std::size_t i = 0; i < P.v.size(); ++i) s += std::abs(P.v[i] - Q.v[i]);
    const T inv = T(1) / T(P.numel());
    Tensor<T> out({1}, {s * inv});
    return make(std::move(out), {pred, target}, [pred, target, inv](Tape& t, const Tensor<T>& g,
                                                                    int) {
      if (!t.wants(pred)) return;
      auto& gp = t.scratch_[pred].v;
      const auto& P2 = t.nodes_[pred].val.v;
      const auto& Q2 = t.nodes_[target].val.v;
      for (std::size_t i = 0; i < gp.size(); ++i) {
        const T d = P2[i] - Q2[i];
        const T sgn = d > T(0) ? T(1) : (d < T(0) ? T(-1) : T(0));
        gp[i] += g.v[0] * inv * sgn;
      }
    });
  }

  // KL(q || N(0,I)) for a diagonal Gaussian: -1/2 * sum(1 + logvar - mu^2 - exp(logvar)).
  Var kl_gaussian(Var mu, Var logvar) {
    check_same(mu, logvar, "kl_gaussian");
    const auto& M = nodes_[mu].val;
    const auto& L = nodes_[logvar].val;
    T s = 0;
    for (std::size_t i = 0; i < M.v.size(); ++i) {
      s += T(1) + L.v[i] - M.v[i] * M.v[i] - std::exp(L.v[i]);
    }
    Tensor<T> out({1}, {T(-0.5) * s});
    return make(std::move(out), {mu, logvar}, [mu, logvar](Tape& t, const Tensor<T>& g, int) {
      const auto& M2 = t.nodes_[mu].val.v;
      const auto& L2 = t.nodes_[logvar].val.v;
      if (t.wants(mu)) {
        auto& gm = t.scratch_[mu].v;
        for (std::size_t i = 0; i < gm.size(); ++i) gm[i] += g.v[0] * M2[i];
      }
      if (t.wants(logvar)) {
        auto& gl = t.scratch_[logvar].v;
        for (std::size_t i = 0; i < gl.size(); ++i) {
          gl[i] += g.v[0] * T(0.5) * (std::exp(L2[i]) - T(1));
        }
      }
    });
  }

  // Scaled dot-product attention, split into n_heads along the feature axis.
  // Projections live outside; with a single query equal to a single key the
  // output is exactly the value row.
  Var attention(Var q, Var k, Var v, int n_heads) {
    const auto& Q = nodes_[q].val;
    const auto& K = nodes_[k].val;
    const auto& V = nodes_[v].val;
    if (Q.shape.size() != 2 || K.shape.size() != 2 || V.shape.size() != 2 ||
        Q.cols() != K.cols() || K.rows() != V.rows() || K.cols() != V.cols()) {
      throw ConfigError("attention: dimension error " + shape_str(Q.shape) + " / " +
                        shape_str(K.shape) + " / " + shape_str(V.shape));
    }
    const int d = Q.cols();
    if (n_heads < 1 || d % n_heads != 0) {
      throw ConfigError("attention: model dim " + std::to_string(d) + " not divisible by " +
                        std::to_string(n_heads) + " heads");
    }
    const int dh = d / n_heads;
    const T inv_sqrt = T(1) / std::sqrt(T(dh));
    std::vector<Var> heads;
    heads.reserve(n_heads);
    for (int h = 0; h < n_heads; ++h) {
      const Var qh = slice_cols(q, h * dh, (h + 1) * dh);
      const Var kh = slice_cols(k, h * dh, (h + 1) * dh);
      const Var vh = slice_cols(v, h * dh, (h + 1) * dh);
      const Var scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
      const Var attn = softmax_rows(scores);
      heads.push_back(matmul(attn, vh));
    }
    return n_heads == 1 ? heads[0] : concat_cols(heads);
  }

  // Seeds d(loss)/d(loss) = 1 and accumulates gradients. loss must be scalar.
  void backward(Var loss);

 private:
  struct Node {
    Tensor<T> val;
    Tensor<T> sticky_grad;  // persistent, only for params / grad leaves
    std::vector<Var> parents;
    std::function<void(Tape&, const Tensor<T>&, int)> back;
    bool needs = false;
    bool sticky = false;
    int param_index = -1;
  };

  bool wants(Var id) const { return nodes_[id].needs; }

  void acc(Var id, const std::vector<T>& g) {
    auto& dst = scratch_[id].v;
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  }

  void check_same(Var a, Var b, const char* op) const {
    if (nodes_[a].val.shape != nodes_[b].val.shape) {
      throw ConfigError(std::string(op) + ": dimension error " + shape_str(nodes_[a].val.shape) +
                        " vs " + shape_str(nodes_[b].val.shape));
    }
  }

  Var make(Tensor<T> out, std::vector<Var> parents,
           std::function<void(Tape&, const Tensor<T>&, int)> back) {
    Node n;
    n.val = std::move(out);
    n.parents = std::move(parents);
    bool needs = false;
    for (Var p : n.parents) needs = needs || nodes_[p].needs;
    n.needs = needs;
    if (needs) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<Var>(nodes_.size()) - 1;
  }

  ParamStore<T>* store_;
  std::vector<Node> nodes_;
  std::vector<Tensor<T>> scratch_;

  friend struct ParamStore<T>;
};

}  // namespace bcil::nn
