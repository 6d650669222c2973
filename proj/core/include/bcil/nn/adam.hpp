// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <cstdint>
#include <unordered_map>

#include "bcil/nn/tensor.hpp"
#include "bcil/rng.hpp"

namespace bcil::nn {

// Named parameter tensors with Adam moments. Registration order is fixed and
// becomes the model-file layout, so construction must be deterministic.
template <typename T>
struct ParamStore {
  struct Entry {
    std::string name;
    Tensor<T> value, grad, m, v;
    bool trainable = true;
  };

  std::vector<Entry> entries;
  std::unordered_map<std::string, int> index;
  std::int64_t step_count = 0;

  int add(const std::string& name, Tensor<T> init, bool trainable = true) {
    if (index.count(name)) throw ConfigError("duplicate parameter name: " + name);
    Entry e;
    e.name = name;
    e.grad = Tensor<T>::zeros(init.shape);
    e.m = Tensor<T>::zeros(init.shape);
    e.v = Tensor<T>::zeros(init.shape);
    e.value = std::move(init);
    e.trainable = trainable;
    entries.push_back(std::move(e));
    index[name] = static_cast<int>(entries.size()) - 1;
    return static_cast<int>(entries.size()) - 1;
  }

  Entry& at(const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw ConfigError("unknown parameter: " + name);
    return entries[it->second];
  }

  void zero_grad() {
    for (auto& e : entries) {
      std::fill(e.grad.v.begin(), e.grad.v.end(), T(0));
    }
  }

  std::size_t trainable_count() const {
    std::size_t n = 0;
    for (const auto& e : entries) {
      if (e.trainable) n += e.value.numel();
    }
    return n;
  }

  // Adam with bias correction. A step with zero gradients leaves parameters
  // unchanged.
  void adam_step(T lr, T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8)) {
    ++step_count;
    const T bc1 = T(1) - std::pow(beta1, T(step_count));
    const T bc2 = T(1) - std::pow(beta2, T(step_count));
    for (auto& e : entries) {
      if (!e.trainable) continue;
      for (std::size_t i = 0; i < e.value.v.size(); ++i) {
        const T g = e.grad.v[i];
        e.m.v[i] = beta1 * e.m.v[i] + (T(1) - beta1) * g;
        e.v.v[i] = beta2 * e.v.v[i] + (T(1) - beta2) * g * g;
        const T mhat = e.m.v[i] / bc1;
        const T vhat = e.v.v[i] / bc2;
        e.value.v[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }
};

// Kaiming-style fan-in uniform init.
template <typename T>
Tensor<T> init_uniform(std::vector<int> shape, int fan_in, Rng& rng, double gain = 1.0) {
  Tensor<T> t = Tensor<T>::zeros(std::move(shape));
  const double bound = gain * std::sqrt(1.0 / std::max(1, fan_in));
  for (auto& x : t.v) x = static_cast<T>(rng.uniform(-bound, bound));
  return t;
}

template <typename T>
typename Tape<T>::Var Tape<T>::param(int store_index) {
  if (store_ == nullptr) throw StateError("tape has no parameter store attached");
  auto& e = store_->entries[store_index];
  Node n;
  n.val = e.value;
  n.needs = e.trainable;
  n.param_index = store_index;
  nodes_.push_back(std::move(n));
  return static_cast<Var>(nodes_.size()) - 1;
}

template <typename T>
void Tape<T>::backward(Var loss) {
  if (nodes_[loss].val.numel() != 1) {
    throw StateError("backward: loss must be scalar, got " + shape_str(nodes_[loss].val.shape));
  }
  // Fresh scratch gradients for this pass.
  scratch_.assign(nodes_.size(), Tensor<T>{});
  for (std::size_t i = 0; i <= static_cast<std::size_t>(loss); ++i) {
    if (nodes_[i].needs) scratch_[i] = Tensor<T>::zeros(nodes_[i].val.shape);
  }
  if (!nodes_[loss].needs) scratch_[loss] = Tensor<T>::zeros(nodes_[loss].val.shape);
  scratch_[loss].v[0] = T(1);

  for (int i = loss; i >= 0; --i) {
    auto& n = nodes_[i];
    if (!n.needs || !n.back) continue;
    n.back(*this, scratch_[i], i);
  }

  // Accumulate into persistent grads (leaves) and the parameter store.
  for (int i = 0; i <= loss; ++i) {
    auto& n = nodes_[i];
    if (n.sticky) {
      for (std::size_t k = 0; k < n.sticky_grad.v.size(); ++k) {
        n.sticky_grad.v[k] += scratch_[i].v[k];
      }
    }
    if (n.param_index >= 0 && store_ != nullptr && store_->entries[n.param_index].trainable) {
      auto& g = store_->entries[n.param_index].grad.v;
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += scratch_[i].v[k];
    }
  }
  scratch_.clear();
}

}  // namespace bcil::nn
