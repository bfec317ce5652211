// DAG of layers with a caller-owned Workspace, so several forward
// passes (clean batch + two augmented views) can coexist on one set of
// weights and their gradients accumulate into the same parameter grads.

#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

#include "deeprepair/nn/layers.hpp"
#include "deeprepair/nn/tensor.hpp"

namespace deeprepair::nn {

// Per-forward activation / gradient storage.
template <typename T>
struct Workspace {
  std::vector<Tensor<T>> acts;
  std::vector<std::vector<T>> states;
  std::vector<Tensor<T>> grads;
  Tensor<T> dinput;
};

template <typename T>
class Network {
 public:
  static constexpr int kInput = -1;

  // Returns the node id.  `inputs` are prior node ids or kInput.
  int add(std::unique_ptr<Layer<T>> layer, std::vector<int> inputs) {
    if (inputs.size() != layer->arity())
      throw std::invalid_argument("network: wrong input arity");
    for (int id : inputs)
      if (id != kInput && (id < 0 || id >= int(nodes_.size())))
        throw std::invalid_argument("network: bad input node id");
    nodes_.push_back({std::move(layer), std::move(inputs)});
    return int(nodes_.size()) - 1;
  }

  std::size_t node_count() const { return nodes_.size(); }
  Layer<T>& layer(int id) { return *nodes_.at(id).layer; }
  const Layer<T>& layer(int id) const { return *nodes_.at(id).layer; }

  void init(Rng& rng) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      Rng child = rng.stream(0x1e7u, i);
      nodes_[i].layer->init(child);
    }
  }

  void forward(const Tensor<T>& x, Workspace<T>& ws, bool training) const {
    ws.acts.resize(nodes_.size());
    ws.states.resize(nodes_.size());
    std::vector<const Tensor<T>*> in;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      in.clear();
      for (int id : nodes_[i].inputs)
        in.push_back(id == kInput ? &x : &ws.acts[id]);
      nodes_[i].layer->forward(in, ws.acts[i], ws.states[i], training);
    }
  }

  const Tensor<T>& output(const Workspace<T>& ws) const {
    return ws.acts.back();
  }

  // Accumulates parameter gradients; dout is d(loss)/d(output).
  void backward(const Tensor<T>& x, const Tensor<T>& dout,
                Workspace<T>& ws) const {
    ws.grads.assign(nodes_.size(), Tensor<T>());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      ws.grads[i] = Tensor<T>(ws.acts[i].shape);
    }
    ws.dinput = Tensor<T>(x.shape);
    kernels::axpy(dout.size(), T(1), dout.data.data(),
                  ws.grads.back().data.data());
    std::vector<const Tensor<T>*> in;
    std::vector<Tensor<T>*> din;
    for (std::size_t ri = nodes_.size(); ri-- > 0;) {
      in.clear();
      din.clear();
      for (int id : nodes_[ri].inputs) {
        in.push_back(id == kInput ? &x : &ws.acts[id]);
        din.push_back(id == kInput ? &ws.dinput : &ws.grads[id]);
      }
      nodes_[ri].layer->backward(in, ws.acts[ri], ws.grads[ri], ws.states[ri],
                                 din);
    }
  }

  void zero_grad() {
    for (auto& n : nodes_)
      for (auto& p : n.layer->params())
        std::fill(p.grad.begin(), p.grad.end(), T(0));
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes_)
      for (const auto& p : node.layer->params()) n += p.value.size();
    return n;
  }

  // Flat parameter access in node/block order (used by the optimizer,
  // checkpointing, and the finite-difference tests).
  std::vector<T> get_params() const {
    std::vector<T> out;
    out.reserve(param_count());
    for (const auto& node : nodes_)
      for (const auto& p : node.layer->params())
        out.insert(out.end(), p.value.begin(), p.value.end());
    return out;
  }

  void set_params(const std::vector<T>& flat) {
    if (flat.size() != param_count())
      throw std::invalid_argument("network: parameter size mismatch");
    std::size_t off = 0;
    for (auto& node : nodes_)
      for (auto& p : node.layer->params()) {
        std::copy_n(flat.data() + off, p.value.size(), p.value.data());
        off += p.value.size();
      }
  }

  std::vector<T> get_grads() const {
    std::vector<T> out;
    out.reserve(param_count());
    for (const auto& node : nodes_)
      for (const auto& p : node.layer->params())
        out.insert(out.end(), p.grad.begin(), p.grad.end());
    return out;
  }

  std::size_t buffer_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes_)
      for (const auto& b : node.layer->buffers()) n += b.value.size();
    return n;
  }

  std::vector<T> get_buffers() const {
    std::vector<T> out;
    out.reserve(buffer_count());
    for (const auto& node : nodes_)
      for (const auto& b : node.layer->buffers())
        out.insert(out.end(), b.value.begin(), b.value.end());
    return out;
  }

  void set_buffers(const std::vector<T>& flat) {
    if (flat.size() != buffer_count())
      throw std::invalid_argument("network: buffer size mismatch");
    std::size_t off = 0;
    for (auto& node : nodes_)
      for (auto& b : node.layer->buffers()) {
        std::copy_n(flat.data() + off, b.value.size(), b.value.data());
        off += b.value.size();
      }
  }

  // Visits every param block: f(block).
  template <typename F>
  void for_each_param(F&& f) {
    for (auto& node : nodes_)
      for (auto& p : node.layer->params()) f(p);
  }

 private:
  struct Node {
    std::unique_ptr<Layer<T>> layer;
    std::vector<int> inputs;
  };
  std::vector<Node> nodes_;
};

// SGD with classical momentum and decoupled-from-nothing L2 weight decay
// (decay folded into the gradient, the usual SGD formulation).
template <typename T>
class SgdOptimizer {
 public:
  SgdOptimizer(Network<T>& net, double lr, double momentum,
               double weight_decay)
      : net_(net), lr_(lr), momentum_(momentum), decay_(weight_decay) {
    velocity_.assign(net.param_count(), T(0));
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

  void step() {
    std::size_t off = 0;
    net_.for_each_param([&](ParamBlock<T>& p) {
      const bool decayed = p.name == "weight";  // no decay on bias/gamma/beta
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        T g = p.grad[i];
        if (decayed) g += T(decay_) * p.value[i];
        T& v = velocity_[off + i];
        v = T(momentum_) * v + g;
        p.value[i] -= T(lr_) * v;
      }
      off += p.value.size();
    });
  }

 private:
  Network<T>& net_;
  double lr_, momentum_, decay_;
  std::vector<T> velocity_;
};

}  // namespace deeprepair::nn
