// Layer zoo.  Everything is templated on the scalar type: production
// training instantiates float (vectorized GEMM), the finite-difference
// gradient tests instantiate double.
//
// Layers are stateless across calls except for parameters and running
// buffers; anything a backward pass needs from the matching forward
// (batch-norm statistics, etc.) lives in a caller-owned state vector so
// several forward passes can be in flight on the same network.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <type_traits>
#include <vector>

#include "deeprepair/errors.hpp"
#include "deeprepair/kernels.hpp"
#include "deeprepair/nn/tensor.hpp"
#include "deeprepair/rng.hpp"

namespace deeprepair::nn {

template <typename T>
struct ParamBlock {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<T> value;
  std::vector<T> grad;

  void resize(std::vector<std::size_t> s) {
    shape = std::move(s);
    value.assign(Tensor<T>::count(shape), T(0));
    grad.assign(value.size(), T(0));
  }
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual std::size_t arity() const { return 1; }
  virtual void init(Rng&) {}

  std::vector<ParamBlock<T>>& params() { return params_; }
  const std::vector<ParamBlock<T>>& params() const { return params_; }
  // Non-trained state that still belongs in a checkpoint (running stats).
  std::vector<ParamBlock<T>>& buffers() { return buffers_; }
  const std::vector<ParamBlock<T>>& buffers() const { return buffers_; }

  virtual void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out,
                       std::vector<T>& state, bool training) = 0;
  // Accumulates (+=) into *din and into param grads.
  virtual void backward(const std::vector<const Tensor<T>*>& in,
                        const Tensor<T>& out, const Tensor<T>& dout,
                        const std::vector<T>& state,
                        const std::vector<Tensor<T>*>& din) = 0;

 protected:
  std::vector<ParamBlock<T>> params_;
  std::vector<ParamBlock<T>> buffers_;
};

namespace detail {

template <typename T>
inline double sumsq(std::size_t n, const T* x) {
  if constexpr (std::is_same_v<T, float>) {
    return kernels::sumsq(n, x);
  } else {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += double(x[i]) * double(x[i]);
    return s;
  }
}

template <typename T>
inline void transpose(std::size_t rows, std::size_t cols, const T* a, T* at) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) at[c * rows + r] = a[r * cols + c];
}

}  // namespace detail

// -------------------------------------------------------------------------
// Conv2d: zero padding, square kernel, im2col + GEMM per sample.
template <typename T>
class Conv2d : public Layer<T> {
 public:
  Conv2d(std::size_t in_c, std::size_t out_c, std::size_t ksize,
         std::size_t stride = 1, std::size_t pad = 0)
      : in_c_(in_c), out_c_(out_c), k_(ksize), stride_(stride), pad_(pad) {
    this->params_.resize(2);
    this->params_[0].name = "weight";
    this->params_[0].resize({out_c_, in_c_ * k_ * k_});
    this->params_[1].name = "bias";
    this->params_[1].resize({out_c_});
  }

  std::string kind() const override { return "conv2d"; }

  void init(Rng& rng) override {
    const double std = std::sqrt(2.0 / double(in_c_ * k_ * k_));
    for (auto& w : this->params_[0].value) w = T(rng.normal(0.0, std));
  }

  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out,
               std::vector<T>&, bool) override {
    const Tensor<T>& x = *in[0];
    const std::size_t b = x.dim(0), h = x.dim(2), w = x.dim(3);
    if (x.dim(1) != in_c_) throw ValidationError("conv2d: channel mismatch");
    const std::size_t oh = out_dim(h), ow = out_dim(w), ohw = oh * ow;
    const std::size_t kk = in_c_ * k_ * k_;
    out = Tensor<T>({b, out_c_, oh, ow});
    std::vector<T> col(kk * ohw);
    const T* wmat = this->params_[0].value.data();
    const T* bias = this->params_[1].value.data();
    for (std::size_t s = 0; s < b; ++s) {
      im2col(x.data.data() + s * in_c_ * h * w, h, w, col.data());
      T* o = out.data.data() + s * out_c_ * ohw;
      kernels::gemm(out_c_, kk, ohw, wmat, col.data(), T(0), o);
      for (std::size_t c = 0; c < out_c_; ++c)
        for (std::size_t i = 0; i < ohw; ++i) o[c * ohw + i] += bias[c];
    }
  }

  void backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>& out,
                const Tensor<T>& dout, const std::vector<T>&,
                const std::vector<Tensor<T>*>& din) override {
    const Tensor<T>& x = *in[0];
    const std::size_t b = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::size_t oh = out.dim(2), ow = out.dim(3), ohw = oh * ow;
    const std::size_t kk = in_c_ * k_ * k_;
    std::vector<T> col(kk * ohw), colt(ohw * kk), dcol(kk * ohw);
    std::vector<T> wt(kk * out_c_);
    detail::transpose(out_c_, kk, this->params_[0].value.data(), wt.data());
    T* dw = this->params_[0].grad.data();
    T* db = this->params_[1].grad.data();
    for (std::size_t s = 0; s < b; ++s) {
      const T* dy = dout.data.data() + s * out_c_ * ohw;
      im2col(x.data.data() + s * in_c_ * h * w, h, w, col.data());
      detail::transpose(kk, ohw, col.data(), colt.data());
      kernels::gemm(out_c_, ohw, kk, dy, colt.data(), T(1), dw);
      for (std::size_t c = 0; c < out_c_; ++c)
        db[c] += T(kernels::sum(ohw, dy + c * ohw));
      if (din[0]) {
        kernels::gemm(kk, out_c_, ohw, wt.data(), dy, T(0), dcol.data());
        col2im(dcol.data(), h, w,
               din[0]->data.data() + s * in_c_ * h * w);
      }
    }
  }

 private:
  std::size_t out_dim(std::size_t d) const {
    return (d + 2 * pad_ - k_) / stride_ + 1;
  }

  void im2col(const T* x, std::size_t h, std::size_t w, T* col) const {
    const std::size_t oh = out_dim(h), ow = out_dim(w), ohw = oh * ow;
    std::size_t row = 0;
    for (std::size_t c = 0; c < in_c_; ++c) {
      const T* plane = x + c * h * w;
      for (std::size_t ky = 0; ky < k_; ++ky)
        for (std::size_t kx = 0; kx < k_; ++kx, ++row) {
          T* dst = col + row * ohw;
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const long iy = long(oy * stride_ + ky) - long(pad_);
            for (std::size_t ox = 0; ox < ow; ++ox) {
              const long ix = long(ox * stride_ + kx) - long(pad_);
              dst[oy * ow + ox] =
                  (iy >= 0 && iy < long(h) && ix >= 0 && ix < long(w))
                      ? plane[std::size_t(iy) * w + std::size_t(ix)]
                      : T(0);
            }
          }
        }
    }
  }

  void col2im(const T* col, std::size_t h, std::size_t w, T* dx) const {
    const std::size_t oh = out_dim(h), ow = out_dim(w), ohw = oh * ow;
    std::size_t row = 0;
    for (std::size_t c = 0; c < in_c_; ++c) {
      T* plane = dx + c * h * w;
      for (std::size_t ky = 0; ky < k_; ++ky)
        for (std::size_t kx = 0; kx < k_; ++kx, ++row) {
          const T* src = col + row * ohw;
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const long iy = long(oy * stride_ + ky) - long(pad_);
            if (iy < 0 || iy >= long(h)) continue;
            for (std::size_t ox = 0; ox < ow; ++ox) {
              const long ix = long(ox * stride_ + kx) - long(pad_);
              if (ix < 0 || ix >= long(w)) continue;
              plane[std::size_t(iy) * w + std::size_t(ix)] += src[oy * ow + ox];
            }
          }
        }
    }
  }

  std::size_t in_c_, out_c_, k_, stride_, pad_;
};

// -------------------------------------------------------------------------
// BatchNorm2d.  Forward in training mode saves (mean, invstd) in `state`
// and updates the running buffers; eval mode normalizes with the running
// buffers and leaves `state` empty.
template <typename T>
class BatchNorm2d : public Layer<T> {
 public:
  explicit BatchNorm2d(std::size_t channels, double eps = 1e-5,
                       double momentum = 0.1)
      : c_(channels), eps_(eps), momentum_(momentum) {
    this->params_.resize(2);
    this->params_[0].name = "gamma";
    this->params_[0].resize({c_});
    std::fill(this->params_[0].value.begin(), this->params_[0].value.end(),
              T(1));
    this->params_[1].name = "beta";
    this->params_[1].resize({c_});
    this->buffers_.resize(2);
    this->buffers_[0].name = "running_mean";
    this->buffers_[0].resize({c_});
    this->buffers_[1].name = "running_var";
    this->buffers_[1].resize({c_});
    std::fill(this->buffers_[1].value.begin(), this->buffers_[1].value.end(),
              T(1));
  }

  std::string kind() const override { return "batchnorm2d"; }

  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out,
               std::vector<T>& state, bool training) override {
    const Tensor<T>& x = *in[0];
    if (x.dim(1) != c_) throw ValidationError("batchnorm: channel mismatch");
    const std::size_t b = x.dim(0), hw = x.dim(2) * x.dim(3);
    const std::size_t n = b * hw;
    out = Tensor<T>(x.shape);
    const T* gamma = this->params_[0].value.data();
    const T* beta = this->params_[1].value.data();
    state.clear();
    if (training) state.resize(2 * c_);
    for (std::size_t c = 0; c < c_; ++c) {
      double mean, invstd;
      if (training) {
        double s = 0.0, ss = 0.0;
        for (std::size_t s_i = 0; s_i < b; ++s_i) {
          const T* p = x.data.data() + (s_i * c_ + c) * hw;
          s += kernels::sum(hw, p);
          ss += detail::sumsq(hw, p);
        }
        mean = s / double(n);
        const double var = std::max(0.0, ss / double(n) - mean * mean);
        invstd = 1.0 / std::sqrt(var + eps_);
        auto& rm = this->buffers_[0].value[c];
        auto& rv = this->buffers_[1].value[c];
        rm = T((1.0 - momentum_) * double(rm) + momentum_ * mean);
        rv = T((1.0 - momentum_) * double(rv) + momentum_ * var);
        state[c] = T(mean);
        state[c_ + c] = T(invstd);
      } else {
        mean = double(this->buffers_[0].value[c]);
        invstd = 1.0 / std::sqrt(double(this->buffers_[1].value[c]) + eps_);
      }
      const T a = T(double(gamma[c]) * invstd);
      const T o = T(double(beta[c]) - double(gamma[c]) * invstd * mean);
      for (std::size_t s_i = 0; s_i < b; ++s_i) {
        const T* p = x.data.data() + (s_i * c_ + c) * hw;
        T* q = out.data.data() + (s_i * c_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) q[i] = a * p[i] + o;
      }
    }
  }

  void backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&,
                const Tensor<T>& dout, const std::vector<T>& state,
                const std::vector<Tensor<T>*>& din) override {
    const Tensor<T>& x = *in[0];
    const std::size_t b = x.dim(0), hw = x.dim(2) * x.dim(3);
    const std::size_t n = b * hw;
    const T* gamma = this->params_[0].value.data();
    T* dgamma = this->params_[0].grad.data();
    T* dbeta = this->params_[1].grad.data();
    const bool trained = state.size() == 2 * c_;
    for (std::size_t c = 0; c < c_; ++c) {
      const double mean =
          trained ? double(state[c]) : double(this->buffers_[0].value[c]);
      const double invstd =
          trained ? double(state[c_ + c])
                  : 1.0 / std::sqrt(double(this->buffers_[1].value[c]) + eps_);
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::size_t s_i = 0; s_i < b; ++s_i) {
        const T* xp = x.data.data() + (s_i * c_ + c) * hw;
        const T* dy = dout.data.data() + (s_i * c_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          sum_dy += double(dy[i]);
          sum_dy_xhat += double(dy[i]) * (double(xp[i]) - mean) * invstd;
        }
      }
      dgamma[c] += T(sum_dy_xhat);
      dbeta[c] += T(sum_dy);
      if (!din[0]) continue;
      const double g = double(gamma[c]) * invstd;
      for (std::size_t s_i = 0; s_i < b; ++s_i) {
        const T* xp = x.data.data() + (s_i * c_ + c) * hw;
        const T* dy = dout.data.data() + (s_i * c_ + c) * hw;
        T* dx = din[0]->data.data() + (s_i * c_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          if (trained) {
            const double xhat = (double(xp[i]) - mean) * invstd;
            dx[i] += T(g * (double(dy[i]) - sum_dy / double(n) -
                            xhat * sum_dy_xhat / double(n)));
          } else {
            dx[i] += T(g * double(dy[i]));
          }
        }
      }
    }
  }

 private:
  std::size_t c_;
  double eps_, momentum_;
};

// -------------------------------------------------------------------------
template <typename T>
class ReLU : public Layer<T> {
 public:
  std::string kind() const override { return "relu"; }

  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out,
               std::vector<T>&, bool) override {
    out = Tensor<T>(in[0]->shape);
    kernels::relu(in[0]->size(), in[0]->data.data(), out.data.data());
  }

  void backward(const std::vector<const Tensor<T>*>&, const Tensor<T>& out,
                const Tensor<T>& dout, const std::vector<T>&,
                const std::vector<Tensor<T>*>& din) override {
    if (din[0])
      kernels::relu_grad(out.size(), out.data.data(), dout.data.data(),
                         din[0]->data.data());
  }
};

// -------------------------------------------------------------------------
// 2x2 average pooling, stride 2; spatial dims must be even.
template <typename T>
class AvgPool2 : public Layer<T> {
 public:
  std::string kind() const override { return "avgpool2"; }

  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out,
               std::vector<T>&, bool) override {
    const Tensor<T>& x = *in[0];
    const std::size_t b = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (h % 2 || w % 2) throw ValidationError("avgpool2: odd spatial size");
    out = Tensor<T>({b, c, h / 2, w / 2});
    for (std::size_t p = 0; p < b * c; ++p) {
      const T* src = x.data.data() + p * h * w;
      T* dst = out.data.data() + p * (h / 2) * (w / 2);
      for (std::size_t y = 0; y < h / 2; ++y)
        for (std::size_t xx = 0; xx < w / 2; ++xx)
          dst[y * (w / 2) + xx] =
              (src[(2 * y) * w + 2 * xx] + src[(2 * y) * w + 2 * xx + 1] +
               src[(2 * y + 1) * w + 2 * xx] +
               src[(2 * y + 1) * w + 2 * xx + 1]) /
              T(4);
    }
  }

  void backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&,
                const Tensor<T>& dout, const std::vector<T>&,
                const std::vector<Tensor<T>*>& din) override {
    if (!din[0]) return;
    const Tensor<T>& x = *in[0];
    const std::size_t b = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    for (std::size_t p = 0; p < b * c; ++p) {
      const T* dy = dout.data.data() + p * (h / 2) * (w / 2);
      T* dx = din[0]->data.data() + p * h * w;
      for (std::size_t y = 0; y < h / 2; ++y)
        for (std::size_t xx = 0; xx < w / 2; ++xx) {
          const T g = dy[y * (w / 2) + xx] / T(4);
          dx[(2 * y) * w + 2 * xx] += g;
          dx[(2 * y) * w + 2 * xx + 1] += g;
          dx[(2 * y + 1) * w + 2 * xx] += g;
          dx[(2 * y + 1) * w + 2 * xx + 1] += g;
        }
    }
  }
};

// -------------------------------------------------------------------------
template <typename T>
class GlobalAvgPool : public Layer<T> {
 public:
  std::string kind() const override { return "gap"; }

  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out,
               std::vector<T>&, bool) override {
    const Tensor<T>& x = *in[0];
    const std::size_t b = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    out = Tensor<T>({b, c});
    for (std::size_t p = 0; p < b * c; ++p)
      out.data[p] = T(kernels::sum(hw, x.data.data() + p * hw) / double(hw));
  }

  void backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&,
                const Tensor<T>& dout, const std::vector<T>&,
                const std::vector<Tensor<T>*>& din) override {
    if (!din[0]) return;
    const Tensor<T>& x = *in[0];
    const std::size_t b = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    for (std::size_t p = 0; p < b * c; ++p) {
      const T g = dout.data[p] / T(hw);
      T* dx = din[0]->data.data() + p * hw;
      for (std::size_t i = 0; i < hw; ++i) dx[i] += g;
    }
  }
};

// -------------------------------------------------------------------------
// Fully connected.  Weight stored input-major (in_f x out_f) so forward
// is a single row-major GEMM.  A 4-d input is flattened per sample.
template <typename T>
class Linear : public Layer<T> {
 public:
  Linear(std::size_t in_f, std::size_t out_f) : in_f_(in_f), out_f_(out_f) {
    this->params_.resize(2);
    this->params_[0].name = "weight";
    this->params_[0].resize({in_f_, out_f_});
    this->params_[1].name = "bias";
    this->params_[1].resize({out_f_});
  }

  std::string kind() const override { return "linear"; }

  void init(Rng& rng) override {
    const double std = std::sqrt(2.0 / double(in_f_));
    for (auto& w : this->params_[0].value) w = T(rng.normal(0.0, std));
  }

  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out,
               std::vector<T>&, bool) override {
    const Tensor<T>& x = *in[0];
    const std::size_t b = x.dim(0);
    if (x.size() / b != in_f_) throw ValidationError("linear: size mismatch");
    out = Tensor<T>({b, out_f_});
    kernels::gemm(b, in_f_, out_f_, x.data.data(),
                  this->params_[0].value.data(), T(0), out.data.data());
    const T* bias = this->params_[1].value.data();
    for (std::size_t s = 0; s < b; ++s)
      for (std::size_t j = 0; j < out_f_; ++j)
        out.data[s * out_f_ + j] += bias[j];
  }

  void backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&,
                const Tensor<T>& dout, const std::vector<T>&,
                const std::vector<Tensor<T>*>& din) override {
    const Tensor<T>& x = *in[0];
    const std::size_t b = x.dim(0);
    std::vector<T> xt(in_f_ * b);
    detail::transpose(b, in_f_, x.data.data(), xt.data());
    kernels::gemm(in_f_, b, out_f_, xt.data(), dout.data.data(), T(1),
                  this->params_[0].grad.data());
    T* db = this->params_[1].grad.data();
    for (std::size_t s = 0; s < b; ++s)
      for (std::size_t j = 0; j < out_f_; ++j)
        db[j] += dout.data[s * out_f_ + j];
    if (din[0]) {
      std::vector<T> wt(out_f_ * in_f_);
      detail::transpose(in_f_, out_f_, this->params_[0].value.data(),
                        wt.data());
      kernels::gemm(b, out_f_, in_f_, dout.data.data(), wt.data(), T(1),
                    din[0]->data.data());
    }
  }

 private:
  std::size_t in_f_, out_f_;
};

// -------------------------------------------------------------------------
template <typename T>
class Add : public Layer<T> {
 public:
  std::string kind() const override { return "add"; }
  std::size_t arity() const override { return 2; }

  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out,
               std::vector<T>&, bool) override {
    if (in[0]->shape != in[1]->shape)
      throw ValidationError("add: shape mismatch");
    out = Tensor<T>(in[0]->shape);
    for (std::size_t i = 0; i < out.size(); ++i)
      out.data[i] = in[0]->data[i] + in[1]->data[i];
  }

  void backward(const std::vector<const Tensor<T>*>&, const Tensor<T>&,
                const Tensor<T>& dout, const std::vector<T>&,
                const std::vector<Tensor<T>*>& din) override {
    for (int k = 0; k < 2; ++k)
      if (din[k])
        kernels::axpy(dout.size(), T(1), dout.data.data(),
                      din[k]->data.data());
  }
};

// -------------------------------------------------------------------------
// Channel concatenation of two 4-d inputs with matching B, H, W.
template <typename T>
class ConcatChannels : public Layer<T> {
 public:
  std::string kind() const override { return "concat"; }
  std::size_t arity() const override { return 2; }

  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out,
               std::vector<T>&, bool) override {
    const Tensor<T>& a = *in[0];
    const Tensor<T>& b = *in[1];
    if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
      throw ValidationError("concat: shape mismatch");
    const std::size_t bs = a.dim(0), hw = a.dim(2) * a.dim(3);
    const std::size_t ca = a.dim(1), cb = b.dim(1);
    out = Tensor<T>({bs, ca + cb, a.dim(2), a.dim(3)});
    for (std::size_t s = 0; s < bs; ++s) {
      std::copy_n(a.data.data() + s * ca * hw, ca * hw,
                  out.data.data() + s * (ca + cb) * hw);
      std::copy_n(b.data.data() + s * cb * hw, cb * hw,
                  out.data.data() + (s * (ca + cb) + ca) * hw);
    }
  }

  void backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&,
                const Tensor<T>& dout, const std::vector<T>&,
                const std::vector<Tensor<T>*>& din) override {
    const std::size_t bs = in[0]->dim(0);
    const std::size_t hw = in[0]->dim(2) * in[0]->dim(3);
    const std::size_t ca = in[0]->dim(1), cb = in[1]->dim(1);
    for (std::size_t s = 0; s < bs; ++s) {
      if (din[0])
        kernels::axpy(ca * hw, T(1), dout.data.data() + s * (ca + cb) * hw,
                      din[0]->data.data() + s * ca * hw);
      if (din[1])
        kernels::axpy(cb * hw, T(1),
                      dout.data.data() + (s * (ca + cb) + ca) * hw,
                      din[1]->data.data() + s * cb * hw);
    }
  }
};

}  // namespace deeprepair::nn
