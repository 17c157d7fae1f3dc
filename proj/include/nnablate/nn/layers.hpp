#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nnablate/core/error.hpp"
#include "nnablate/core/random.hpp"
#include "nnablate/core/tensor.hpp"

namespace nnablate::nn {

// Valid padding, stride 1. Weights are (filters, in_channels, kh, kw).
struct Conv2D {
  Tensor weights;
  std::vector<double> bias;

  std::size_t filters() const { return weights.extent(0); }
  std::size_t in_channels() const { return weights.extent(1); }
  std::size_t kernel_h() const { return weights.extent(2); }
  std::size_t kernel_w() const { return weights.extent(3); }

  friend bool operator==(const Conv2D&, const Conv2D&) = default;
};

// Non-overlapping window with stride equal to its size; odd extents are floored.
struct MaxPool2D {
  std::size_t size = 2;
  friend bool operator==(const MaxPool2D&, const MaxPool2D&) = default;
};

// Weights are (out, in).
struct Dense {
  Tensor weights;
  std::vector<double> bias;

  std::size_t out_features() const { return weights.extent(0); }
  std::size_t in_features() const { return weights.extent(1); }
  double weight(std::size_t o, std::size_t i) const { return weights[o * in_features() + i]; }
  double& weight(std::size_t o, std::size_t i) { return weights[o * in_features() + i]; }

  friend bool operator==(const Dense&, const Dense&) = default;
};

struct ReLU {
  friend bool operator==(const ReLU&, const ReLU&) = default;
};
struct Tanh {
  friend bool operator==(const Tanh&, const Tanh&) = default;
};
struct Sigmoid {
  friend bool operator==(const Sigmoid&, const Sigmoid&) = default;
};
struct Flatten {
  friend bool operator==(const Flatten&, const Flatten&) = default;
};

// Inverted dropout; inert outside training.
struct Dropout {
  double rate = 0.2;
  friend bool operator==(const Dropout&, const Dropout&) = default;
};

using Layer = std::variant<Conv2D, MaxPool2D, Dense, ReLU, Tanh, Sigmoid, Flatten, Dropout>;

inline std::string_view layer_name(const Layer& layer) {
  static constexpr std::string_view names[] = {"conv2d",  "maxpool2d", "dense",   "relu",
                                               "tanh",    "sigmoid",   "flatten", "dropout"};
  return names[layer.index()];
}

inline bool is_elementwise(const Layer& layer) {
  return std::holds_alternative<ReLU>(layer) || std::holds_alternative<Tanh>(layer) ||
         std::holds_alternative<Sigmoid>(layer) || std::holds_alternative<Dropout>(layer);
}

inline Conv2D make_conv(std::size_t filters, std::size_t in_channels, std::size_t kh, std::size_t kw) {
  return Conv2D{Tensor({filters, in_channels, kh, kw}), std::vector<double>(filters, 0.0)};
}

inline Dense make_dense(std::size_t out, std::size_t in) {
  return Dense{Tensor({out, in}), std::vector<double>(out, 0.0)};
}

// Output shape of `layer` applied to `in`; throws ShapeError naming `index`.
inline Shape output_shape(const Layer& layer, const Shape& in, std::size_t index) {
  auto fail = [&](const std::string& why) -> ShapeError {
    return ShapeError(index, std::string(layer_name(layer)) + " " + why + ", input " + shape_string(in));
  };
  if (const auto* conv = std::get_if<Conv2D>(&layer)) {
    if (conv->weights.rank() != 4) throw fail("weights must be rank 4");
    if (conv->bias.size() != conv->filters()) throw fail("bias length differs from filter count");
    if (in.size() != 3) throw fail("expects a (channels, height, width) input");
    if (in[0] != conv->in_channels()) throw fail("channel count mismatch");
    if (in[1] < conv->kernel_h() || in[2] < conv->kernel_w()) throw fail("kernel larger than input");
    return {conv->filters(), in[1] - conv->kernel_h() + 1, in[2] - conv->kernel_w() + 1};
  }
  if (const auto* pool = std::get_if<MaxPool2D>(&layer)) {
    if (pool->size == 0) throw fail("pool size must be positive");
    if (in.size() != 3) throw fail("expects a (channels, height, width) input");
    if (in[1] < pool->size || in[2] < pool->size) throw fail("window larger than input");
    return {in[0], in[1] / pool->size, in[2] / pool->size};
  }
  if (const auto* dense = std::get_if<Dense>(&layer)) {
    if (dense->weights.rank() != 2) throw fail("weights must be rank 2");
    if (dense->bias.size() != dense->out_features()) throw fail("bias length differs from row count");
    if (in.size() != 1) throw fail("expects a flat input");
    if (in[0] != dense->in_features()) throw fail("weight column count " + std::to_string(dense->in_features()) + " mismatch");
    return {dense->out_features()};
  }
  if (std::holds_alternative<Flatten>(layer)) return {shape_size(in)};
  if (const auto* drop = std::get_if<Dropout>(&layer)) {
    if (!(drop->rate >= 0.0 && drop->rate < 1.0)) throw fail("rate must lie in [0, 1)");
  }
  return in;
}

// ---- kernels ---------------------------------------------------------------

// Four independent partial sums; fixed order, so still deterministic.
inline double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline Tensor conv2d_forward(const Conv2D& conv, const Tensor& in) {
  const std::size_t C = in.extent(0), H = in.extent(1), W = in.extent(2);
  const std::size_t F = conv.filters(), KH = conv.kernel_h(), KW = conv.kernel_w();
  const std::size_t OH = H - KH + 1, OW = W - KW + 1;
  Tensor out({F, OH, OW});
  const double* x = in.data();
  const double* w = conv.weights.data();
  double* y = out.data();
  for (std::size_t f = 0; f < F; ++f) {
    double* yf = y + f * OH * OW;
    std::fill(yf, yf + OH * OW, conv.bias[f]);
    for (std::size_t c = 0; c < C; ++c) {
      const double* xc = x + c * H * W;
      for (std::size_t ky = 0; ky < KH; ++ky) {
        for (std::size_t kx = 0; kx < KW; ++kx) {
          const double wv = w[((f * C + c) * KH + ky) * KW + kx];
          for (std::size_t oy = 0; oy < OH; ++oy) {
            const double* xr = xc + (oy + ky) * W + kx;
            double* yr = yf + oy * OW;
            for (std::size_t ox = 0; ox < OW; ++ox) yr[ox] += wv * xr[ox];
          }
        }
      }
    }
  }
  return out;
}

// Accumulates weight/bias gradients; writes the input gradient when `din` is
// non-null (the first layer of a network does not need it).
inline void conv2d_backward(const Conv2D& conv, const Tensor& in, const Tensor& dout, Tensor* din,
                            std::span<double> dweights, std::span<double> dbias) {
  const std::size_t C = in.extent(0), H = in.extent(1), W = in.extent(2);
  const std::size_t F = conv.filters(), KH = conv.kernel_h(), KW = conv.kernel_w();
  const std::size_t OH = H - KH + 1, OW = W - KW + 1;
  const double* x = in.data();
  const double* g = dout.data();
  const double* w = conv.weights.data();
  if (din) {
    *din = Tensor(in.shape());
  }
  for (std::size_t f = 0; f < F; ++f) {
    const double* gf = g + f * OH * OW;
    double bsum = 0.0;
    for (std::size_t i = 0; i < OH * OW; ++i) bsum += gf[i];
    dbias[f] += bsum;
    for (std::size_t c = 0; c < C; ++c) {
      const double* xc = x + c * H * W;
      double* dxc = din ? din->data() + c * H * W : nullptr;
      for (std::size_t ky = 0; ky < KH; ++ky) {
        for (std::size_t kx = 0; kx < KW; ++kx) {
          const std::size_t widx = ((f * C + c) * KH + ky) * KW + kx;
          const double wv = w[widx];
          double acc = 0.0;
          for (std::size_t oy = 0; oy < OH; ++oy) {
            const double* xr = xc + (oy + ky) * W + kx;
            const double* gr = gf + oy * OW;
            acc += dot(gr, xr, OW);
            if (dxc) {
              double* dxr = dxc + (oy + ky) * W + kx;
              for (std::size_t ox = 0; ox < OW; ++ox) dxr[ox] += wv * gr[ox];
            }
          }
          dweights[widx] += acc;
        }
      }
    }
  }
}

// `argmax` receives, per output element, the flat input index of the winner
// (first maximum in row-major window order).
inline Tensor maxpool_forward(const MaxPool2D& pool, const Tensor& in, std::vector<std::size_t>* argmax) {
  const std::size_t C = in.extent(0), H = in.extent(1), W = in.extent(2), P = pool.size;
  const std::size_t OH = H / P, OW = W / P;
  Tensor out({C, OH, OW});
  if (argmax) argmax->assign(C * OH * OW, 0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        std::size_t best = (c * H + oy * P) * W + ox * P;
        double best_v = in[best];
        for (std::size_t dy = 0; dy < P; ++dy) {
          for (std::size_t dx = 0; dx < P; ++dx) {
            const std::size_t idx = (c * H + oy * P + dy) * W + ox * P + dx;
            if (in[idx] > best_v) {
              best_v = in[idx];
              best = idx;
            }
          }
        }
        const std::size_t o = (c * OH + oy) * OW + ox;
        out[o] = best_v;
        if (argmax) (*argmax)[o] = best;
      }
    }
  }
  return out;
}

inline Tensor maxpool_backward(const Shape& in_shape, const Tensor& dout, const std::vector<std::size_t>& argmax) {
  Tensor din(in_shape);
  for (std::size_t o = 0; o < dout.size(); ++o) din[argmax[o]] += dout[o];
  return din;
}

inline Tensor dense_forward(const Dense& dense, const Tensor& in) {
  const std::size_t O = dense.out_features(), I = dense.in_features();
  Tensor out({O});
  const double* w = dense.weights.data();
  const double* x = in.data();
  for (std::size_t o = 0; o < O; ++o) {
    const double* row = w + o * I;
    out[o] = dot(row, x, I) + dense.bias[o];
  }
  return out;
}

inline void dense_backward(const Dense& dense, const Tensor& in, const Tensor& dout, Tensor* din,
                           std::span<double> dweights, std::span<double> dbias) {
  const std::size_t O = dense.out_features(), I = dense.in_features();
  const double* w = dense.weights.data();
  const double* x = in.data();
  if (din) *din = Tensor(in.shape());
  for (std::size_t o = 0; o < O; ++o) {
    const double g = dout[o];
    dbias[o] += g;
    if (g == 0.0) continue;
    double* drow = dweights.data() + o * I;
    for (std::size_t i = 0; i < I; ++i) drow[i] += g * x[i];
    if (din) {
      const double* row = w + o * I;
      double* dx = din->data();
      for (std::size_t i = 0; i < I; ++i) dx[i] += g * row[i];
    }
  }
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline Tensor activation_forward(const Layer& layer, Tensor t) {
  if (std::holds_alternative<ReLU>(layer)) {
    for (double& v : t.values()) v = v > 0.0 ? v : 0.0;
  } else if (std::holds_alternative<Tanh>(layer)) {
    for (double& v : t.values()) v = std::tanh(v);
  } else if (std::holds_alternative<Sigmoid>(layer)) {
    for (double& v : t.values()) v = sigmoid(v);
  }
  return t;
}

// Gradient through an activation given its output.
inline Tensor activation_backward(const Layer& layer, const Tensor& out, Tensor dout) {
  auto g = dout.values();
  auto y = out.values();
  if (std::holds_alternative<ReLU>(layer)) {
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!(y[i] > 0.0)) g[i] = 0.0;
  } else if (std::holds_alternative<Tanh>(layer)) {
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - y[i] * y[i];
  } else if (std::holds_alternative<Sigmoid>(layer)) {
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= y[i] * (1.0 - y[i]);
  }
  return dout;
}

// Draws an inverted-dropout scale vector: 0 with probability `rate`,
// 1/(1-rate) otherwise.
inline std::vector<double> dropout_scales(std::size_t n, double rate, Rng& rng) {
  std::vector<double> scales(n);
  const double keep = 1.0 / (1.0 - rate);
  for (auto& s : scales) s = rng.bernoulli(rate) ? 0.0 : keep;
  return scales;
}

}  // namespace nnablate::nn
