#include "csiloc/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csiloc/error.hpp"
#include "gemm.hpp"

namespace csiloc::nn {
namespace {

struct ConvGeometry {
  std::size_t batch, in_h, in_w, channels;
  std::size_t filter_h, filter_w, filters;
  std::size_t out_h, out_w;
  Stride stride;

  std::size_t rows() const { return batch * out_h * out_w; }
  std::size_t patch() const { return filter_h * filter_w * channels; }
};

ConvGeometry conv_geometry(const Tensor& input, const Tensor& weights, Stride stride) {
  if (input.rank() != 3 && input.rank() != 4)
    throw ShapeError("conv2d input must be HxWxC or NxHxWxC, got " + to_string(input.shape()));
  if (weights.rank() != 4) throw ShapeError("conv2d weights must be fh x fw x C x F, got " + to_string(weights.shape()));
  if (stride.h == 0 || stride.w == 0) throw ShapeError("conv2d stride must be positive");
  const std::size_t off = input.rank() == 4 ? 1 : 0;
  ConvGeometry g{};
  g.batch = off ? input.dim(0) : 1;
  g.in_h = input.dim(off);
  g.in_w = input.dim(off + 1);
  g.channels = input.dim(off + 2);
  g.filter_h = weights.dim(0);
  g.filter_w = weights.dim(1);
  g.filters = weights.dim(3);
  g.stride = stride;
  if (weights.dim(2) != g.channels)
    throw ShapeError("conv2d weights expect " + std::to_string(weights.dim(2)) + " channels, input has " +
                     std::to_string(g.channels));
  g.out_h = conv_output_size(g.in_h, g.filter_h, stride.h, "height");
  g.out_w = conv_output_size(g.in_w, g.filter_w, stride.w, "width");
  return g;
}

Shape conv_output_shape(const Tensor& input, const ConvGeometry& g) {
  if (input.rank() == 3) return {g.out_h, g.out_w, g.filters};
  return {g.batch, g.out_h, g.out_w, g.filters};
}

// rows x patch matrix of receptive fields; (kh, kw, c) order matches weights.
std::vector<double> im2col(const Tensor& input, const ConvGeometry& g) {
  std::vector<double> col(g.rows() * g.patch());
  const std::size_t span = g.filter_w * g.channels;
  const double* src = input.data();
  double* dst = col.data();
  for (std::size_t n = 0; n < g.batch; ++n)
    for (std::size_t oh = 0; oh < g.out_h; ++oh)
      for (std::size_t ow = 0; ow < g.out_w; ++ow)
        for (std::size_t kh = 0; kh < g.filter_h; ++kh) {
          const std::size_t ih = oh * g.stride.h + kh;
          const double* row = src + ((n * g.in_h + ih) * g.in_w + ow * g.stride.w) * g.channels;
          dst = std::copy(row, row + span, dst);
        }
  return col;
}

void col2im_add(const std::vector<double>& col, const ConvGeometry& g, Tensor& grad_input) {
  const std::size_t span = g.filter_w * g.channels;
  const double* src = col.data();
  double* dst = grad_input.data();
  for (std::size_t n = 0; n < g.batch; ++n)
    for (std::size_t oh = 0; oh < g.out_h; ++oh)
      for (std::size_t ow = 0; ow < g.out_w; ++ow)
        for (std::size_t kh = 0; kh < g.filter_h; ++kh) {
          const std::size_t ih = oh * g.stride.h + kh;
          double* row = dst + ((n * g.in_h + ih) * g.in_w + ow * g.stride.w) * g.channels;
          for (std::size_t t = 0; t < span; ++t) row[t] += src[t];
          src += span;
        }
}

void add_bias_rows(double* out, std::size_t rows, const Tensor& bias) {
  const std::size_t n = bias.size();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t q = 0; q < n; ++q) out[r * n + q] = bias[q];
}

void sum_rows(const double* grad, std::size_t rows, std::size_t cols, Tensor& out) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t q = 0; q < cols; ++q) out[q] += grad[r * cols + q];
}

}  // namespace

std::size_t conv_output_size(std::size_t input, std::size_t filter, std::size_t stride, std::string_view axis) {
  const std::string where = axis.empty() ? std::string() : " along " + std::string(axis);
  if (filter < 1 || stride < 1) throw ShapeError("filter and stride must be >= 1" + where);
  if (filter > input)
    throw ShapeError("filter " + std::to_string(filter) + " exceeds input " + std::to_string(input) + where);
  if ((input - filter) % stride != 0)
    throw ShapeError("(input - filter) = " + std::to_string(input - filter) + " is not divisible by stride " +
                     std::to_string(stride) + where);
  return (input - filter) / stride + 1;
}

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, Stride stride) {
  const ConvGeometry g = conv_geometry(input, weights, stride);
  if (bias.size() != g.filters)
    throw ShapeError("conv2d bias has " + std::to_string(bias.size()) + " entries for " +
                     std::to_string(g.filters) + " filters");
  Tensor out(conv_output_shape(input, g));
  add_bias_rows(out.data(), g.rows(), bias);
  const std::vector<double> col = im2col(input, g);
  detail::gemm_acc(false, false, g.rows(), g.filters, g.patch(), col.data(), g.patch(), weights.data(), g.filters,
                   out.data(), g.filters);
  return out;
}

Conv2dGradients conv2d_backward(const Tensor& input, const Tensor& weights, Stride stride,
                                const Tensor& grad_output, bool want_input_grad) {
  const ConvGeometry g = conv_geometry(input, weights, stride);
  if (grad_output.size() != g.rows() * g.filters)
    throw ShapeError("conv2d gradient has shape " + to_string(grad_output.shape()));

  Conv2dGradients grads;
  grads.bias = Tensor({g.filters});
  sum_rows(grad_output.data(), g.rows(), g.filters, grads.bias);

  const std::vector<double> col = im2col(input, g);
  grads.weights = Tensor(weights.shape());
  detail::gemm_acc(true, false, g.patch(), g.filters, g.rows(), col.data(), g.patch(), grad_output.data(), g.filters,
                   grads.weights.data(), g.filters);

  if (want_input_grad) {
    std::vector<double> grad_col(col.size(), 0.0);
    detail::gemm_acc(false, true, g.rows(), g.patch(), g.filters, grad_output.data(), g.filters, weights.data(),
                     g.filters, grad_col.data(), g.patch());
    grads.input = Tensor(input.shape());
    col2im_add(grad_col, g, grads.input);
  }
  return grads;
}

Tensor fully_connected(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (weights.rank() != 2) throw ShapeError("dense weights must be m x n, got " + to_string(weights.shape()));
  const std::size_t m = weights.dim(0);
  const std::size_t n = weights.dim(1);
  if (bias.size() != m) throw ShapeError("dense bias must have " + std::to_string(m) + " entries");
  const bool single = input.rank() == 1;
  if (!single && input.rank() != 2) throw ShapeError("dense input must be n or B x n, got " + to_string(input.shape()));
  const std::size_t batch = single ? 1 : input.dim(0);
  if ((single ? input.dim(0) : input.dim(1)) != n)
    throw ShapeError("dense layer expects " + std::to_string(n) + " inputs, got shape " + to_string(input.shape()));

  Tensor out(single ? Shape{m} : Shape{batch, m});
  add_bias_rows(out.data(), batch, bias);
  detail::gemm_acc(false, true, batch, m, n, input.data(), n, weights.data(), n, out.data(), m);
  return out;
}

DenseGradients fully_connected_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_output,
                                        bool want_input_grad) {
  const std::size_t m = weights.dim(0);
  const std::size_t n = weights.dim(1);
  const std::size_t batch = input.size() / n;
  if (input.size() != batch * n || grad_output.size() != batch * m)
    throw ShapeError("dense gradient shapes disagree: input " + to_string(input.shape()) + ", grad " +
                     to_string(grad_output.shape()));
  DenseGradients grads;
  grads.bias = Tensor({m});
  sum_rows(grad_output.data(), batch, m, grads.bias);

  grads.weights = Tensor({m, n});
  detail::gemm_acc(true, false, m, n, batch, grad_output.data(), m, input.data(), n, grads.weights.data(), n);

  if (want_input_grad) {
    grads.input = Tensor(input.shape());
    detail::gemm_acc(false, false, batch, n, m, grad_output.data(), m, weights.data(), n, grads.input.data(), n);
  }
  return grads;
}

Tensor leaky_relu(const Tensor& x, double gamma) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] >= 0.0 ? x[i] : gamma * x[i];
  return y;
}

Tensor leaky_relu_backward(const Tensor& x, const Tensor& grad_output, double gamma) {
  if (x.size() != grad_output.size()) throw ShapeError("leaky ReLU gradient shape mismatch");
  Tensor g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] >= 0.0 ? grad_output[i] : gamma * grad_output[i];
  return g;
}

Tensor softmax(const Tensor& x) {
  if (x.rank() == 0 || x.empty()) throw ShapeError("softmax of an empty tensor");
  const std::size_t cols = x.shape().back();
  const std::size_t rows = x.size() / cols;
  Tensor y(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.data() + r * cols;
    double* out = y.data() + r * cols;
    const double peak = *std::max_element(in, in + cols);
    double sum = 0.0;
    for (std::size_t q = 0; q < cols; ++q) sum += out[q] = std::exp(in[q] - peak);
    for (std::size_t q = 0; q < cols; ++q) out[q] /= sum;
  }
  return y;
}

Tensor softmax_backward(const Tensor& y, const Tensor& grad_output) {
  if (y.size() != grad_output.size()) throw ShapeError("softmax gradient shape mismatch");
  const std::size_t cols = y.shape().back();
  const std::size_t rows = y.size() / cols;
  Tensor g(y.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* yr = y.data() + r * cols;
    const double* gr = grad_output.data() + r * cols;
    double dot = 0.0;
    for (std::size_t q = 0; q < cols; ++q) dot += yr[q] * gr[q];
    for (std::size_t q = 0; q < cols; ++q) g[r * cols + q] = yr[q] * (gr[q] - dot);
  }
  return g;
}

DropoutResult dropout(const Tensor& x, double p, Mode mode, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("dropout probability must lie in [0, 1)");
  if (mode == Mode::Eval || p == 0.0) return {x, Tensor()};
  DropoutResult r{Tensor(x.shape()), Tensor(x.shape())};
  const double keep_scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = uniform01(rng) < p ? 0.0 : keep_scale;
    r.mask[i] = m;
    r.output[i] = x[i] * m;
  }
  return r;
}

Tensor dropout_backward(const Tensor& grad_output, const Tensor& mask) {
  if (mask.empty()) return grad_output;
  if (mask.size() != grad_output.size()) throw ShapeError("dropout gradient shape mismatch");
  Tensor g(grad_output.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = grad_output[i] * mask[i];
  return g;
}

}  // namespace csiloc::nn
