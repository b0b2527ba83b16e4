#pragma once

// Stateless forward/backward kernels. Image tensors are NHWC; a rank-3
// H x W x C input is treated as a batch of one and returned at rank 3.

#include <cstddef>
#include <string_view>

#include "csiloc/nn/tensor.hpp"
#include "csiloc/random.hpp"

namespace csiloc::nn {

enum class Mode { Train, Eval };

struct Stride {
  std::size_t h = 1;
  std::size_t w = 1;
};

/// o = (i - f) / s + 1 for a valid (unpadded) convolution. Throws ShapeError
/// naming `axis` when f > i or (i - f) is not a multiple of s.
std::size_t conv_output_size(std::size_t input, std::size_t filter, std::size_t stride,
                             std::string_view axis = "");

/// Cross-correlation. weights: f_h x f_w x C x F, bias: F.
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, Stride stride);

struct Conv2dGradients {
  Tensor input;  // empty when not requested
  Tensor weights;
  Tensor bias;
};

Conv2dGradients conv2d_backward(const Tensor& input, const Tensor& weights, Stride stride,
                                const Tensor& grad_output, bool want_input_grad = true);

/// y = W x + b per row of a B x n input (or a single n-vector); W is m x n.
Tensor fully_connected(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct DenseGradients {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

DenseGradients fully_connected_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_output,
                                        bool want_input_grad = true);

/// x for x >= 0, gamma * x otherwise. The derivative at 0 is taken as 1.
Tensor leaky_relu(const Tensor& x, double gamma);
Tensor leaky_relu_backward(const Tensor& x, const Tensor& grad_output, double gamma);

/// Softmax over the last axis with max subtraction.
Tensor softmax(const Tensor& x);
/// Jacobian-vector product given the softmax output y.
Tensor softmax_backward(const Tensor& y, const Tensor& grad_output);

struct DropoutResult {
  Tensor output;
  Tensor mask;  // 0 or 1 / (1 - p); empty in Eval mode or when p == 0
};

/// Inverted dropout: zero with probability p, scale survivors by 1 / (1 - p).
DropoutResult dropout(const Tensor& x, double p, Mode mode, Rng& rng);
Tensor dropout_backward(const Tensor& grad_output, const Tensor& mask);

}  // namespace csiloc::nn
