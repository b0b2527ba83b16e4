#include <gtest/gtest.h>

#include <cmath>

#include "csiloc/error.hpp"
#include "csiloc/nn/adam.hpp"
#include "csiloc/nn/loss.hpp"
#include "csiloc/nn/ops.hpp"
#include "support/oracles.hpp"

using namespace csiloc;
using namespace csiloc::nn;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> normal;
  for (double& v : t.values()) v = scale * normal(rng);
  return t;
}

Tensor with_values(const Tensor& like, std::span<const double> values) {
  return Tensor(like.shape(), std::vector<double>(values.begin(), values.end()));
}

std::vector<double> as_vector(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

// Scalar objective <r, f(x)> whose gradient wrt f's output is r.
double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void expect_gradients_match(const Tensor& analytic, const std::vector<double>& numeric, double tol = 1e-4) {
  ASSERT_EQ(analytic.size(), numeric.size());
  for (std::size_t i = 0; i < numeric.size(); ++i)
    EXPECT_LT(oracle::relative_error(analytic[i], numeric[i], 1e-6), tol) << "index " << i;
}

}  // namespace

TEST(ConvOutputSize, Formula) {
  EXPECT_EQ(conv_output_size(56, 4, 4), 14u);
  EXPECT_EQ(conv_output_size(9, 4, 1), 6u);
  EXPECT_EQ(conv_output_size(6, 4, 2), 2u);
  try {
    conv_output_size(7, 4, 2, "width");
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("width"), std::string::npos);
  }
  EXPECT_THROW(conv_output_size(3, 4, 1), ShapeError);
}

TEST(Conv2d, IdentityFilter) {
  Rng rng(1);
  const Tensor x = random_tensor({4, 5, 1}, rng);
  const Tensor y = conv2d(x, Tensor({1, 1, 1, 1}, 1.0), Tensor({1}), {1, 1});
  EXPECT_EQ(y, x);
}

TEST(Conv2d, FirstLayerShape) {
  Rng rng(2);
  const Tensor y = conv2d(random_tensor({9, 56, 1}, rng), random_tensor({4, 4, 1, 32}, rng), Tensor({32}), {1, 4});
  EXPECT_EQ(y.shape(), (Shape{6, 14, 32}));
}

TEST(Conv2d, MatchesLoopOracle) {
  Rng rng(3);
  struct Case {
    Shape in;
    std::size_t fh, fw, f, sh, sw;
  } cases[] = {{{5, 5, 2}, 2, 2, 3, 1, 1}, {{9, 56, 4}, 4, 4, 6, 1, 4}, {{6, 14, 3}, 4, 4, 5, 1, 2}, {{7, 9, 1}, 3, 3, 2, 2, 3}};
  for (const auto& c : cases) {
    const Tensor x = random_tensor(c.in, rng);
    const Tensor w = random_tensor({c.fh, c.fw, c.in[2], c.f}, rng);
    const Tensor b = random_tensor({c.f}, rng);
    const Tensor got = conv2d(x, w, b, {c.sh, c.sw});
    const Tensor want = oracle::conv2d_loops(x, w, b, c.sh, c.sw);
    ASSERT_EQ(got.shape(), want.shape());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
  }
}

TEST(Conv2d, BatchedEqualsPerSample) {
  Rng rng(4);
  const Tensor x = random_tensor({3, 6, 8, 2}, rng);
  const Tensor w = random_tensor({3, 2, 2, 4}, rng);
  const Tensor b = random_tensor({4}, rng);
  const Tensor y = conv2d(x, w, b, {1, 2});
  const std::size_t per_in = 6 * 8 * 2, per_out = y.size() / 3;
  for (std::size_t n = 0; n < 3; ++n) {
    const Tensor xs({6, 8, 2}, std::vector<double>(x.values().begin() + n * per_in, x.values().begin() + (n + 1) * per_in));
    const Tensor ys = oracle::conv2d_loops(xs, w, b, 1, 2);
    for (std::size_t i = 0; i < per_out; ++i) EXPECT_NEAR(y[n * per_out + i], ys[i], 1e-12);
  }
}

TEST(Conv2d, GradientsMatchFiniteDifferences) {
  Rng rng(5);
  const Tensor x = random_tensor({5, 5, 2}, rng);
  const Tensor w = random_tensor({2, 2, 2, 3}, rng);
  const Tensor b = random_tensor({3}, rng);
  const Stride s{1, 1};
  const Tensor r = random_tensor({4, 4, 3}, rng);
  const Conv2dGradients g = conv2d_backward(x, w, s, r);

  expect_gradients_match(g.input, oracle::numeric_gradient(
                                      [&](std::span<const double> v) { return dot(r, conv2d(with_values(x, v), w, b, s)); },
                                      as_vector(x)));
  expect_gradients_match(g.weights, oracle::numeric_gradient(
                                        [&](std::span<const double> v) { return dot(r, conv2d(x, with_values(w, v), b, s)); },
                                        as_vector(w)));
  expect_gradients_match(g.bias, oracle::numeric_gradient(
                                     [&](std::span<const double> v) { return dot(r, conv2d(x, w, with_values(b, v), s)); },
                                     as_vector(b)));
}

TEST(Conv2d, StridedGradients) {
  Rng rng(6);
  const Tensor x = random_tensor({2, 6, 8, 2}, rng);
  const Tensor w = random_tensor({4, 4, 2, 3}, rng);
  const Tensor b = random_tensor({3}, rng);
  const Stride s{1, 2};
  const Tensor r = random_tensor({2, 3, 3, 3}, rng);
  const Conv2dGradients g = conv2d_backward(x, w, s, r);
  expect_gradients_match(g.input, oracle::numeric_gradient(
                                      [&](std::span<const double> v) { return dot(r, conv2d(with_values(x, v), w, b, s)); },
                                      as_vector(x)));
  expect_gradients_match(g.weights, oracle::numeric_gradient(
                                        [&](std::span<const double> v) { return dot(r, conv2d(x, with_values(w, v), b, s)); },
                                        as_vector(w)));
  EXPECT_TRUE(conv2d_backward(x, w, s, r, false).input.empty());
}

// Convolution is bilinear, so <r, conv(x, w)> = <dL/dx, x> = <dL/dw, w> with
// zero bias. Checked at the full-size layer shapes, where the matrix products
// are large enough to take different kernel paths than the small cases.
TEST(Conv2d, AdjointIdentityAtNetworkSizes) {
  Rng rng(12);
  struct Case {
    Shape in;
    std::size_t f, fh, fw, sh, sw;
  } cases[] = {{{2, 9, 56, 1}, 32, 4, 4, 1, 4}, {{2, 6, 14, 32}, 64, 4, 4, 1, 2}, {{2, 3, 6, 64}, 128, 3, 3, 1, 1}};
  for (const auto& c : cases) {
    const Tensor x = random_tensor(c.in, rng);
    const Tensor w = random_tensor({c.fh, c.fw, c.in[3], c.f}, rng);
    const Tensor y = conv2d(x, w, Tensor({c.f}), {c.sh, c.sw});
    const Tensor r = random_tensor(y.shape(), rng);
    const Conv2dGradients g = conv2d_backward(x, w, {c.sh, c.sw}, r);
    const double ry = dot(r, y);
    EXPECT_NEAR(dot(g.input, x), ry, 1e-10 * std::fabs(ry) + 1e-9);
    EXPECT_NEAR(dot(g.weights, w), ry, 1e-10 * std::fabs(ry) + 1e-9);
    // Spot-check single input gradients by central differences.
    for (int probe = 0; probe < 20; ++probe) {
      const std::size_t i = rng() % x.size();
      Tensor xp = x, xm = x;
      xp[i] += 1e-4;
      xm[i] -= 1e-4;
      const double fd = (dot(r, conv2d(xp, w, Tensor({c.f}), {c.sh, c.sw})) -
                         dot(r, conv2d(xm, w, Tensor({c.f}), {c.sh, c.sw}))) / 2e-4;
      EXPECT_NEAR(g.input[i], fd, 1e-6 * std::max(1.0, std::fabs(fd)));
    }
  }
}

TEST(Conv2d, ShapeErrors) {
  EXPECT_THROW(conv2d(Tensor({5, 5, 2}), Tensor({2, 2, 3, 1}), Tensor({1}), {1, 1}), ShapeError);
  EXPECT_THROW(conv2d(Tensor({5, 5, 1}), Tensor({2, 2, 1, 2}), Tensor({3}), {1, 1}), ShapeError);
  EXPECT_THROW(conv2d(Tensor({5, 6, 1}), Tensor({2, 2, 1, 1}), Tensor({1}), {1, 3}), ShapeError);
}

TEST(Dense, IdentityAndConstant) {
  Rng rng(7);
  const Tensor x = random_tensor({4}, rng);
  Tensor eye({4, 4});
  for (std::size_t i = 0; i < 4; ++i) eye[i * 4 + i] = 1.0;
  EXPECT_EQ(fully_connected(x, eye, Tensor({4})), x);
  const Tensor c({3}, std::vector<double>{1.5, -2.0, 0.25});
  EXPECT_EQ(fully_connected(x, Tensor({3, 4}), c), c);
  EXPECT_THROW(fully_connected(x, Tensor({3, 5}), c), ShapeError);
}

TEST(Dense, GradientsMatchFiniteDifferences) {
  Rng rng(8);
  const Tensor x = random_tensor({3, 8}, rng);
  const Tensor w = random_tensor({5, 8}, rng);
  const Tensor b = random_tensor({5}, rng);
  const Tensor r = random_tensor({3, 5}, rng);
  const DenseGradients g = fully_connected_backward(x, w, r);
  expect_gradients_match(g.input, oracle::numeric_gradient(
                                      [&](std::span<const double> v) { return dot(r, fully_connected(with_values(x, v), w, b)); },
                                      as_vector(x)));
  expect_gradients_match(g.weights, oracle::numeric_gradient(
                                        [&](std::span<const double> v) { return dot(r, fully_connected(x, with_values(w, v), b)); },
                                        as_vector(w)));
  expect_gradients_match(g.bias, oracle::numeric_gradient(
                                     [&](std::span<const double> v) { return dot(r, fully_connected(x, w, with_values(b, v))); },
                                     as_vector(b)));
}

TEST(LeakyRelu, ValuesAndDerivative) {
  const Tensor x({3}, std::vector<double>{2.0, -1.0, 0.0});
  const Tensor y = leaky_relu(x, 0.01);
  EXPECT_EQ(y[0], 2.0);
  EXPECT_DOUBLE_EQ(y[1], -0.01);
  EXPECT_EQ(y[2], 0.0);
  const Tensor g = leaky_relu_backward(x, Tensor({3}, 1.0), 0.01);
  EXPECT_EQ(g[0], 1.0);
  EXPECT_EQ(g[1], 0.01);
  EXPECT_EQ(g[2], 1.0);
}

TEST(Softmax, Values) {
  const Tensor u = softmax(Tensor({3}, 0.0));
  for (double v : u.values()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  const Tensor p = softmax(Tensor({3}, std::vector<double>{std::log(1.0), std::log(2.0), std::log(3.0)}));
  EXPECT_NEAR(p[0], 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(p[1], 2.0 / 6.0, 1e-12);
  EXPECT_NEAR(p[2], 3.0 / 6.0, 1e-12);
}

TEST(Softmax, ShiftInvariantAndNormalized) {
  Rng rng(9);
  const Tensor x = random_tensor({4, 63}, rng, 5.0);
  Tensor shifted = x;
  for (double& v : shifted.values()) v += 700.0;
  const Tensor a = softmax(x), b = softmax(shifted);
  for (std::size_t r = 0; r < 4; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 63; ++c) {
      EXPECT_GE(a[r * 63 + c], 0.0);
      EXPECT_NEAR(a[r * 63 + c], b[r * 63 + c], 1e-12);
      s += a[r * 63 + c];
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Softmax, BackwardMatchesFiniteDifferences) {
  Rng rng(10);
  const Tensor x = random_tensor({2, 5}, rng);
  const Tensor r = random_tensor({2, 5}, rng);
  const Tensor g = softmax_backward(softmax(x), r);
  expect_gradients_match(g, oracle::numeric_gradient(
                                [&](std::span<const double> v) { return dot(r, softmax(with_values(x, v))); },
                                as_vector(x)));
}

TEST(Dropout, EvalAndZeroAreIdentity) {
  Rng rng(11);
  const Tensor x = random_tensor({50}, rng);
  EXPECT_EQ(dropout(x, 0.4, Mode::Eval, rng).output, x);
  EXPECT_EQ(dropout(x, 0.0, Mode::Train, rng).output, x);
}

TEST(Dropout, InvertedScaling) {
  Rng rng(12);
  const auto r = dropout(Tensor({100000}, 1.0), 0.4, Mode::Train, rng);
  double sum = 0.0;
  std::size_t zeros = 0;
  for (double v : r.output.values()) {
    sum += v;
    if (v == 0.0) ++zeros;
    else EXPECT_DOUBLE_EQ(v, 1.0 / 0.6);
  }
  EXPECT_NEAR(sum / 1e5, 1.0, 0.02);
  EXPECT_NEAR(zeros / 1e5, 0.4, 0.02);
  const Tensor g = dropout_backward(Tensor({100000}, 1.0), r.mask);
  EXPECT_EQ(g, r.output);
}

TEST(Dropout, SeedDetermined) {
  Rng a(3), b(3);
  EXPECT_EQ(dropout(Tensor({64}, 1.0), 0.4, Mode::Train, a).output,
            dropout(Tensor({64}, 1.0), 0.4, Mode::Train, b).output);
  EXPECT_THROW(dropout(Tensor({4}, 1.0), 1.0, Mode::Train, a), DomainError);
}

TEST(Loss, MseValues) {
  const Tensor t({1, 2}, std::vector<double>{1.0, 2.0});
  EXPECT_EQ(mse_loss_2d(t, t).value, 0.0);
  EXPECT_NEAR(mse_loss_2d(Tensor({1, 2}, std::vector<double>{1.3, 2.4}), t).value, 0.25, 1e-12);
  EXPECT_THROW(mse_loss_2d(Tensor({1, 3}), Tensor({1, 3})), ShapeError);
  EXPECT_THROW(mse_loss_2d(Tensor({2, 2}), Tensor({1, 2})), ShapeError);
}

TEST(Loss, MseGradient) {
  Rng rng(13);
  const Tensor p = random_tensor({4, 2}, rng), t = random_tensor({4, 2}, rng);
  const Tensor g = mse_loss_2d(p, t).grad;
  expect_gradients_match(g, oracle::numeric_gradient(
                                [&](std::span<const double> v) { return mse_loss_2d(with_values(p, v), t).value; },
                                as_vector(p)));
}

TEST(Loss, CrossEntropyValues) {
  Tensor onehot({1, 63});
  onehot[5] = 1.0;
  Tensor certain({1, 63});
  certain[5] = 1.0;
  EXPECT_EQ(cross_entropy_loss(certain, onehot).value, 0.0);
  EXPECT_NEAR(cross_entropy_loss(Tensor({1, 63}, 1.0 / 63.0), onehot).value, std::log(63.0), 1e-12);
  EXPECT_NEAR(cross_entropy_loss(Tensor({1, 63}, 0.0), onehot).value, -std::log(kProbabilityFloor), 1e-9);
}

TEST(Loss, CrossEntropyFusedGradient) {
  Rng rng(14);
  const Tensor z = random_tensor({3, 6}, rng);
  Tensor t({3, 6});
  t[2] = t[6 + 0] = t[12 + 5] = 1.0;
  const Tensor p = softmax(z);
  const LossResult l = cross_entropy_loss(p, t);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(l.grad[i], (p[i] - t[i]) / 3.0, 1e-15);
  expect_gradients_match(l.grad, oracle::numeric_gradient(
                                     [&](std::span<const double> v) { return cross_entropy_loss(softmax(with_values(z, v)), t).value; },
                                     as_vector(z)));
}

TEST(Adam, ZeroGradientIsIdentity) {
  Tensor theta({3}, std::vector<double>{1.0, -2.0, 0.5});
  const Tensor before = theta;
  const Tensor grad({3});
  AdamState state(AdamConfig{}, {theta.shape()});
  Tensor* params[] = {&theta};
  const Tensor* grads[] = {&grad};
  for (int i = 0; i < 3; ++i) adam_step(params, grads, state);
  EXPECT_EQ(theta, before);
}

TEST(Adam, ScalarTwoStepTrace) {
  Tensor theta({1}, 0.0);
  const Tensor grad({1}, 1.0);
  AdamState state(AdamConfig{}, {theta.shape()});
  Tensor* params[] = {&theta};
  const Tensor* grads[] = {&grad};
  const double gs[] = {1.0, 1.0};
  const auto want = oracle::scalar_adam(0.0, gs, 1e-3, 0.9, 0.999, 1e-8);

  adam_step(params, grads, state);
  EXPECT_NEAR(state.first_moment()[0][0], 0.1, 1e-15);
  EXPECT_NEAR(state.second_moment()[0][0], 0.001, 1e-15);
  EXPECT_NEAR(theta[0], -0.0031623, 1e-7);
  EXPECT_NEAR(theta[0], want.theta[0], 1e-12);

  adam_step(params, grads, state);
  EXPECT_NEAR(state.first_moment()[0][0], 0.19, 1e-12);
  EXPECT_NEAR(state.second_moment()[0][0], 0.001999, 1e-12);
  EXPECT_NEAR(theta[0], want.theta[0] - 1e-3 * 0.19 / 0.0447102, 1e-7);
  EXPECT_NEAR(theta[0], want.theta[1], 1e-12);
  EXPECT_EQ(state.step(), 2u);
}

TEST(Adam, BiasCorrectionFirstStepIsEta) {
  Tensor theta({1}, 0.0);
  const Tensor grad({1}, 0.37);
  AdamConfig cfg;
  cfg.bias_correction = true;
  AdamState state(cfg, {theta.shape()});
  Tensor* params[] = {&theta};
  const Tensor* grads[] = {&grad};
  adam_step(params, grads, state);
  EXPECT_NEAR(theta[0], -1e-3, 1e-10);
}

TEST(Adam, Errors) {
  AdamConfig bad;
  bad.beta1 = 1.0;
  EXPECT_THROW(AdamState(bad, {}), DomainError);
  Tensor theta({2});
  const Tensor grad({3});
  AdamState state(AdamConfig{}, {theta.shape()});
  Tensor* params[] = {&theta};
  const Tensor* grads[] = {&grad};
  EXPECT_THROW(adam_step(params, grads, state), ShapeError);
}
