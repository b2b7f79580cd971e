// Copyright 2026 The mlnpose Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "mlnpose/synth.hpp"
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mlnpose/errors.hpp"
#include "mlnpose/layer.hpp"
#include "mlnpose/ops.hpp"
#include "mlnpose/tensor.hpp"
#include "mlnpose/tensor_io.hpp"
#include "oracles.hpp"

namespace mlnpose {
namespace {

Tensor random_tensor(Shape s, std::mt19937& rng, float lo = -1.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> d(lo, hi);
  Tensor t(s);
  for (float& v : t.data()) v = d(rng);
  return t;
}

float max_abs_diff(const Tensor& a, const Tensor& b) {
  EXPECT_EQ(a.shape(), b.shape());
  float m = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

TEST(TensorTest, ConstructionChecksPayloadLength) {
  EXPECT_THROW(Tensor({1, 2, 3, 4}, std::vector<float>(23)), ShapeError);
  const Tensor t({1, 2, 3, 4}, std::vector<float>(24, 1.5f));
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.at(0, 1, 2, 3), 1.5f);
}

TEST(Conv2dTest, IdentityKernelReproducesInput) {
  std::mt19937 rng(1);
  const Tensor x = random_tensor({2, 5, 7, 9}, rng);
  Tensor w({5, 5, 1, 1});
  for (int c = 0; c < 5; ++c) w.at(c, c, 0, 0) = 1.0f;
  EXPECT_EQ(conv2d(x, w, {}), x);
}

TEST(Conv2dTest, OnesKernelSumsNeighbourhood) {
  const Tensor x({1, 1, 3, 3}, 1.0f);
  const Tensor w({1, 1, 3, 3}, 1.0f);
  const Tensor y = conv2d(x, w, {}, 1, 1);
  EXPECT_EQ(y.at(0, 0, 1, 1), 9.0f);
  EXPECT_EQ(y.at(0, 0, 0, 0), 4.0f);
}

TEST(Conv2dTest, MatchesNaiveReferenceOn200RandomShapes) {
  std::mt19937 rng(2026);
  std::uniform_int_distribution<int> cin(1, 12), cout(1, 19), hw(1, 14), k(1, 3), st(1, 2),
      pad(0, 2), batch(1, 2);
  int tested = 0;
  while (tested < 200) {
    const int kh = 2 * k(rng) - 1, kw = 2 * k(rng) - 1;
    const int s = st(rng), p = pad(rng);
    const Shape in{batch(rng), cin(rng), hw(rng), hw(rng)};
    if (in.h + 2 * p < kh || in.w + 2 * p < kw) continue;
    const Tensor x = random_tensor(in, rng);
    const Tensor w = random_tensor({cout(rng), in.c, kh, kw}, rng);
    std::vector<float> bias(static_cast<std::size_t>(w.shape().n));
    for (float& b : bias) b = std::uniform_real_distribution<float>(-1, 1)(rng);
    if (tested % 3 == 0) bias.clear();
    const Tensor got = conv2d(x, w, bias, s, p, 1 + tested % 3);
    const Tensor want = oracle::naive_conv2d(x, w, bias, s, p);
    ASSERT_LE(max_abs_diff(got, want), 1e-5f) << "case " << tested;
    ++tested;
  }
}

TEST(Conv2dTest, SpecExampleShapeMatchesReference) {
  std::mt19937 rng(8);
  const Tensor x = random_tensor({1, 8, 16, 16}, rng);
  const Tensor w = random_tensor({8, 8, 3, 3}, rng);
  const Tensor y = conv2d(x, w, {}, 1, 1);
  EXPECT_EQ(y.shape(), (Shape{1, 8, 16, 16}));
  EXPECT_LE(max_abs_diff(y, oracle::naive_conv2d(x, w, {}, 1, 1)), 1e-5f);
}

TEST(Conv2dTest, IsLinearWithoutBias) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape s{1, 6, 11, 13};
    const Tensor x = random_tensor(s, rng), y = random_tensor(s, rng);
    const Tensor w = random_tensor({10, 6, 3, 3}, rng);
    const float a = 1.7f, b = -0.6f;
    Tensor mix(s);
    for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = a * x.data()[i] + b * y.data()[i];
    const Tensor lhs = conv2d(mix, w, {}, 1, 1);
    const Tensor cx = conv2d(x, w, {}, 1, 1), cy = conv2d(y, w, {}, 1, 1);
    Tensor rhs(lhs.shape());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs.data()[i] = a * cx.data()[i] + b * cy.data()[i];
    EXPECT_LE(max_abs_diff(lhs, rhs), 1e-4f);
  }
}

TEST(Conv2dTest, ThreadCountDoesNotChangeBits) {
  std::mt19937 rng(4);
  const Tensor x = random_tensor({1, 20, 17, 23}, rng);
  const Tensor w = random_tensor({37, 20, 3, 3}, rng);
  const std::vector<float> bias(37, 0.25f);
  const Tensor one = conv2d(x, w, bias, 1, 1, 1);
  EXPECT_EQ(conv2d(x, w, bias, 1, 1, 3), one);
  EXPECT_EQ(conv2d(x, w, bias, 1, 1, 8), one);
  EXPECT_EQ(conv2d(x, w, bias, 1, 1, 1), one);
}

TEST(Conv2dTest, RejectsBadArguments) {
  const Tensor x({1, 3, 4, 4});
  EXPECT_THROW(conv2d(x, Tensor({2, 4, 3, 3}), {}), ShapeError);
  EXPECT_THROW(conv2d(x, Tensor({2, 3, 5, 5}), {}), ShapeError);
  const std::vector<float> short_bias(1);
  EXPECT_THROW(conv2d(x, Tensor({2, 3, 3, 3}), short_bias), ShapeError);
  EXPECT_THROW(conv2d(x, Tensor({2, 3, 3, 3}), {}, 0), ShapeError);
  EXPECT_THROW(conv2d(x, Tensor({2, 3, 3, 3}), {}, 1, -1), ShapeError);
}

TEST(ReluTest, ClampsNegatives) {
  const Tensor x({1, 1, 1, 3}, std::vector<float>{-1.0f, 0.0f, 2.0f});
  EXPECT_EQ(relu(x), Tensor({1, 1, 1, 3}, std::vector<float>{0.0f, 0.0f, 2.0f}));
  EXPECT_EQ(relu(Tensor({1, 2, 3, 3}, -4.0f)), Tensor({1, 2, 3, 3}, 0.0f));
  std::mt19937 rng(5);
  const Tensor r = relu(random_tensor({2, 3, 5, 5}, rng));
  EXPECT_EQ(relu(r), r);
}

TEST(MaxPoolTest, WindowMaxima) {
  EXPECT_EQ(maxpool2(Tensor({1, 2, 4, 6}, 3.5f)), Tensor({1, 2, 2, 3}, 3.5f));
  const Tensor block({1, 1, 2, 2}, std::vector<float>{1, 2, 3, 4});
  EXPECT_EQ(maxpool2(block).at(0, 0, 0, 0), 4.0f);
  EXPECT_THROW(maxpool2(Tensor({1, 1, 3, 4})), ShapeError);

  std::mt19937 rng(6);
  const Tensor x = random_tensor({2, 3, 8, 10}, rng);
  const Tensor y = maxpool2(x);
  for (int n = 0; n < 2; ++n)
    for (int c = 0; c < 3; ++c)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 5; ++j) {
          const float want = std::max({x.at(n, c, 2 * i, 2 * j), x.at(n, c, 2 * i, 2 * j + 1),
                                       x.at(n, c, 2 * i + 1, 2 * j),
                                       x.at(n, c, 2 * i + 1, 2 * j + 1)});
          EXPECT_EQ(y.at(n, c, i, j), want);
        }
}

TEST(ConcatTest, ChannelArithmeticAndRoundTrip) {
  std::mt19937 rng(7);
  const Tensor a = random_tensor({1, 128, 6, 7}, rng);
  const Tensor b = random_tensor({1, 38, 6, 7}, rng);
  EXPECT_EQ(concat_channels(std::vector<Tensor>{a}), a);
  const Tensor ab = concat_channels(std::vector<Tensor>{a, b});
  EXPECT_EQ(ab.shape().c, 166);
  EXPECT_EQ(slice_channels(ab, 0, 128), a);
  EXPECT_EQ(slice_channels(ab, 128, 38), b);
  EXPECT_THROW(concat_channels(std::vector<Tensor>{a, Tensor({1, 2, 6, 8})}), ShapeError);
}

TEST(LayerCountTest, ParameterFormula) {
  EXPECT_EQ(layer_param_count(make_conv("c", "in", 3, 128, 128)), 147584);
  EXPECT_EQ(layer_param_count(make_conv("c", "in", 3, 3, 64)), 1792);
  LayerSpec r;
  r.kind = LayerKind::kRelu;
  r.name = "r";
  r.inputs = {"c"};
  EXPECT_EQ(layer_param_count(r), 0);
}

TEST(LayerCountTest, FlopFormula) {
  EXPECT_EQ(layer_flop_count(make_conv("c", "in", 1, 1, 1, false), {1, 1, 1, 1}), 2);
  EXPECT_EQ(layer_flop_count(make_conv("c", "in", 1, 1, 1, false), {1, 1, 1, 1},
                             FlopConvention::kMac1),
            1);
  const LayerSpec c = make_conv("c", "in", 3, 128, 128, false);
  EXPECT_EQ(layer_flop_count(c, {1, 128, 46, 54}), 732561408);
  EXPECT_EQ(layer_flop_count(c, {1, 128, 92, 54}), 2 * layer_flop_count(c, {1, 128, 46, 54}));
  const LayerSpec cb = make_conv("c", "in", 3, 128, 128, true);
  EXPECT_EQ(layer_flop_count(cb, {1, 128, 46, 54}, FlopConvention::kMac1), 366598656);
}

TEST(TensorIoTest, RoundTripAndErrors) {
  std::mt19937 rng(9);
  const Tensor t = random_tensor({2, 3, 4, 5}, rng);
  const std::vector<char> bytes = encode_tensor(t);
  EXPECT_EQ(bytes.size(), 4 + 4 + 16 + 4 * t.size());
  EXPECT_EQ(decode_tensor(bytes), t);
  std::vector<char> bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_tensor(bad), FormatError);
  EXPECT_THROW(decode_tensor(std::span(bytes).first(bytes.size() - 1)), TruncatedError);
}

}  // namespace
}  // namespace mlnpose
