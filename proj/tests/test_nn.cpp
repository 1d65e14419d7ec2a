#include <cstdio>
#include <random>

#include "doctest.h"
#include "edgesim/model_io.hpp"
#include "edgesim/nn.hpp"
#include "edgesim/numeric.hpp"

using namespace edgesim;

namespace {

QuantParams per_tensor(double s) {
  QuantParams qp;
  qp.granularity = Granularity::per_tensor;
  qp.scales.resize(1);
  qp.scales[0] = s;
  return qp;
}

// Naive float convolution oracle, independent of the integer kernel.
// Works on dequantized operands and requantizes the float accumulator.
std::vector<std::int8_t> float_conv_oracle(const QuantizedTensor& in, const QuantizedTensor& w,
                                           const std::vector<std::int32_t>& bias, double s_out,
                                           int stride, bool depthwise, bool relu) {
  const int ic = in.shape[0], ih = in.shape[1], iw = in.shape[2];
  const int oc = w.shape[0], icg = w.shape[1], k = w.shape[2];
  const int pad = (k - 1) / 2;
  const int oh = (ih + stride - 1) / stride, ow = (iw + stride - 1) / stride;
  const double s_in = in.qparams.scale_for(0);
  std::vector<std::int8_t> out(static_cast<size_t>(oc) * oh * ow);
  for (int o = 0; o < oc; ++o) {
    const double s_w = w.qparams.scale_for(o);
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double acc = static_cast<double>(bias[o]) * s_in * s_w;
        for (int g = 0; g < icg; ++g) {
          const int c = depthwise ? o : g;
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const int yy = y * stride - pad + ky;
              const int xx = x * stride - pad + kx;
              if (yy < 0 || yy >= ih || xx < 0 || xx >= iw) continue;
              const double iv = in.data[(static_cast<std::int64_t>(c) * ih + yy) * iw + xx] * s_in;
              const double wv = w.data[((static_cast<std::int64_t>(o) * icg + g) * k + ky) * k + kx] * s_w;
              acc += iv * wv;
            }
          }
        }
        std::int8_t q = quantize_value(acc, s_out);
        if (relu && q < 0) q = 0;
        out[(static_cast<size_t>(o) * oh + y) * ow + x] = q;
      }
    }
  }
  (void)ic;
  return out;
}

RgbImage random_image(int side, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> px(0, 255);
  RgbImage img;
  for (auto& p : img.planes) {
    p.resize(side, side);
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) p(y, x) = static_cast<std::uint8_t>(px(rng));
    }
  }
  return img;
}

}  // namespace

TEST_CASE("requantization: unit multiplier is a clamp, halves tie to even") {
  const Requant one = fold_multiplier(1.0);
  CHECK(requantize(100, one) == 100);
  CHECK(requantize(-300, one) == -127);
  CHECK(requantize(300, one) == 127);

  const Requant half = fold_multiplier(0.5);
  CHECK(requantize(3, half) == 2);   // 1.5
  CHECK(requantize(5, half) == 2);   // 2.5
  CHECK(requantize(-3, half) == -2); // -1.5
}

TEST_CASE("conv2d_int8: identity 1x1 kernel reproduces the input") {
  QuantizedTensor in;
  in.shape = {2, 3, 3};
  in.qparams = per_tensor(0.05);
  in.data.resize(18);
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> v(-127, 127);
  for (auto& q : in.data) q = static_cast<std::int8_t>(v(rng));

  QuantizedTensor w;  // identity: w[oc][ic] = (oc == ic) quantized at max-abs 1.0
  w.shape = {2, 2, 1, 1};
  w.qparams.granularity = Granularity::per_channel;
  w.qparams.scales.resize(2);
  w.qparams.scales << 1.0 / 127.0, 1.0 / 127.0;
  w.data.resize(4);
  w.data << 127, 0, 0, 127;

  const auto out = conv2d_int8(in, w, {0, 0}, per_tensor(0.05), 1);
  CHECK((out.data == in.data).all());
}

TEST_CASE("conv2d_int8: zero input leaves only the requantized bias") {
  QuantizedTensor in;
  in.shape = {1, 2, 2};
  in.qparams = per_tensor(0.1);
  in.data = decltype(in.data)::Zero(4);

  QuantizedTensor w;
  w.shape = {1, 1, 1, 1};
  w.qparams.granularity = Granularity::per_channel;
  w.qparams.scales.resize(1);
  w.qparams.scales[0] = 1.0 / 127.0;
  w.data.resize(1);
  w.data[0] = 127;

  // bias 254 at scale s_in*s_w: requantized by M = s_in*s_w/s_out = 1/127 -> 2
  const auto out = conv2d_int8(in, w, {254}, per_tensor(0.1), 1);
  CHECK((out.data == 2).all());
}

TEST_CASE("conv2d_int8 matches the float oracle within one LSB") {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> dims(3, 9), chans(1, 6), kk(0, 1), ss(1, 2), dw(0, 3);
  std::uniform_real_distribution<float> val(-1.5f, 1.5f);
  for (int rep = 0; rep < 250; ++rep) {
    const int h = dims(rng), w_ = dims(rng);
    const bool depthwise = dw(rng) == 0;
    const int ic = chans(rng);
    const int oc = depthwise ? ic : chans(rng);
    const int k = kk(rng) ? 3 : 1;
    const int stride = ss(rng);
    const int icg = depthwise ? 1 : ic;

    Tensor in_f = Tensor::zeros({ic, h, w_});
    for (Eigen::Index i = 0; i < in_f.data.size(); ++i) in_f.data[i] = val(rng);
    Tensor w_f = Tensor::zeros({oc, icg, k, k});
    for (Eigen::Index i = 0; i < w_f.data.size(); ++i) w_f.data[i] = val(rng);

    const QuantizedTensor in_q = quantize(in_f, calibrate(in_f, Granularity::per_tensor));
    const QuantizedTensor w_q = quantize(w_f, calibrate(w_f, Granularity::per_channel));

    const double s_in = in_q.qparams.scale_for(0);
    std::vector<std::int32_t> bias(oc);
    std::uniform_int_distribution<int> bv(-500, 500);
    for (auto& b : bias) b = bv(rng);

    // Output scale sized to the worst-case accumulator magnitude.
    const double s_out = std::max(0.02 * k * k * icg * s_in, 1e-6);
    const bool relu = dw(rng) == 1;

    const auto got = conv2d_int8(in_q, w_q, bias, per_tensor(s_out), stride, depthwise, relu);
    const auto want = float_conv_oracle(in_q, w_q, bias, s_out, stride, depthwise, relu);
    REQUIRE(got.data.size() == static_cast<Eigen::Index>(want.size()));
    for (Eigen::Index i = 0; i < got.data.size(); ++i) {
      CHECK(std::abs(static_cast<int>(got.data[i]) - static_cast<int>(want[i])) <= 1);
    }
  }
}

TEST_CASE("micro model: parameter and MAC budget") {
  const MicroModel m = build_micro_model(192, 42);
  CHECK(m.param_count() == 293654);  // ~0.3M, mirrors the calibration table
  CHECK(m.mac_count() == 40763520);  // ~41M MACs at 192x192

  // Measured op counts for the 256 and 320 rows give 74/42 and 116/42;
  // the fully convolutional graph tracks the same quadratic growth.
  const double measured[] = {74.0 / 42.0, 116.0 / 42.0};
  const int sides[] = {256, 320};
  for (int i = 0; i < 2; ++i) {
    const MicroModel big = build_micro_model(sides[i], 42);
    const double ratio = static_cast<double>(big.mac_count()) / m.mac_count();
    const double expect = (sides[i] / 192.0) * (sides[i] / 192.0);
    CHECK(std::abs(ratio / expect - 1.0) < 0.05);
    CHECK(std::abs(ratio / measured[i] - 1.0) < 0.05);
  }
}

TEST_CASE("forward: zero weights produce zero head tensors") {
  MicroModel m = build_micro_model(64, 1);
  for (auto& l : m.layers) {
    if (!l.has_weights()) continue;
    l.weights.data.setZero();
    for (auto& b : l.bias) b = 0;
  }
  const RgbImage img = random_image(64, 9);
  const ForwardResult fwd = forward(m, img);
  REQUIRE(fwd.head_tensors.size() == 2);
  for (const auto& t : fwd.head_tensors) {
    CHECK((t.data == 0.0f).all());
  }
}

TEST_CASE("forward is deterministic and matches its float mirror loosely") {
  const MicroModel m = build_micro_model(64, 7);
  const RgbImage img = random_image(64, 1234);
  const ForwardResult a = forward(m, img);
  const ForwardResult b = forward(m, img);
  REQUIRE(a.head_tensors.size() == b.head_tensors.size());
  for (size_t i = 0; i < a.head_tensors.size(); ++i) {
    CHECK((a.head_tensors[i].data == b.head_tensors[i].data).all());
  }
  CHECK(a.mac_count == b.mac_count);

  // The float mirror is a reference, not a bit-for-bit twin: activation
  // quantization noise accumulates across ten layers, so allow a couple
  // dozen output steps of drift at the heads.
  const ForwardResult f = forward_float(m, img);
  const auto heads = m.head_indices();
  for (size_t i = 0; i < heads.size(); ++i) {
    const double step = m.layers[heads[i]].out_scale;
    const double max_err =
        (a.head_tensors[i].data - f.head_tensors[i].data).abs().maxCoeff();
    CHECK(max_err <= 24.0 * step);
  }
}

TEST_CASE("forward rejects mismatched image sides") {
  const MicroModel m = build_micro_model(64, 7);
  CHECK_THROWS_AS(forward(m, random_image(96, 0)), std::invalid_argument);
}

TEST_CASE("model container round trip preserves everything") {
  const MicroModel m = build_micro_model(64, 99);
  const std::string path = "tmp_roundtrip.edgs";
  save_model(path, m);
  const MicroModel r = load_model(path);
  std::remove(path.c_str());

  CHECK(r.input_side == m.input_side);
  CHECK(r.input_scale == m.input_scale);
  REQUIRE(r.layers.size() == m.layers.size());
  for (size_t i = 0; i < m.layers.size(); ++i) {
    CHECK(r.layers[i].kind == m.layers[i].kind);
    CHECK(r.layers[i].name == m.layers[i].name);
    CHECK(r.layers[i].out_scale == m.layers[i].out_scale);
    CHECK(r.layers[i].anchors == m.layers[i].anchors);
    CHECK((r.layers[i].weights.data == m.layers[i].weights.data).all());
    CHECK(r.layers[i].bias == m.layers[i].bias);
    for (Eigen::Index c = 0; c < m.layers[i].weights.qparams.scales.size(); ++c) {
      CHECK(r.layers[i].weights.qparams.scales[c] == m.layers[i].weights.qparams.scales[c]);
    }
  }

  const RgbImage img = random_image(64, 5);
  const ForwardResult fa = forward(m, img);
  const ForwardResult fb = forward(r, img);
  for (size_t i = 0; i < fa.head_tensors.size(); ++i) {
    CHECK((fa.head_tensors[i].data == fb.head_tensors[i].data).all());
  }
}

TEST_CASE("model loader rejects garbage") {
  const std::string path = "tmp_garbage.edgs";
  {
    FILE* f = std::fopen(path.c_str(), "wb");
    REQUIRE(f);
    std::fputs("not a model", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_model(path), std::runtime_error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_model("does_not_exist.edgs"), std::runtime_error);
}
