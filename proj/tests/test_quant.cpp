#include <random>

#include "doctest.h"
#include "edgesim/numeric.hpp"
#include "edgesim/quant.hpp"

using namespace edgesim;

namespace {

Tensor make_tensor(std::vector<int> shape, std::initializer_list<float> values) {
  Tensor t;
  t.shape = std::move(shape);
  t.data.resize(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (float v : values) t.data[i++] = v;
  return t;
}

}  // namespace

TEST_CASE("round_half_even ties go to the even integer") {
  CHECK(round_half_even(0.5) == 0);
  CHECK(round_half_even(1.5) == 2);
  CHECK(round_half_even(2.5) == 2);
  CHECK(round_half_even(-0.5) == 0);
  CHECK(round_half_even(-1.5) == -2);
  CHECK(round_half_even(5.4) == 5);
  CHECK(round_half_even(-5.6) == -6);
}

TEST_CASE("rounding_rshift_even matches scaled round_half_even") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::int64_t> v(-(1ll << 40), 1ll << 40);
  std::uniform_int_distribution<int> sh(1, 20);
  for (int i = 0; i < 20000; ++i) {
    const std::int64_t x = v(rng);
    const int n = sh(rng);
    const std::int64_t got = rounding_rshift_even(x, n);
    const std::int64_t want = round_half_even(std::ldexp(static_cast<double>(x), -n));
    CHECK(got == want);
  }
  CHECK(rounding_rshift_even(3, 1) == 2);   // 1.5 -> 2
  CHECK(rounding_rshift_even(5, 1) == 2);   // 2.5 -> 2
  CHECK(rounding_rshift_even(-3, 1) == -2); // -1.5 -> -2
}

TEST_CASE("calibrate: max-abs rule, per tensor and per channel") {
  const Tensor t = make_tensor({4}, {-1.0f, 0.25f, 0.5f, 1.0f});
  const QuantParams qp = calibrate(t, Granularity::per_tensor);
  CHECK(qp.scales.size() == 1);
  CHECK(qp.scales[0] == doctest::Approx(1.0 / 127.0).epsilon(1e-12));

  const Tensor two_ch = make_tensor({2, 2}, {2.0f, -1.0f, 0.5f, 0.25f});
  const QuantParams pc = calibrate(two_ch, Granularity::per_channel);
  REQUIRE(pc.scales.size() == 2);
  CHECK(pc.scales[0] == doctest::Approx(2.0 / 127.0));
  CHECK(pc.scales[1] == doctest::Approx(0.5 / 127.0));
}

TEST_CASE("calibrate floors the scale for all-zero input") {
  const Tensor z = Tensor::zeros({8});
  const QuantParams qp = calibrate(z, Granularity::per_tensor);
  CHECK(qp.scales[0] == kMinScale);
  const QuantizedTensor q = quantize(z, qp);
  CHECK((q.data == 0).all());
}

TEST_CASE("quantize: round-to-nearest-even, saturation, zero fixed point") {
  QuantParams qp;
  qp.granularity = Granularity::per_tensor;
  qp.scales.resize(1);
  qp.scales[0] = 0.0625;  // exactly representable so the tie cases are exact

  const Tensor t =
      make_tensor({6}, {0.0f, 0.0625f * 5.4f, 0.0625f * 4.5f, 0.0625f * 5.5f, 100.0f, -100.0f});
  const QuantizedTensor q = quantize(t, qp);
  CHECK(q.data[0] == 0);
  CHECK(q.data[1] == 5);   // 5.4 rounds down
  CHECK(q.data[2] == 4);   // 4.5 ties to even
  CHECK(q.data[3] == 6);   // 5.5 ties to even
  CHECK(q.data[4] == 127); // saturate high
  CHECK(q.data[5] == -127);// saturate low; -128 is never produced

  const Tensor back = dequantize(q);
  CHECK(back.data[1] == doctest::Approx(5 * 0.0625));
}

TEST_CASE("quantize rejects mismatched per-channel shapes") {
  QuantParams qp;
  qp.granularity = Granularity::per_channel;
  qp.scales.resize(3);
  qp.scales << 0.1, 0.1, 0.1;
  const Tensor t = make_tensor({2, 2}, {1.0f, 2.0f, 3.0f, 4.0f});
  CHECK_THROWS_AS(quantize(t, qp), std::invalid_argument);
}

TEST_CASE("round trip error is bounded by scale/2 on the representable range") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> scale_dist(1e-4, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    const double s = scale_dist(rng);
    std::uniform_real_distribution<double> x_dist(-127.0 * s, 127.0 * s);
    QuantParams qp;
    qp.granularity = Granularity::per_tensor;
    qp.scales.resize(1);
    qp.scales[0] = s;
    for (int i = 0; i < 2000; ++i) {
      const double x = x_dist(rng);
      const double back = quantize_value(x, s) * s;
      CHECK(std::abs(back - x) <= s / 2 * (1 + 1e-9));
    }
  }
}

TEST_CASE("calibrate scale is equivariant under positive scaling") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<float> val(-3.0f, 3.0f);
  std::uniform_real_distribution<double> kd(0.01, 50.0);
  for (int rep = 0; rep < 200; ++rep) {
    Tensor t = Tensor::zeros({32});
    for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data[i] = val(rng);
    const double k = kd(rng);
    Tensor scaled = t;
    scaled.data *= static_cast<float>(k);
    const double s1 = calibrate(t, Granularity::per_tensor).scales[0];
    const double s2 = calibrate(scaled, Granularity::per_tensor).scales[0];
    CHECK(s2 == doctest::Approx(k * s1).epsilon(1e-6));
  }
}
