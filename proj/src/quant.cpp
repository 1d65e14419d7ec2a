#include "edgesim/quant.hpp"

#include <algorithm>
#include <stdexcept>

#include "edgesim/numeric.hpp"

namespace edgesim {

std::int8_t quantize_value(double x, double scale) {
  const std::int64_t q = round_half_even(x / scale);
  return static_cast<std::int8_t>(std::clamp<std::int64_t>(q, -127, 127));
}

QuantParams calibrate(const Tensor& values, Granularity granularity) {
  require(values.numel() > 0, "calibrate: empty tensor");
  QuantParams qp;
  qp.granularity = granularity;
  if (granularity == Granularity::per_tensor) {
    qp.scales.resize(1);
    qp.scales[0] = std::max(static_cast<double>(values.data.abs().maxCoeff()) / 127.0, kMinScale);
    return qp;
  }
  require(!values.shape.empty(), "calibrate: per-channel needs a shaped tensor");
  const int channels = values.shape[0];
  const std::int64_t stride = values.numel() / channels;
  qp.scales.resize(channels);
  for (int c = 0; c < channels; ++c) {
    const double max_abs = values.data.segment(c * stride, stride).abs().maxCoeff();
    qp.scales[c] = std::max(max_abs / 127.0, kMinScale);
  }
  return qp;
}

QuantizedTensor quantize(const Tensor& values, const QuantParams& qparams) {
  require(values.numel() > 0, "quantize: empty tensor");
  QuantizedTensor q;
  q.shape = values.shape;
  q.qparams = qparams;
  q.data.resize(values.numel());
  if (qparams.granularity == Granularity::per_tensor) {
    require(qparams.scales.size() == 1, "quantize: per-tensor expects one scale");
    const double s = qparams.scales[0];
    for (std::int64_t i = 0; i < values.numel(); ++i) {
      q.data[i] = quantize_value(values.data[i], s);
    }
    return q;
  }
  require(!values.shape.empty() && qparams.scales.size() == values.shape[0],
          "quantize: per-channel scale count must match leading dimension");
  const int channels = values.shape[0];
  const std::int64_t stride = values.numel() / channels;
  for (int c = 0; c < channels; ++c) {
    const double s = qparams.scales[c];
    for (std::int64_t i = c * stride; i < (c + 1) * stride; ++i) {
      q.data[i] = quantize_value(values.data[i], s);
    }
  }
  return q;
}

Tensor dequantize(const QuantizedTensor& q) {
  Tensor t;
  t.shape = q.shape;
  t.data.resize(q.numel());
  if (q.qparams.granularity == Granularity::per_tensor) {
    const double s = q.qparams.scales[0];
    for (std::int64_t i = 0; i < q.numel(); ++i) {
      t.data[i] = static_cast<float>(q.data[i] * s);
    }
    return t;
  }
  const int channels = q.shape[0];
  const std::int64_t stride = q.numel() / channels;
  for (int c = 0; c < channels; ++c) {
    const double s = q.qparams.scales[c];
    for (std::int64_t i = c * stride; i < (c + 1) * stride; ++i) {
      t.data[i] = static_cast<float>(q.data[i] * s);
    }
  }
  return t;
}

}  // namespace edgesim
