#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <numeric>
#include <vector>

namespace edgesim {

template <typename Scalar>
struct TensorT {
  std::vector<int> shape;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> data;  // row-major flattened

  std::int64_t numel() const { return data.size(); }
  static TensorT zeros(std::vector<int> shape_) {
    TensorT t;
    std::int64_t n = 1;
    for (int d : shape_) n *= d;
    t.shape = std::move(shape_);
    t.data = Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(n);
    return t;
  }
};

using Tensor = TensorT<float>;

enum class Granularity { per_tensor, per_channel };

/// Symmetric quantization parameters: zero point is fixed at 0, so a
/// real value maps to round(x / scale). Per-channel granularity keeps
/// one scale per leading-dimension slice and is used on weights only.
struct QuantParams {
  Granularity granularity = Granularity::per_tensor;
  Eigen::ArrayXd scales;  // one entry, or one per output channel

  double scale_for(int channel) const {
    return granularity == Granularity::per_tensor ? scales[0] : scales[channel];
  }
};

struct QuantizedTensor {
  std::vector<int> shape;
  Eigen::Array<std::int8_t, Eigen::Dynamic, 1> data;  // values in [-127, 127]
  QuantParams qparams;

  std::int64_t numel() const { return data.size(); }
};

/// Lowest representable scale; all-zero calibration input floors here
/// instead of producing a zero (division-unsafe) scale.
inline constexpr double kMinScale = 1e-12;

/// Max-abs calibration: scale = max|x| / 127, per tensor or per
/// leading-dimension channel.
QuantParams calibrate(const Tensor& values, Granularity granularity);

QuantizedTensor quantize(const Tensor& values, const QuantParams& qparams);
Tensor dequantize(const QuantizedTensor& q);

/// Scalar helper used by both directions: clamp(round_half_even(x/scale)).
std::int8_t quantize_value(double x, double scale);

}  // namespace edgesim
