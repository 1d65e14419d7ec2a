#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "edgesim/image.hpp"
#include "edgesim/quant.hpp"

namespace edgesim {

enum class LayerKind : std::uint32_t {
  conv = 0,
  depthwise = 1,
  maxpool = 2,
  upsample = 3,
  concat = 4,
  head = 5,  // 1x1 conv emitting anchor fields, no activation
};

/// One operator in the reduced YOLO-style graph. Convolutions use
/// same-padding; maxpool uses valid padding; upsample is nearest x2.
/// Weight layout is [out_c][in_c][k][k] (depthwise: [c][1][k][k]),
/// biases are int32 at scale s_in * s_weight[oc].
struct LayerDesc {
  LayerKind kind = LayerKind::conv;
  std::string name;
  int input_layer = -1;   // producing layer index, -1 = network input
  int concat_with = -1;   // second producer (concat only)
  int in_c = 0;
  int out_c = 0;
  int k = 1;
  int stride = 1;
  bool relu = false;
  double out_scale = 0.0;  // per-tensor activation scale of this layer's output

  QuantizedTensor weights;          // per-channel scales; empty for non-weighted kinds
  std::vector<std::int32_t> bias;   // one per out channel

  // head only: normalized prior box sizes (w, h) in [0,1] of the input side
  std::vector<std::array<double, 2>> anchors;

  bool has_weights() const {
    return kind == LayerKind::conv || kind == LayerKind::depthwise || kind == LayerKind::head;
  }
};

/// Spatial extents of every layer for a given input side.
struct LayerShape {
  int in_h = 0, in_w = 0;
  int out_h = 0, out_w = 0;
};

struct MicroModel {
  int input_side = 0;
  double input_scale = 0.0;  // quantization scale of the normalized [0,1] input
  std::vector<LayerDesc> layers;

  std::vector<int> head_indices() const;
  std::vector<LayerShape> shapes() const;  // chained from input_side
  std::int64_t param_count() const;        // weight + bias element count
  std::int64_t mac_count() const;          // analytic multiply-accumulate total
  void validate() const;
};

/// Integer conv with 32-bit accumulation, per-channel requantization to
/// the output scale (q31 fixed-point multiplier, round-half-even) and
/// saturation to [-127, 127]. Shared by conv / depthwise / head kinds.
///
/// input shape {in_c, h, w}; weights shape {out_c, in_c_per_group, k, k}.
QuantizedTensor conv2d_int8(const QuantizedTensor& input, const QuantizedTensor& weights,
                            const std::vector<std::int32_t>& bias, const QuantParams& out_qparams,
                            int stride, bool depthwise = false, bool relu = false);

/// Requantization multiplier folded to fixed point: value = mult / 2^31 / 2^rshift.
struct Requant {
  std::int32_t mult_q31 = 0;
  int rshift = 0;
};
Requant fold_multiplier(double m);
std::int8_t requantize(std::int64_t acc, const Requant& r);

struct ForwardResult {
  std::vector<Tensor> head_tensors;  // dequantized, shape {channels, gh, gw}
  std::int64_t mac_count = 0;
};

/// Quantized inference over a prepared RGB image whose side matches the
/// model input side. Deterministic: integer arithmetic end to end.
ForwardResult forward(const MicroModel& model, const RgbImage& img);

/// Float mirror of forward() operating on dequantized weights/biases.
/// Serves as the numeric-equivalence reference for the integer path.
ForwardResult forward_float(const MicroModel& model, const RgbImage& img);

/// Construct the shipped reduced YOLO-style detector (strided conv
/// backbone, one upsample/concat, two heads) with seeded random
/// weights, calibrated activation scales and per-channel weight
/// quantization. input side must be a positive multiple of 32.
MicroModel build_micro_model(int input_side, std::uint32_t seed);

/// The same graph with empty weights and unset scales, for callers that
/// install their own parameters (test fixtures, tools).
MicroModel micro_model_skeleton(int input_side);

/// Per-channel weight quantization plus bias folding at s_in * s_weight.
/// Activation out_scales must already be set on every layer.
void finalize_quantization(MicroModel& model, const std::vector<Tensor>& weights_f,
                           const std::vector<std::vector<float>>& bias_f);

}  // namespace edgesim
