#include "edgesim/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "edgesim/numeric.hpp"

namespace edgesim {

namespace {

struct Dims {
  int c = 0, h = 0, w = 0;
  std::int64_t numel() const { return static_cast<std::int64_t>(c) * h * w; }
};

std::int64_t idx3(const Dims& d, int c, int y, int x) {
  return (static_cast<std::int64_t>(c) * d.h + y) * d.w + x;
}

// Output spatial size for one layer. Convs are same-padded, pools valid.
void spatial_out(const LayerDesc& l, int in_h, int in_w, int& out_h, int& out_w) {
  switch (l.kind) {
    case LayerKind::conv:
    case LayerKind::depthwise:
    case LayerKind::head:
      out_h = (in_h + l.stride - 1) / l.stride;
      out_w = (in_w + l.stride - 1) / l.stride;
      break;
    case LayerKind::maxpool:
      out_h = (in_h - l.k) / l.stride + 1;
      out_w = (in_w - l.k) / l.stride + 1;
      break;
    case LayerKind::upsample:
      out_h = in_h * 2;
      out_w = in_w * 2;
      break;
    case LayerKind::concat:
      out_h = in_h;
      out_w = in_w;
      break;
  }
}

}  // namespace

std::vector<int> MicroModel::head_indices() const {
  std::vector<int> out;
  for (size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].kind == LayerKind::head) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<LayerShape> MicroModel::shapes() const {
  std::vector<LayerShape> s(layers.size());
  for (size_t i = 0; i < layers.size(); ++i) {
    const LayerDesc& l = layers[i];
    int ih, iw;
    if (l.input_layer < 0) {
      ih = iw = input_side;
    } else {
      ih = s[l.input_layer].out_h;
      iw = s[l.input_layer].out_w;
    }
    s[i].in_h = ih;
    s[i].in_w = iw;
    spatial_out(l, ih, iw, s[i].out_h, s[i].out_w);
  }
  return s;
}

std::int64_t MicroModel::param_count() const {
  std::int64_t n = 0;
  for (const auto& l : layers) {
    n += l.weights.numel() + static_cast<std::int64_t>(l.bias.size());
  }
  return n;
}

std::int64_t MicroModel::mac_count() const {
  const auto s = shapes();
  std::int64_t n = 0;
  for (size_t i = 0; i < layers.size(); ++i) {
    const LayerDesc& l = layers[i];
    const std::int64_t spatial = static_cast<std::int64_t>(s[i].out_h) * s[i].out_w;
    if (l.kind == LayerKind::conv || l.kind == LayerKind::head) {
      n += spatial * l.k * l.k * l.in_c * l.out_c;
    } else if (l.kind == LayerKind::depthwise) {
      n += spatial * l.k * l.k * l.out_c;
    }
  }
  return n;
}

void MicroModel::validate() const {
  require(input_side > 0, "MicroModel: input_side must be positive");
  require(input_scale > 0.0, "MicroModel: input_scale must be positive");
  require(!layers.empty(), "MicroModel: no layers");
  for (size_t i = 0; i < layers.size(); ++i) {
    const LayerDesc& l = layers[i];
    require(l.input_layer < static_cast<int>(i), "MicroModel: layer input must precede it");
    const int prod_c = l.input_layer < 0 ? 3 : layers[l.input_layer].out_c;
    if (l.kind == LayerKind::concat) {
      require(l.concat_with >= 0 && l.concat_with < static_cast<int>(i),
              "MicroModel: concat producer out of range");
      require(l.in_c == prod_c + layers[l.concat_with].out_c && l.out_c == l.in_c,
              "MicroModel: concat channel mismatch");
    } else {
      if (l.in_c != prod_c) {
        throw std::invalid_argument("MicroModel: channel chain broken at layer " + l.name);
      }
    }
    if (l.kind == LayerKind::depthwise) {
      require(l.out_c == l.in_c, "MicroModel: depthwise must preserve channels");
    }
    if (l.has_weights()) {
      const int icg = l.kind == LayerKind::depthwise ? 1 : l.in_c;
      require(l.weights.numel() == static_cast<std::int64_t>(l.out_c) * icg * l.k * l.k,
              "MicroModel: weight blob size mismatch");
      require(l.weights.qparams.granularity == Granularity::per_channel &&
                  l.weights.qparams.scales.size() == l.out_c,
              "MicroModel: weights need one scale per out channel");
      require(static_cast<int>(l.bias.size()) == l.out_c, "MicroModel: bias size mismatch");
    }
    if (l.kind == LayerKind::head) {
      require(!l.anchors.empty() && l.out_c == static_cast<int>(l.anchors.size()) * 5,
              "MicroModel: head channels must be 5 per anchor");
    }
    require(l.out_scale > 0.0, "MicroModel: missing activation scale");
  }
  const auto s = shapes();
  for (size_t i = 0; i < layers.size(); ++i) {
    require(s[i].out_h > 0 && s[i].out_w > 0, "MicroModel: layer output collapses to zero size");
    if (layers[i].kind == LayerKind::concat) {
      const auto& a = s[layers[i].input_layer];
      const auto& b = s[layers[i].concat_with];
      require(a.out_h == b.out_h && a.out_w == b.out_w, "MicroModel: concat spatial mismatch");
    }
  }
}

Requant fold_multiplier(double m) {
  require(m > 0.0, "fold_multiplier: multiplier must be positive");
  int exp = 0;
  const double f = std::frexp(m, &exp);  // m = f * 2^exp, f in [0.5, 1)
  std::int64_t q = round_half_even(f * static_cast<double>(std::int64_t{1} << 31));
  if (q == (std::int64_t{1} << 31)) {
    q >>= 1;
    ++exp;
  }
  const int rshift = 31 - exp;
  if (rshift >= 63) {
    // Multiplier below 2^-32: every int32 accumulator rounds to zero.
    // Happens for all-zero weight channels whose scale sits at the floor.
    return {0, 0};
  }
  require(rshift >= 0, "fold_multiplier: multiplier out of fixed-point range");
  return {static_cast<std::int32_t>(q), rshift};
}

std::int8_t requantize(std::int64_t acc, const Requant& r) {
  const std::int64_t scaled = rounding_rshift_even(acc * r.mult_q31, r.rshift);
  return static_cast<std::int8_t>(std::clamp<std::int64_t>(scaled, -127, 127));
}

QuantizedTensor conv2d_int8(const QuantizedTensor& input, const QuantizedTensor& weights,
                            const std::vector<std::int32_t>& bias, const QuantParams& out_qparams,
                            int stride, bool depthwise, bool relu) {
  require(input.shape.size() == 3, "conv2d_int8: input must be {c,h,w}");
  require(weights.shape.size() == 4, "conv2d_int8: weights must be {oc,icg,k,k}");
  const Dims in{input.shape[0], input.shape[1], input.shape[2]};
  const int out_c = weights.shape[0];
  const int icg = weights.shape[1];
  const int k = weights.shape[2];
  require(weights.shape[3] == k, "conv2d_int8: kernels must be square");
  require(depthwise ? (icg == 1 && out_c == in.c) : (icg == in.c),
          "conv2d_int8: channel shapes inconsistent");
  require(static_cast<int>(bias.size()) == out_c, "conv2d_int8: bias size mismatch");
  require(stride >= 1, "conv2d_int8: stride must be >= 1");
  require(input.qparams.granularity == Granularity::per_tensor,
          "conv2d_int8: activations are quantized per-tensor");
  require(out_qparams.granularity == Granularity::per_tensor && out_qparams.scales.size() == 1,
          "conv2d_int8: output quantization must be per-tensor");
  // Accumulation is int32-semantics: the worst-case dot product must
  // stay inside int32 so the wider accumulator below never differs.
  require(static_cast<std::int64_t>(127) * 127 * k * k * icg < (std::int64_t{1} << 30),
          "conv2d_int8: kernel footprint overflows the 32-bit accumulator");

  const double s_in = input.qparams.scale_for(0);
  const double s_out = out_qparams.scales[0];
  const int pad = (k - 1) / 2;
  const Dims out{out_c, (in.h + stride - 1) / stride, (in.w + stride - 1) / stride};

  QuantizedTensor result;
  result.shape = {out.c, out.h, out.w};
  result.qparams = out_qparams;
  result.data.resize(out.numel());

  const std::int64_t w_ch_stride = static_cast<std::int64_t>(icg) * k * k;
  for (int oc = 0; oc < out_c; ++oc) {
    const Requant rq = fold_multiplier(s_in * weights.qparams.scale_for(oc) / s_out);
    const std::int8_t* wp = weights.data.data() + oc * w_ch_stride;
    for (int oy = 0; oy < out.h; ++oy) {
      for (int ox = 0; ox < out.w; ++ox) {
        std::int64_t acc = bias[oc];
        const int base_y = oy * stride - pad;
        const int base_x = ox * stride - pad;
        for (int g = 0; g < icg; ++g) {
          const int ic = depthwise ? oc : g;
          const std::int8_t* ip = input.data.data() + static_cast<std::int64_t>(ic) * in.h * in.w;
          for (int ky = 0; ky < k; ++ky) {
            const int iy = base_y + ky;
            if (iy < 0 || iy >= in.h) continue;  // symmetric zero padding
            for (int kx = 0; kx < k; ++kx) {
              const int ix = base_x + kx;
              if (ix < 0 || ix >= in.w) continue;
              acc += static_cast<std::int32_t>(ip[static_cast<std::int64_t>(iy) * in.w + ix]) *
                     static_cast<std::int32_t>(wp[(g * k + ky) * k + kx]);
            }
          }
        }
        std::int8_t q = requantize(acc, rq);
        if (relu && q < 0) q = 0;
        result.data[idx3(out, oc, oy, ox)] = q;
      }
    }
  }
  return result;
}

namespace {

QuantizedTensor maxpool_int8(const QuantizedTensor& input, int k, int stride) {
  const Dims in{input.shape[0], input.shape[1], input.shape[2]};
  const Dims out{in.c, (in.h - k) / stride + 1, (in.w - k) / stride + 1};
  QuantizedTensor r;
  r.shape = {out.c, out.h, out.w};
  r.qparams = input.qparams;
  r.data.resize(out.numel());
  for (int c = 0; c < in.c; ++c) {
    for (int oy = 0; oy < out.h; ++oy) {
      for (int ox = 0; ox < out.w; ++ox) {
        std::int8_t m = -128;
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            m = std::max(m, input.data[idx3(in, c, oy * stride + ky, ox * stride + kx)]);
          }
        }
        r.data[idx3(out, c, oy, ox)] = m;
      }
    }
  }
  return r;
}

QuantizedTensor upsample2_int8(const QuantizedTensor& input) {
  const Dims in{input.shape[0], input.shape[1], input.shape[2]};
  const Dims out{in.c, in.h * 2, in.w * 2};
  QuantizedTensor r;
  r.shape = {out.c, out.h, out.w};
  r.qparams = input.qparams;
  r.data.resize(out.numel());
  for (int c = 0; c < in.c; ++c) {
    for (int y = 0; y < out.h; ++y) {
      for (int x = 0; x < out.w; ++x) {
        r.data[idx3(out, c, y, x)] = input.data[idx3(in, c, y / 2, x / 2)];
      }
    }
  }
  return r;
}

QuantizedTensor concat_int8(const QuantizedTensor& a, const QuantizedTensor& b) {
  require(a.shape[1] == b.shape[1] && a.shape[2] == b.shape[2], "concat: spatial mismatch");
  // Producers are built with a unified scale, so concat is a plain copy.
  require(std::abs(a.qparams.scale_for(0) - b.qparams.scale_for(0)) <=
              1e-12 * a.qparams.scale_for(0),
          "concat: input scales must match");
  QuantizedTensor r;
  r.shape = {a.shape[0] + b.shape[0], a.shape[1], a.shape[2]};
  r.qparams = a.qparams;
  r.data.resize(a.numel() + b.numel());
  r.data.head(a.numel()) = a.data;
  r.data.tail(b.numel()) = b.data;
  return r;
}

// ---- float graph primitives (shared by the reference path and the
// builder's calibration pass) ----

Tensor float_conv(const Tensor& input, const Tensor& weights, const std::vector<float>& bias,
                  int stride, bool depthwise, bool relu) {
  const Dims in{input.shape[0], input.shape[1], input.shape[2]};
  const int out_c = weights.shape[0];
  const int icg = weights.shape[1];
  const int k = weights.shape[2];
  const int pad = (k - 1) / 2;
  const Dims out{out_c, (in.h + stride - 1) / stride, (in.w + stride - 1) / stride};
  Tensor r = Tensor::zeros({out.c, out.h, out.w});
  const std::int64_t w_ch_stride = static_cast<std::int64_t>(icg) * k * k;
  for (int oc = 0; oc < out_c; ++oc) {
    const float* wp = weights.data.data() + oc * w_ch_stride;
    for (int oy = 0; oy < out.h; ++oy) {
      for (int ox = 0; ox < out.w; ++ox) {
        double acc = bias[oc];
        for (int g = 0; g < icg; ++g) {
          const int ic = depthwise ? oc : g;
          const float* ip = input.data.data() + static_cast<std::int64_t>(ic) * in.h * in.w;
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= in.h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * stride - pad + kx;
              if (ix < 0 || ix >= in.w) continue;
              acc += static_cast<double>(ip[static_cast<std::int64_t>(iy) * in.w + ix]) *
                     wp[(g * k + ky) * k + kx];
            }
          }
        }
        if (relu && acc < 0) acc = 0;
        r.data[idx3(out, oc, oy, ox)] = static_cast<float>(acc);
      }
    }
  }
  return r;
}

Tensor float_maxpool(const Tensor& input, int k, int stride) {
  const Dims in{input.shape[0], input.shape[1], input.shape[2]};
  const Dims out{in.c, (in.h - k) / stride + 1, (in.w - k) / stride + 1};
  Tensor r = Tensor::zeros({out.c, out.h, out.w});
  for (int c = 0; c < in.c; ++c) {
    for (int oy = 0; oy < out.h; ++oy) {
      for (int ox = 0; ox < out.w; ++ox) {
        float m = -std::numeric_limits<float>::infinity();
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            m = std::max(m, input.data[idx3(in, c, oy * stride + ky, ox * stride + kx)]);
          }
        }
        r.data[idx3(out, c, oy, ox)] = m;
      }
    }
  }
  return r;
}

Tensor float_upsample2(const Tensor& input) {
  const Dims in{input.shape[0], input.shape[1], input.shape[2]};
  const Dims out{in.c, in.h * 2, in.w * 2};
  Tensor r = Tensor::zeros({out.c, out.h, out.w});
  for (int c = 0; c < in.c; ++c) {
    for (int y = 0; y < out.h; ++y) {
      for (int x = 0; x < out.w; ++x) {
        r.data[idx3(out, c, y, x)] = input.data[idx3(in, c, y / 2, x / 2)];
      }
    }
  }
  return r;
}

Tensor float_concat(const Tensor& a, const Tensor& b) {
  Tensor r;
  r.shape = {a.shape[0] + b.shape[0], a.shape[1], a.shape[2]};
  r.data.resize(a.numel() + b.numel());
  r.data.head(a.numel()) = a.data;
  r.data.tail(b.numel()) = b.data;
  return r;
}

Tensor normalize_image(const RgbImage& img) {
  const int h = img.height(), w = img.width();
  Tensor t = Tensor::zeros({3, h, w});
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        t.data[(static_cast<std::int64_t>(c) * h + y) * w + x] =
            static_cast<float>(img.planes[c](y, x)) / 255.0f;
      }
    }
  }
  return t;
}

// Runs the float graph over explicit float weights. Used by the builder
// (calibration) and, with dequantized weights, by forward_float.
std::vector<Tensor> run_float_graph(const MicroModel& model, const std::vector<Tensor>& weights_f,
                                    const std::vector<std::vector<float>>& bias_f,
                                    const Tensor& input) {
  std::vector<Tensor> acts(model.layers.size());
  for (size_t i = 0; i < model.layers.size(); ++i) {
    const LayerDesc& l = model.layers[i];
    const Tensor& in = l.input_layer < 0 ? input : acts[l.input_layer];
    switch (l.kind) {
      case LayerKind::conv:
      case LayerKind::head:
        acts[i] = float_conv(in, weights_f[i], bias_f[i], l.stride, false, l.relu);
        break;
      case LayerKind::depthwise:
        acts[i] = float_conv(in, weights_f[i], bias_f[i], l.stride, true, l.relu);
        break;
      case LayerKind::maxpool:
        acts[i] = float_maxpool(in, l.k, l.stride);
        break;
      case LayerKind::upsample:
        acts[i] = float_upsample2(in);
        break;
      case LayerKind::concat:
        acts[i] = float_concat(in, acts[l.concat_with]);
        break;
    }
  }
  return acts;
}

}  // namespace

ForwardResult forward(const MicroModel& model, const RgbImage& img) {
  model.validate();
  require(img.width() == model.input_side && img.height() == model.input_side,
          "forward: image side does not match model input side");

  QuantParams in_qp;
  in_qp.granularity = Granularity::per_tensor;
  in_qp.scales.resize(1);
  in_qp.scales[0] = model.input_scale;
  QuantizedTensor input = quantize(normalize_image(img), in_qp);

  std::vector<QuantizedTensor> acts(model.layers.size());
  for (size_t i = 0; i < model.layers.size(); ++i) {
    const LayerDesc& l = model.layers[i];
    const QuantizedTensor& in = l.input_layer < 0 ? input : acts[l.input_layer];
    QuantParams out_qp;
    out_qp.granularity = Granularity::per_tensor;
    out_qp.scales.resize(1);
    out_qp.scales[0] = l.out_scale;
    switch (l.kind) {
      case LayerKind::conv:
      case LayerKind::head:
        acts[i] = conv2d_int8(in, l.weights, l.bias, out_qp, l.stride, false, l.relu);
        break;
      case LayerKind::depthwise:
        acts[i] = conv2d_int8(in, l.weights, l.bias, out_qp, l.stride, true, l.relu);
        break;
      case LayerKind::maxpool:
        acts[i] = maxpool_int8(in, l.k, l.stride);
        break;
      case LayerKind::upsample:
        acts[i] = upsample2_int8(in);
        break;
      case LayerKind::concat:
        acts[i] = concat_int8(in, acts[l.concat_with]);
        break;
    }
  }

  ForwardResult r;
  r.mac_count = model.mac_count();
  for (int hi : model.head_indices()) r.head_tensors.push_back(dequantize(acts[hi]));
  return r;
}

ForwardResult forward_float(const MicroModel& model, const RgbImage& img) {
  model.validate();
  require(img.width() == model.input_side && img.height() == model.input_side,
          "forward_float: image side does not match model input side");

  std::vector<Tensor> weights_f(model.layers.size());
  std::vector<std::vector<float>> bias_f(model.layers.size());
  for (size_t i = 0; i < model.layers.size(); ++i) {
    const LayerDesc& l = model.layers[i];
    if (!l.has_weights()) continue;
    weights_f[i] = dequantize(l.weights);
    const double s_in = l.input_layer < 0 ? model.input_scale : model.layers[l.input_layer].out_scale;
    bias_f[i].resize(l.bias.size());
    for (size_t oc = 0; oc < l.bias.size(); ++oc) {
      bias_f[i][oc] = static_cast<float>(l.bias[oc] * s_in * l.weights.qparams.scale_for(static_cast<int>(oc)));
    }
  }

  auto acts = run_float_graph(model, weights_f, bias_f, normalize_image(img));
  ForwardResult r;
  r.mac_count = model.mac_count();
  for (int hi : model.head_indices()) r.head_tensors.push_back(std::move(acts[hi]));
  return r;
}

MicroModel micro_model_skeleton(int input_side) {
  require(input_side > 0 && input_side % 32 == 0,
          "micro_model_skeleton: input side must be a positive multiple of 32");

  MicroModel m;
  m.input_side = input_side;
  m.input_scale = 1.0 / 127.0;  // normalized [0,1] input

  auto conv = [](std::string name, int in_l, int ic, int oc, int k, int s) {
    LayerDesc l;
    l.kind = LayerKind::conv;
    l.name = std::move(name);
    l.input_layer = in_l;
    l.in_c = ic;
    l.out_c = oc;
    l.k = k;
    l.stride = s;
    l.relu = true;
    return l;
  };

  m.layers.push_back(conv("conv0_3x3s1", -1, 3, 12, 3, 1));
  {
    LayerDesc l;
    l.kind = LayerKind::maxpool;
    l.name = "pool1_2x2s2";
    l.input_layer = 0;
    l.in_c = l.out_c = 12;
    l.k = 2;
    l.stride = 2;
    m.layers.push_back(l);
  }
  m.layers.push_back(conv("conv2_3x3s2", 1, 12, 24, 3, 2));
  m.layers.push_back(conv("conv3_3x3s2", 2, 24, 48, 3, 2));
  m.layers.push_back(conv("conv4_3x3s2", 3, 48, 96, 3, 2));
  m.layers.push_back(conv("conv5_3x3s2", 4, 96, 224, 3, 2));
  m.layers.push_back(conv("neck6_1x1", 5, 224, 96, 1, 1));
  {
    LayerDesc l;
    l.kind = LayerKind::upsample;
    l.name = "up7_x2";
    l.input_layer = 6;
    l.in_c = l.out_c = 96;
    m.layers.push_back(l);
  }
  {
    LayerDesc l;
    l.kind = LayerKind::concat;
    l.name = "concat8";
    l.input_layer = 7;
    l.concat_with = 4;
    l.in_c = l.out_c = 192;
    m.layers.push_back(l);
  }
  {
    LayerDesc l = conv("dw9_3x3", 8, 192, 192, 3, 1);
    l.kind = LayerKind::depthwise;
    m.layers.push_back(l);
  }
  m.layers.push_back(conv("conv10_1x1", 9, 192, 96, 1, 1));
  {
    LayerDesc l = conv("head_hi", 10, 96, 15, 1, 1);
    l.kind = LayerKind::head;
    l.relu = false;
    l.anchors = {{0.06, 0.09}, {0.11, 0.16}, {0.18, 0.26}};
    m.layers.push_back(l);
  }
  {
    LayerDesc l = conv("head_lo", 6, 96, 15, 1, 1);
    l.kind = LayerKind::head;
    l.relu = false;
    l.anchors = {{0.28, 0.38}, {0.42, 0.55}, {0.65, 0.78}};
    m.layers.push_back(l);
  }
  return m;
}

void finalize_quantization(MicroModel& m, const std::vector<Tensor>& weights_f,
                           const std::vector<std::vector<float>>& bias_f) {
  for (size_t i = 0; i < m.layers.size(); ++i) {
    LayerDesc& l = m.layers[i];
    if (!l.has_weights()) continue;
    l.weights = quantize(weights_f[i], calibrate(weights_f[i], Granularity::per_channel));
    const double s_in = l.input_layer < 0 ? m.input_scale : m.layers[l.input_layer].out_scale;
    l.bias.resize(l.out_c);
    for (int oc = 0; oc < l.out_c; ++oc) {
      l.bias[oc] = static_cast<std::int32_t>(
          round_half_even(bias_f[i][oc] / (s_in * l.weights.qparams.scale_for(oc))));
    }
  }
  m.validate();
}

MicroModel build_micro_model(int input_side, std::uint32_t seed) {
  MicroModel m = micro_model_skeleton(input_side);

  // Seeded float weights (He-scaled) for later calibration-quantization.
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> bias_dist(-0.02, 0.02);
  std::vector<Tensor> weights_f(m.layers.size());
  std::vector<std::vector<float>> bias_f(m.layers.size());
  for (size_t i = 0; i < m.layers.size(); ++i) {
    LayerDesc& l = m.layers[i];
    if (!l.has_weights()) continue;
    const int icg = l.kind == LayerKind::depthwise ? 1 : l.in_c;
    weights_f[i] = Tensor::zeros({l.out_c, icg, l.k, l.k});
    const double sigma = std::sqrt(2.0 / (static_cast<double>(icg) * l.k * l.k));
    for (std::int64_t j = 0; j < weights_f[i].numel(); ++j) {
      weights_f[i].data[j] = static_cast<float>(normal(rng) * sigma);
    }
    bias_f[i].resize(l.out_c);
    for (int oc = 0; oc < l.out_c; ++oc) bias_f[i][oc] = static_cast<float>(bias_dist(rng));
  }

  // Activation calibration on representative random frames.
  std::vector<double> max_abs(m.layers.size(), 0.0);
  std::mt19937 img_rng(seed ^ 0x9e3779b9u);
  std::uniform_int_distribution<int> px(0, 255);
  for (int rep = 0; rep < 4; ++rep) {
    RgbImage img;
    for (auto& p : img.planes) {
      p.resize(input_side, input_side);
      for (int y = 0; y < input_side; ++y) {
        for (int x = 0; x < input_side; ++x) p(y, x) = static_cast<std::uint8_t>(px(img_rng));
      }
    }
    auto acts = run_float_graph(m, weights_f, bias_f, normalize_image(img));
    for (size_t i = 0; i < acts.size(); ++i) {
      max_abs[i] = std::max(max_abs[i], static_cast<double>(acts[i].data.abs().maxCoeff()));
    }
  }
  for (size_t i = 0; i < m.layers.size(); ++i) {
    m.layers[i].out_scale = std::max(max_abs[i] / 127.0, kMinScale);
  }
  // Concat inputs share one scale so concatenation is a plain copy.
  const double concat_scale = std::max(m.layers[6].out_scale, m.layers[4].out_scale);
  m.layers[6].out_scale = concat_scale;  // neck
  m.layers[4].out_scale = concat_scale;  // skip branch
  m.layers[7].out_scale = concat_scale;  // upsample passthrough
  m.layers[8].out_scale = concat_scale;  // concat output

  finalize_quantization(m, weights_f, bias_f);
  return m;
}

}  // namespace edgesim
