#include "edgesim/tiler.hpp"

#include <algorithm>
#include <limits>

#include "edgesim/numeric.hpp"

namespace edgesim {

MemoryHierarchy MemoryHierarchy::defaults() {
  return {128 * 1024, 3 * 512 * 1024, 64 * 1024 * 1024};
}

void MemoryHierarchy::validate() const {
  require(l1_bytes > 0 && l2_bytes > 0 && l3_bytes > 0, "MemoryHierarchy: sizes must be positive");
  require(l1_bytes < l2_bytes && l2_bytes < l3_bytes, "MemoryHierarchy: need l1 < l2 < l3");
}

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

// Per-axis clipped input span for output range [o0, o1).
std::int64_t axis_span(TileKind kind, int k, int stride, int in_dim, int o0, int o1) {
  std::int64_t i0 = 0, i1 = 0;
  switch (kind) {
    case TileKind::conv:
    case TileKind::depthwise: {
      const int pad = (k - 1) / 2;
      i0 = static_cast<std::int64_t>(o0) * stride - pad;
      i1 = static_cast<std::int64_t>(o1 - 1) * stride - pad + k;
      break;
    }
    case TileKind::pool:
      i0 = static_cast<std::int64_t>(o0) * stride;
      i1 = static_cast<std::int64_t>(o1 - 1) * stride + k;
      break;
    case TileKind::upsample:
      i0 = o0 / 2;
      i1 = (o1 + 1) / 2;
      break;
  }
  i0 = std::max<std::int64_t>(i0, 0);
  i1 = std::min<std::int64_t>(i1, in_dim);
  return std::max<std::int64_t>(i1 - i0, 0);
}

// Unclipped worst-case input span of a tile_dim-sized output tile,
// used for the residency budget (interior tiles dominate).
std::int64_t worst_axis_span(TileKind kind, int k, int stride, int tile_dim) {
  switch (kind) {
    case TileKind::conv:
    case TileKind::depthwise:
    case TileKind::pool:
      return static_cast<std::int64_t>(tile_dim - 1) * stride + k;
    case TileKind::upsample:
      return (tile_dim + 1) / 2;
  }
  return tile_dim;
}

// Sum over all output segments of a given tile size of the clipped
// input spans along one axis.
std::int64_t total_axis_span(TileKind kind, int k, int stride, int in_dim, int out_dim, int tile) {
  std::int64_t sum = 0;
  for (int o0 = 0; o0 < out_dim; o0 += tile) {
    sum += axis_span(kind, k, stride, in_dim, o0, std::min(o0 + tile, out_dim));
  }
  return sum;
}

// Input-channel depth a tile must fetch: regular convs need every input
// channel; the channel-sliced kinds read only their own slice.
bool full_input_depth(TileKind kind) { return kind == TileKind::conv; }

std::int64_t weight_slice_bytes(const LayerSpec& l, int toc) {
  switch (l.kind) {
    case TileKind::conv:
      return static_cast<std::int64_t>(toc) * l.in_c * l.k_h * l.k_w * l.bytes_per_element +
             4ll * toc;
    case TileKind::depthwise:
      return static_cast<std::int64_t>(toc) * l.k_h * l.k_w * l.bytes_per_element + 4ll * toc;
    default:
      return 0;
  }
}

std::int64_t working_set_bytes(const LayerSpec& l, int th, int tw, int toc, int depth) {
  const std::int64_t in_rows = worst_axis_span(l.kind, l.k_h, l.stride, th);
  const std::int64_t in_cols = worst_axis_span(l.kind, l.k_w, l.stride, tw);
  const std::int64_t in_depth = full_input_depth(l.kind) ? l.in_c : toc;
  const std::int64_t in_tile = in_rows * in_cols * in_depth * l.bytes_per_element;
  const std::int64_t out_tile = static_cast<std::int64_t>(th) * tw * toc * l.bytes_per_element;
  return depth * (in_tile + out_tile + weight_slice_bytes(l, toc));
}

}  // namespace

int LayerSpec::out_h() const {
  switch (kind) {
    case TileKind::conv:
    case TileKind::depthwise:
      return ceil_div(in_h, stride);
    case TileKind::pool:
      return (in_h - k_h) / stride + 1;
    case TileKind::upsample:
      return in_h * 2;
  }
  return 0;
}

int LayerSpec::out_w() const {
  switch (kind) {
    case TileKind::conv:
    case TileKind::depthwise:
      return ceil_div(in_w, stride);
    case TileKind::pool:
      return (in_w - k_w) / stride + 1;
    case TileKind::upsample:
      return in_w * 2;
  }
  return 0;
}

std::int64_t LayerSpec::weight_bytes() const { return weight_slice_bytes(*this, out_c); }

std::int64_t LayerSpec::input_footprint_bytes() const {
  return static_cast<std::int64_t>(in_h) * in_w * in_c * bytes_per_element;
}

std::int64_t LayerSpec::output_footprint_bytes() const {
  return static_cast<std::int64_t>(out_h()) * out_w() * out_c * bytes_per_element;
}

void LayerSpec::validate() const {
  require(in_h > 0 && in_w > 0 && in_c > 0 && out_c > 0, "LayerSpec: dimensions must be positive");
  require(k_h > 0 && k_w > 0 && stride > 0, "LayerSpec: kernel/stride must be positive");
  require(bytes_per_element > 0, "LayerSpec: bytes_per_element must be positive");
  if (kind == TileKind::depthwise || kind == TileKind::pool || kind == TileKind::upsample) {
    require(in_c == out_c, "LayerSpec: channel-preserving kind needs in_c == out_c");
  }
  if (kind == TileKind::pool) {
    require(in_h >= k_h && in_w >= k_w, "LayerSpec: pool kernel exceeds input");
  }
  require(out_h() > 0 && out_w() > 0, "LayerSpec: output collapses to zero size");
}

std::string to_string(ResidencyLevel level) {
  switch (level) {
    case ResidencyLevel::L1: return "L1";
    case ResidencyLevel::L2: return "L2";
    case ResidencyLevel::L3: return "L3";
  }
  return "?";
}

InfeasibleError::InfeasibleError(std::string layer, std::string constraint)
    : std::runtime_error("layer '" + layer + "' infeasible: " + constraint),
      layer_(std::move(layer)),
      constraint_(std::move(constraint)) {}

TilePlan plan(const LayerSpec& layer, const MemoryHierarchy& mem, int buffering_depth) {
  layer.validate();
  mem.validate();
  require(buffering_depth == 2 || buffering_depth == 3, "plan: buffering_depth must be 2 or 3");

  const int oh = layer.out_h(), ow = layer.out_w(), oc = layer.out_c;
  // Candidate shapes are judged against the triple-buffered envelope so
  // tile choice (and traffic) does not depend on the requested depth.
  constexpr int kEnvelopeDepth = 3;

  const std::int64_t minimal = working_set_bytes(layer, 1, 1, 1, kEnvelopeDepth);
  if (minimal > mem.l1_bytes) {
    throw InfeasibleError(layer.name,
                          "one output element needs " + std::to_string(minimal) +
                              " bytes triple-buffered (input halo " +
                              std::to_string(worst_axis_span(layer.kind, layer.k_h, layer.stride, 1)) +
                              "x" +
                              std::to_string(worst_axis_span(layer.kind, layer.k_w, layer.stride, 1)) +
                              "x" + std::to_string(full_input_depth(layer.kind) ? layer.in_c : 1) +
                              " + weight slice " + std::to_string(weight_slice_bytes(layer, 1)) +
                              "), exceeding the L1 budget of " + std::to_string(mem.l1_bytes));
  }

  // Upsample tiles stay aligned to the x2 scale so no plan ever
  // re-fetches source rows.
  const int h_step = layer.kind == TileKind::upsample ? 2 : 1;

  // Pre-compute per-axis clipped span sums for every candidate size.
  std::vector<std::int64_t> span_h(oh + 1, 0), span_w(ow + 1, 0);
  for (int t = 1; t <= oh; ++t) {
    span_h[t] = total_axis_span(layer.kind, layer.k_h, layer.stride, layer.in_h, oh, t);
  }
  for (int t = 1; t <= ow; ++t) {
    span_w[t] = total_axis_span(layer.kind, layer.k_w, layer.stride, layer.in_w, ow, t);
  }

  const std::int64_t w_bytes = layer.weight_bytes();
  const std::int64_t out_bytes = layer.output_footprint_bytes();

  // Exhaustive scan in tie-break preference order (largest tile_h,
  // then tile_w, then tile_oc), so a strict '<' implements the
  // deterministic tie-break.
  std::int64_t best_cost = std::numeric_limits<std::int64_t>::max();
  int best_th = 0, best_tw = 0, best_toc = 0;
  for (int th = oh; th >= 1; --th) {
    if (layer.kind == TileKind::upsample && th != oh && th % h_step != 0) continue;
    for (int tw = ow; tw >= 1; --tw) {
      if (layer.kind == TileKind::upsample && tw != ow && tw % h_step != 0) continue;
      for (int toc = oc; toc >= 1; --toc) {
        if (working_set_bytes(layer, th, tw, toc, kEnvelopeDepth) > mem.l1_bytes) continue;
        const std::int64_t n_oc = ceil_div(oc, toc);
        const std::int64_t depth_factor = full_input_depth(layer.kind) ? n_oc * layer.in_c : layer.in_c;
        const std::int64_t dma_in =
            span_h[th] * span_w[tw] * depth_factor * layer.bytes_per_element + w_bytes;
        const std::int64_t cost = dma_in + out_bytes;
        if (cost < best_cost) {
          best_cost = cost;
          best_th = th;
          best_tw = tw;
          best_toc = toc;
        }
      }
    }
  }

  if (best_th == 0) {
    throw InfeasibleError(layer.name, "no tile shape fits the triple-buffered L1 budget of " +
                                          std::to_string(mem.l1_bytes) + " bytes");
  }

  TilePlan p;
  p.tile_h = best_th;
  p.tile_w = best_tw;
  p.tile_oc = best_toc;
  p.buffering_depth = buffering_depth;
  p.tiles_total = static_cast<std::int64_t>(ceil_div(oh, best_th)) * ceil_div(ow, best_tw) *
                  ceil_div(oc, best_toc);
  p.l1_working_set_bytes = working_set_bytes(layer, best_th, best_tw, best_toc, buffering_depth);
  const std::int64_t n_oc = ceil_div(oc, best_toc);
  const std::int64_t depth_factor = full_input_depth(layer.kind) ? n_oc * layer.in_c : layer.in_c;
  p.dma_bytes_in = span_h[best_th] * span_w[best_tw] * depth_factor * layer.bytes_per_element + w_bytes;
  p.dma_bytes_out = out_bytes;

  if (w_bytes == 0 ||
      w_bytes + kEnvelopeDepth * (working_set_bytes(layer, best_th, best_tw, best_toc, 1) -
                                  weight_slice_bytes(layer, best_toc)) <=
          mem.l1_bytes) {
    p.resident_level_weights = ResidencyLevel::L1;
  } else if (w_bytes <= mem.l2_bytes) {
    p.resident_level_weights = ResidencyLevel::L2;
  } else {
    p.resident_level_weights = ResidencyLevel::L3;
  }
  return p;
}

std::pair<std::int64_t, std::int64_t> traffic(const TilePlan& p, const LayerSpec& layer) {
  layer.validate();
  const int oh = layer.out_h(), ow = layer.out_w(), oc = layer.out_c;
  require(p.tile_h >= 1 && p.tile_h <= oh && p.tile_w >= 1 && p.tile_w <= ow && p.tile_oc >= 1 &&
              p.tile_oc <= oc,
          "traffic: plan does not match layer");

  std::int64_t in_bytes = layer.weight_bytes();
  for (int c0 = 0; c0 < oc; c0 += p.tile_oc) {
    const int slice = std::min(p.tile_oc, oc - c0);
    const std::int64_t depth = full_input_depth(layer.kind) ? layer.in_c : slice;
    for (int y0 = 0; y0 < oh; y0 += p.tile_h) {
      const std::int64_t rows =
          axis_span(layer.kind, layer.k_h, layer.stride, layer.in_h, y0, std::min(y0 + p.tile_h, oh));
      for (int x0 = 0; x0 < ow; x0 += p.tile_w) {
        const std::int64_t cols = axis_span(layer.kind, layer.k_w, layer.stride, layer.in_w, x0,
                                            std::min(x0 + p.tile_w, ow));
        in_bytes += rows * cols * depth * layer.bytes_per_element;
      }
    }
  }
  return {in_bytes, layer.output_footprint_bytes()};
}

std::vector<LayerSpec> layer_specs_from_model(const MicroModel& model) {
  model.validate();
  const auto shapes = model.shapes();
  std::vector<LayerSpec> specs;
  for (size_t i = 0; i < model.layers.size(); ++i) {
    const LayerDesc& l = model.layers[i];
    LayerSpec s;
    s.name = l.name;
    s.in_h = shapes[i].in_h;
    s.in_w = shapes[i].in_w;
    s.in_c = l.in_c;
    s.out_c = l.out_c;
    s.k_h = s.k_w = l.k;
    s.stride = l.stride;
    switch (l.kind) {
      case LayerKind::conv:
      case LayerKind::head:
        s.kind = TileKind::conv;
        break;
      case LayerKind::depthwise:
        s.kind = TileKind::depthwise;
        break;
      case LayerKind::maxpool:
        s.kind = TileKind::pool;
        break;
      case LayerKind::upsample:
        s.kind = TileKind::upsample;
        s.k_h = s.k_w = 1;
        s.stride = 1;
        break;
      case LayerKind::concat:
        continue;  // zero-copy aliasing in L2, nothing to tile
    }
    specs.push_back(std::move(s));
  }
  return specs;
}

GraphPlan plan_graph(const MicroModel& model, const MemoryHierarchy& mem, int buffering_depth) {
  GraphPlan g;
  for (const auto& spec : layer_specs_from_model(model)) {
    TilePlan p = plan(spec, mem, buffering_depth);
    g.dma_bytes_in += p.dma_bytes_in;
    g.dma_bytes_out += p.dma_bytes_out;
    g.per_layer.emplace_back(spec, std::move(p));
  }
  return g;
}

}  // namespace edgesim
