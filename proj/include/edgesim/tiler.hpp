#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "edgesim/nn.hpp"

namespace edgesim {

/// Three-level memory hierarchy the planner partitions against.
struct MemoryHierarchy {
  std::int64_t l1_bytes = 0;
  std::int64_t l2_bytes = 0;
  std::int64_t l3_bytes = 0;

  static MemoryHierarchy defaults();  // 128 KiB / 1.5 MiB / 64 MiB
  void validate() const;              // positive, l1 < l2 < l3
};

enum class TileKind { conv, depthwise, pool, upsample };

/// Operator description the planner works on. Convolutions are
/// same-padded, pools valid, upsample is nearest x2. Everything is
/// 1 byte per element (INT8 deployment).
struct LayerSpec {
  std::string name;
  TileKind kind = TileKind::conv;
  int in_h = 0, in_w = 0;
  int in_c = 0, out_c = 0;
  int k_h = 1, k_w = 1;
  int stride = 1;
  int bytes_per_element = 1;

  int out_h() const;
  int out_w() const;
  std::int64_t weight_bytes() const;       // kernel blob + 4-byte bias per out channel
  std::int64_t input_footprint_bytes() const;
  std::int64_t output_footprint_bytes() const;
  void validate() const;
};

enum class ResidencyLevel { L1, L2, L3 };
std::string to_string(ResidencyLevel level);

/// Static partitioning of one operator: rectangular output tiles over
/// (h, w, out-channel) with full input depth per regular-conv tile.
struct TilePlan {
  int tile_h = 0, tile_w = 0, tile_oc = 0;
  int buffering_depth = 3;
  std::int64_t tiles_total = 0;
  std::int64_t l1_working_set_bytes = 0;  // buffering_depth x (in + out + weight slice)
  std::int64_t dma_bytes_in = 0;
  std::int64_t dma_bytes_out = 0;
  ResidencyLevel resident_level_weights = ResidencyLevel::L1;
};

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(std::string layer, std::string constraint);
  const std::string& layer() const { return layer_; }
  const std::string& constraint() const { return constraint_; }

 private:
  std::string layer_;
  std::string constraint_;
};

/// Chooses the feasible tiling that minimizes dma_bytes_in +
/// dma_bytes_out, tie-breaking toward the largest tile_h, then tile_w,
/// then tile_oc. Candidates are always evaluated against the
/// triple-buffered envelope 3 x (in + out + weights) <= L1, so the
/// chosen tiles (and hence the traffic) are identical for
/// buffering_depth 2 and 3; the requested depth scales the reported
/// residency only. Throws InfeasibleError when even a single output
/// element's dependencies exceed that envelope.
TilePlan plan(const LayerSpec& layer, const MemoryHierarchy& mem, int buffering_depth);

/// Exact DMA byte counts for an arbitrary (not necessarily optimal)
/// plan, computed by walking every tile and its clipped input window --
/// an independent route from the closed form plan() uses.
std::pair<std::int64_t, std::int64_t> traffic(const TilePlan& plan, const LayerSpec& layer);

struct GraphPlan {
  std::vector<std::pair<LayerSpec, TilePlan>> per_layer;
  std::int64_t dma_bytes_in = 0;
  std::int64_t dma_bytes_out = 0;
};

/// Per-layer plans for every tileable operator of the model (concat is
/// a zero-copy L2 aliasing step and is not planned).
GraphPlan plan_graph(const MicroModel& model, const MemoryHierarchy& mem, int buffering_depth);

/// Tileable operators of a model as planner layer specs.
std::vector<LayerSpec> layer_specs_from_model(const MicroModel& model);

}  // namespace edgesim
