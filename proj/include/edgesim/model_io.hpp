#pragma once

#include <string>

#include "edgesim/nn.hpp"

namespace edgesim {

/// Flat binary model container. Layout (all integers and floats
/// little-endian):
///   magic "EDGS", u32 version, u32 input_side, f64 input_scale,
///   u32 layer_count, then per layer: descriptor (kind, name, producer
///   indices, dims, activation scale, anchors), raw INT8 weight blob,
///   per-out-channel weight scales (f64) and int32 biases.
void save_model(const std::string& path, const MicroModel& model);
MicroModel load_model(const std::string& path);

}  // namespace edgesim
