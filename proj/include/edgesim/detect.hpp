#pragma once

#include <vector>

#include "edgesim/nn.hpp"

namespace edgesim {

/// Normalized box (center + size in [0,1]) with its confidence.
/// Single-class task: class_id is always 0 ("head").
struct DetectionBox {
  double cx = 0, cy = 0, w = 0, h = 0;
  double confidence = 0;
  int class_id = 0;
};

/// Intersection over union of two center-format boxes; symmetric, in [0,1].
double iou(const DetectionBox& a, const DetectionBox& b);

/// Standard anchor decode of one head tensor {anchors*5, gh, gw}:
/// sigmoid offsets for the center, (2*sigmoid)^2 anchor scaling for the
/// size, sigmoid objectness as confidence. Boxes below conf_threshold
/// are dropped; survivors are clamped to the unit square.
std::vector<DetectionBox> decode(const Tensor& head, const std::vector<std::array<double, 2>>& anchors,
                                 double conf_threshold);

/// Decode every head of a forward result.
std::vector<DetectionBox> decode_all(const MicroModel& model, const ForwardResult& fwd,
                                     double conf_threshold);

/// Greedy non-maximum suppression in descending confidence order
/// (index order breaks ties, so the result is deterministic). A box is
/// suppressed when its IoU with an already-kept box reaches iou_threshold.
std::vector<DetectionBox> nms(std::vector<DetectionBox> boxes, double iou_threshold);

/// Occupancy estimate: the number of boxes surviving suppression.
std::size_t count_occupancy(const std::vector<DetectionBox>& boxes);

}  // namespace edgesim
