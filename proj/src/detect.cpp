#include "edgesim/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edgesim/numeric.hpp"

namespace edgesim {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Confidence stays strictly below 1 even where double sigmoid
// saturates, so a threshold of 1.0 rejects everything.
double confidence_sigmoid(double x) {
  return std::min(sigmoid(x), std::nextafter(1.0, 0.0));
}

constexpr double kMinBoxSide = 1e-3;  // floor after unit-square clamping

}  // namespace

double iou(const DetectionBox& a, const DetectionBox& b) {
  const double ax0 = a.cx - a.w / 2, ax1 = a.cx + a.w / 2;
  const double ay0 = a.cy - a.h / 2, ay1 = a.cy + a.h / 2;
  const double bx0 = b.cx - b.w / 2, bx1 = b.cx + b.w / 2;
  const double by0 = b.cy - b.h / 2, by1 = b.cy + b.h / 2;
  const double ix = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
  const double iy = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<DetectionBox> decode(const Tensor& head, const std::vector<std::array<double, 2>>& anchors,
                                 double conf_threshold) {
  require(conf_threshold > 0.0 && conf_threshold <= 1.0, "decode: conf_threshold must be in (0,1]");
  require(head.shape.size() == 3, "decode: head tensor must be {c, gh, gw}");
  const int na = static_cast<int>(anchors.size());
  require(head.shape[0] == na * 5, "decode: head channels must be 5 per anchor");
  const int gh = head.shape[1];
  const int gw = head.shape[2];
  const std::int64_t plane = static_cast<std::int64_t>(gh) * gw;

  std::vector<DetectionBox> out;
  for (int a = 0; a < na; ++a) {
    const float* tx = head.data.data() + (a * 5 + 0) * plane;
    const float* ty = head.data.data() + (a * 5 + 1) * plane;
    const float* tw = head.data.data() + (a * 5 + 2) * plane;
    const float* th = head.data.data() + (a * 5 + 3) * plane;
    const float* tobj = head.data.data() + (a * 5 + 4) * plane;
    for (int gy = 0; gy < gh; ++gy) {
      for (int gx = 0; gx < gw; ++gx) {
        const std::int64_t i = static_cast<std::int64_t>(gy) * gw + gx;
        const double conf = confidence_sigmoid(tobj[i]);
        if (conf < conf_threshold) continue;
        DetectionBox box;
        box.confidence = conf;
        box.cx = (gx + 2.0 * sigmoid(tx[i]) - 0.5) / gw;
        box.cy = (gy + 2.0 * sigmoid(ty[i]) - 0.5) / gh;
        const double sw = 2.0 * sigmoid(tw[i]);
        const double sh = 2.0 * sigmoid(th[i]);
        box.w = sw * sw * anchors[a][0];
        box.h = sh * sh * anchors[a][1];
        // Clamp corners to the unit square, keeping a positive size;
        // the center shifts inward when the size floor kicks in.
        const double x0 = std::clamp(box.cx - box.w / 2, 0.0, 1.0);
        const double x1 = std::clamp(box.cx + box.w / 2, 0.0, 1.0);
        const double y0 = std::clamp(box.cy - box.h / 2, 0.0, 1.0);
        const double y1 = std::clamp(box.cy + box.h / 2, 0.0, 1.0);
        box.w = std::max(x1 - x0, kMinBoxSide);
        box.h = std::max(y1 - y0, kMinBoxSide);
        box.cx = std::clamp((x0 + x1) / 2, box.w / 2, 1.0 - box.w / 2);
        box.cy = std::clamp((y0 + y1) / 2, box.h / 2, 1.0 - box.h / 2);
        out.push_back(box);
      }
    }
  }
  return out;
}

std::vector<DetectionBox> decode_all(const MicroModel& model, const ForwardResult& fwd,
                                     double conf_threshold) {
  const auto heads = model.head_indices();
  require(heads.size() == fwd.head_tensors.size(), "decode_all: head count mismatch");
  std::vector<DetectionBox> out;
  for (size_t i = 0; i < heads.size(); ++i) {
    auto boxes = decode(fwd.head_tensors[i], model.layers[heads[i]].anchors, conf_threshold);
    out.insert(out.end(), boxes.begin(), boxes.end());
  }
  return out;
}

std::vector<DetectionBox> nms(std::vector<DetectionBox> boxes, double iou_threshold) {
  require(iou_threshold >= 0.0 && iou_threshold <= 1.0, "nms: iou_threshold must be in [0,1]");
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return boxes[a].confidence > boxes[b].confidence;
  });

  std::vector<DetectionBox> kept;
  for (std::size_t i : order) {
    bool suppressed = false;
    for (const auto& k : kept) {
      if (iou(boxes[i], k) >= iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(boxes[i]);
  }
  return kept;
}

std::size_t count_occupancy(const std::vector<DetectionBox>& boxes) { return boxes.size(); }

}  // namespace edgesim
