// Whole-pipeline runs: camera frame -> demosaic -> white balance ->
// downscale -> quantized inference -> decode -> suppression -> count.

#include <random>

#include "doctest.h"
#include "edgesim/detect.hpp"
#include "edgesim/model_io.hpp"
#include "edgesim/pipeline.hpp"

using namespace edgesim;

namespace {

const std::string kRoot = EDGESIM_SOURCE_DIR;

std::vector<DetectionBox> run_pipeline(const RawBayerImage& raw, const MicroModel& model,
                                       double conf, double iou_thr) {
  const RgbImage prepared = downscale(auto_white_balance(debayer(raw)), model.input_side);
  return nms(decode_all(model, forward(model, prepared), conf), iou_thr);
}

}  // namespace

TEST_CASE("full camera frame through the quantized detector is deterministic") {
  const MicroModel model = load_model(kRoot + "/models/micro_192.edgs");
  const RawBayerImage raw = load_pgm(kRoot + "/fixtures/gradient_640x480.pgm");

  const auto a = run_pipeline(raw, model, 0.4, 0.5);
  const auto b = run_pipeline(raw, model, 0.4, 0.5);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].cx == b[i].cx);
    CHECK(a[i].cy == b[i].cy);
    CHECK(a[i].confidence == b[i].confidence);
  }
  for (const auto& box : a) {
    CHECK(box.confidence >= 0.4);
    CHECK(box.cx - box.w / 2 >= -1e-12);
    CHECK(box.cx + box.w / 2 <= 1 + 1e-12);
    CHECK(box.cy - box.h / 2 >= -1e-12);
    CHECK(box.cy + box.h / 2 <= 1 + 1e-12);
    CHECK(box.w > 0);
    CHECK(box.h > 0);
  }
  // survivors are mutually below the suppression threshold
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = i + 1; j < a.size(); ++j) {
      CHECK(iou(a[i], a[j]) < 0.5);
    }
  }
}

TEST_CASE("planted fixture: three occupants in, three detections out") {
  const MicroModel model = load_model(kRoot + "/fixtures/planted_192.edgs");
  const RawBayerImage raw = load_pgm(kRoot + "/fixtures/planted_3heads_192x192.pgm");
  const auto boxes = run_pipeline(raw, model, 0.4, 0.5);
  CHECK(count_occupancy(boxes) == 3);
  // planted cells (gy,gx) = (2,2), (6,8), (9,4) of the 12x12 grid
  REQUIRE(boxes.size() == 3);
  std::vector<std::pair<double, double>> want = {
      {2.5 / 12, 2.5 / 12}, {8.5 / 12, 6.5 / 12}, {4.5 / 12, 9.5 / 12}};  // (cx, cy)
  for (const auto& [cx, cy] : want) {
    bool found = false;
    for (const auto& b : boxes) {
      if (std::abs(b.cx - cx) < 1e-6 && std::abs(b.cy - cy) < 1e-6) found = true;
    }
    CHECK(found);
  }

  const RawBayerImage dark = load_pgm(kRoot + "/fixtures/black_192x192.pgm");
  CHECK(count_occupancy(run_pipeline(dark, model, 0.4, 0.5)) == 0);
}

TEST_CASE("tighter confidence threshold never yields more detections") {
  const MicroModel model = load_model(kRoot + "/models/micro_192.edgs");
  const RawBayerImage raw = load_pgm(kRoot + "/fixtures/gradient_640x480.pgm");
  size_t prev = SIZE_MAX;
  for (double conf : {0.3, 0.5, 0.7, 0.9}) {
    const size_t n = run_pipeline(raw, model, conf, 0.5).size();
    CHECK(n <= prev);
    prev = n;
  }
}
