// Regenerates the binary fixtures shipped with the repository:
//   models/micro_192.edgs            seeded random-weight detector
//   fixtures/planted_192.edgs        brightness-detector weights with a
//                                    known response (decode oracle)
//   fixtures/planted_3heads_192x192.pgm  mosaic with three bright blobs
//   fixtures/black_192x192.pgm       all-zero mosaic
//   fixtures/gradient_640x480.pgm    smooth full-frame mosaic
//
// Everything is deterministic; run from the repository root.

#include <iostream>
#include <string>

#include "edgesim/image.hpp"
#include "edgesim/model_io.hpp"
#include "edgesim/nn.hpp"
#include "edgesim/pipeline.hpp"

using namespace edgesim;

namespace {

// Grid cells (12x12 at side 192) that carry a planted occupant.
constexpr int kPlantedCells[3][2] = {{2, 2}, {6, 8}, {9, 4}};  // (gy, gx)

// The planted model threads mean brightness through channel 0 of the
// backbone via center taps, hands it to the heads through the concat
// skip branch (channel 96), and turns it into an objectness logit of
// 8*brightness - 4 on the first fine-grid anchor. All other paths are
// zero; the remaining objectness channels carry a -12 bias so they stay
// silent.
MicroModel build_planted_model() {
  MicroModel m = micro_model_skeleton(192);

  std::vector<Tensor> weights_f(m.layers.size());
  std::vector<std::vector<float>> bias_f(m.layers.size());
  for (size_t i = 0; i < m.layers.size(); ++i) {
    LayerDesc& l = m.layers[i];
    l.out_scale = 1.0 / 127.0;
    if (!l.has_weights()) continue;
    const int icg = l.kind == LayerKind::depthwise ? 1 : l.in_c;
    weights_f[i] = Tensor::zeros({l.out_c, icg, l.k, l.k});
    bias_f[i].assign(l.out_c, 0.0f);
  }

  auto w_at = [&](size_t layer, int oc, int ic, int ky, int kx) -> float& {
    const LayerDesc& l = m.layers[layer];
    const int icg = l.kind == LayerKind::depthwise ? 1 : l.in_c;
    return weights_f[layer].data[((static_cast<std::int64_t>(oc) * icg + ic) * l.k + ky) * l.k + kx];
  };

  // conv0: channel 0 = mean of the three input channels (center tap)
  for (int c = 0; c < 3; ++c) w_at(0, 0, c, 1, 1) = 1.0f / 3.0f;
  // conv2..conv4: channel 0 passthrough (center tap keeps the even-grid sample)
  w_at(2, 0, 0, 1, 1) = 1.0f;
  w_at(3, 0, 0, 1, 1) = 1.0f;
  w_at(4, 0, 0, 1, 1) = 1.0f;
  // conv5/neck6 stay zero: the heads read the skip branch instead.
  // dw9: concat channel 96 is conv4's channel 0; keep it.
  w_at(9, 96, 0, 1, 1) = 1.0f;
  // conv10 (1x1): channel 0 = dw channel 96
  w_at(10, 0, 96, 0, 0) = 1.0f;

  // Heads: 5 fields per anchor, objectness at index 4. Logit scale 12/127.
  for (size_t head : {size_t{11}, size_t{12}}) {
    m.layers[head].out_scale = 12.0 / 127.0;
    for (int a = 0; a < 3; ++a) {
      const int obj = a * 5 + 4;
      const bool hot = head == 11 && a == 0;
      w_at(head, obj, hot ? 0 : 1, 0, 0) = 8.0f;  // channel 1 is always silent
      bias_f[head][obj] = hot ? -4.0f : -12.0f;
    }
  }

  finalize_quantization(m, weights_f, bias_f);
  return m;
}

PlaneU8 planted_mosaic() {
  PlaneU8 mosaic = PlaneU8::Constant(192, 192, 16);
  for (const auto& cell : kPlantedCells) {
    // cell (gy, gx) samples source pixels [16*gy, 16*gy+1] x [16*gx, 16*gx+1];
    // a 12x12 blob centered there covers the window with margin.
    const int cy = 16 * cell[0], cx = 16 * cell[1];
    for (int y = cy - 5; y <= cy + 6; ++y) {
      for (int x = cx - 5; x <= cx + 6; ++x) {
        mosaic(y, x) = 255;
      }
    }
  }
  return mosaic;
}

PlaneU8 gradient_mosaic() {
  PlaneU8 m(480, 640);
  for (int y = 0; y < 480; ++y) {
    for (int x = 0; x < 640; ++x) {
      m(y, x) = static_cast<std::uint8_t>((x * 200) / 639 + (y * 55) / 479);
    }
  }
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string root = argc > 1 ? argv[1] : ".";
  try {
    save_model(root + "/models/micro_192.edgs", build_micro_model(192, 42));
    save_model(root + "/fixtures/planted_192.edgs", build_planted_model());
    RawBayerImage planted;
    planted.mosaic = planted_mosaic();
    planted.pattern = BayerPattern::RGGB;
    save_pgm(root + "/fixtures/planted_3heads_192x192.pgm", planted.mosaic);
    save_ppm(root + "/fixtures/planted_rgb_192x192.ppm", auto_white_balance(debayer(planted)));
    save_pgm(root + "/fixtures/black_192x192.pgm", PlaneU8::Zero(192, 192));
    save_pgm(root + "/fixtures/gradient_640x480.pgm", gradient_mosaic());
  } catch (const std::exception& e) {
    std::cerr << "genfixtures: " << e.what() << "\n";
    return 1;
  }
  std::cout << "fixtures written under " << root << "\n";
  return 0;
}
