#include "edgesim/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "edgesim/numeric.hpp"

namespace edgesim {

namespace {

enum Color { R = 0, G = 1, B = 2 };

// Color of mosaic position (y, x) for a given pattern.
Color color_at(BayerPattern pat, int y, int x) {
  const int r = y & 1, c = x & 1;
  switch (pat) {
    case BayerPattern::RGGB: return r == 0 ? (c == 0 ? R : G) : (c == 0 ? G : B);
    case BayerPattern::BGGR: return r == 0 ? (c == 0 ? B : G) : (c == 0 ? G : R);
    case BayerPattern::GRBG: return r == 0 ? (c == 0 ? G : R) : (c == 0 ? B : G);
    case BayerPattern::GBRG: return r == 0 ? (c == 0 ? G : B) : (c == 0 ? R : G);
  }
  return G;
}

std::uint8_t avg2_even(int a, int b) {
  return static_cast<std::uint8_t>(rounding_rshift_even(a + b, 1));
}

std::uint8_t avg4_even(int a, int b, int c, int d) {
  return static_cast<std::uint8_t>(rounding_rshift_even(a + b + c + d, 2));
}

std::uint8_t clamp_u8(std::int64_t v) {
  return static_cast<std::uint8_t>(std::clamp<std::int64_t>(v, 0, 255));
}

}  // namespace

RgbImage debayer(const RawBayerImage& raw) {
  raw.validate();
  const int w = raw.width(), h = raw.height();
  const PlaneU8& m = raw.mosaic;
  auto at = [&](int y, int x) -> int {
    return m(std::clamp(y, 0, h - 1), std::clamp(x, 0, w - 1));
  };

  RgbImage out;
  for (auto& p : out.planes) p.resize(h, w);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Color c = color_at(raw.pattern, y, x);
      const std::uint8_t raw_v = m(y, x);
      std::uint8_t r, g, b;
      if (c == G) {
        g = raw_v;
        // Horizontal neighbors share the row's non-green color.
        const Color horiz = color_at(raw.pattern, y, x + 1);
        const std::uint8_t h_avg = avg2_even(at(y, x - 1), at(y, x + 1));
        const std::uint8_t v_avg = avg2_even(at(y - 1, x), at(y + 1, x));
        r = horiz == R ? h_avg : v_avg;
        b = horiz == R ? v_avg : h_avg;
      } else {
        g = avg4_even(at(y - 1, x), at(y + 1, x), at(y, x - 1), at(y, x + 1));
        const std::uint8_t diag = avg4_even(at(y - 1, x - 1), at(y - 1, x + 1),
                                            at(y + 1, x - 1), at(y + 1, x + 1));
        r = c == R ? raw_v : diag;
        b = c == B ? raw_v : diag;
      }
      out.planes[0](y, x) = r;
      out.planes[1](y, x) = g;
      out.planes[2](y, x) = b;
    }
  }
  return out;
}

RgbImage auto_white_balance(const RgbImage& img) {
  img.validate();
  double mean[3];
  for (int c = 0; c < 3; ++c) mean[c] = img.planes[c].template cast<double>().mean();
  const double ref = (mean[0] + mean[1] + mean[2]) / 3.0;

  RgbImage out;
  for (int c = 0; c < 3; ++c) {
    const double gain = mean[c] > 0.0 ? std::clamp(ref / mean[c], 0.25, 4.0) : 4.0;
    out.planes[c] = img.planes[c].unaryExpr([gain](std::uint8_t v) {
      return clamp_u8(round_half_even(v * gain));
    });
  }
  return out;
}

RgbImage downscale(const RgbImage& img, int side) {
  img.validate();
  require(side > 0, "downscale: side must be positive");
  require(side <= img.width() && side <= img.height(),
          "downscale: side exceeds source dimensions");

  const int sw = img.width(), sh = img.height();
  const double scale_x = static_cast<double>(sw) / side;
  const double scale_y = static_cast<double>(sh) / side;

  RgbImage out;
  for (int c = 0; c < 3; ++c) {
    out.planes[c].resize(side, side);
    const PlaneU8& src = img.planes[c];
    for (int Y = 0; Y < side; ++Y) {
      const double sy = std::clamp((Y + 0.5) * scale_y - 0.5, 0.0, sh - 1.0);
      const int y0 = static_cast<int>(sy);
      const int y1 = std::min(y0 + 1, sh - 1);
      const double fy = sy - y0;
      for (int X = 0; X < side; ++X) {
        const double sx = std::clamp((X + 0.5) * scale_x - 0.5, 0.0, sw - 1.0);
        const int x0 = static_cast<int>(sx);
        const int x1 = std::min(x0 + 1, sw - 1);
        const double fx = sx - x0;
        const double v = (1 - fy) * ((1 - fx) * src(y0, x0) + fx * src(y0, x1)) +
                         fy * ((1 - fx) * src(y1, x0) + fx * src(y1, x1));
        out.planes[c](Y, X) = clamp_u8(round_half_even(v));
      }
    }
  }
  return out;
}

}  // namespace edgesim
