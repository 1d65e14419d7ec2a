#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>

namespace edgesim {

/// Row-major dense image plane. Pixel (x, y) is plane(y, x).
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using PlaneU8 = Plane<std::uint8_t>;
using PlaneF = Plane<float>;

enum class BayerPattern { RGGB, BGGR, GRBG, GBRG };

BayerPattern bayer_pattern_from_string(const std::string& s);
std::string to_string(BayerPattern p);

/// Single-plane color filter array samples straight off the sensor.
/// Dimensions must be even so the 2x2 mosaic tiles exactly.
struct RawBayerImage {
  PlaneU8 mosaic;
  BayerPattern pattern = BayerPattern::RGGB;

  int width() const { return static_cast<int>(mosaic.cols()); }
  int height() const { return static_cast<int>(mosaic.rows()); }
  void validate() const;
};

struct RgbImage {
  std::array<PlaneU8, 3> planes;  // R, G, B

  int width() const { return static_cast<int>(planes[0].cols()); }
  int height() const { return static_cast<int>(planes[0].rows()); }
  void validate() const;

  static RgbImage constant(int width, int height, std::uint8_t value);
};

// 8-bit binary PGM (P5) carries the Bayer mosaic; binary PPM (P6)
// carries RGB. Both writers emit a fixed header layout so identical
// images produce identical bytes.
RawBayerImage load_pgm(const std::string& path, BayerPattern pattern = BayerPattern::RGGB);
void save_pgm(const std::string& path, const PlaneU8& plane);
RgbImage load_ppm(const std::string& path);
void save_ppm(const std::string& path, const RgbImage& img);

}  // namespace edgesim
