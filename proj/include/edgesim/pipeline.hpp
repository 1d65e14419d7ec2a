#pragma once

#include "edgesim/image.hpp"

namespace edgesim {

/// Bilinear demosaic. Output has the same dimensions as the mosaic;
/// missing color samples are interpolated from clamped-edge neighbors
/// with round-half-to-even arithmetic.
RgbImage debayer(const RawBayerImage& raw);

/// Gray-world white balance: per-channel gain = mean(all)/mean(channel),
/// clamped to [0.25, 4] so degenerate scenes stay bounded.
RgbImage auto_white_balance(const RgbImage& img);

/// Bilinear resample to side x side (axes scale independently, so a
/// 640x480 source squashes to a square). side must be positive and no
/// larger than either source dimension.
RgbImage downscale(const RgbImage& img, int side);

}  // namespace edgesim
