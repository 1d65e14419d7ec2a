#include "edgesim/image.hpp"

#include <fstream>
#include <stdexcept>

#include "edgesim/numeric.hpp"

namespace edgesim {

BayerPattern bayer_pattern_from_string(const std::string& s) {
  if (s == "RGGB") return BayerPattern::RGGB;
  if (s == "BGGR") return BayerPattern::BGGR;
  if (s == "GRBG") return BayerPattern::GRBG;
  if (s == "GBRG") return BayerPattern::GBRG;
  throw std::invalid_argument("unknown Bayer pattern: " + s);
}

std::string to_string(BayerPattern p) {
  switch (p) {
    case BayerPattern::RGGB: return "RGGB";
    case BayerPattern::BGGR: return "BGGR";
    case BayerPattern::GRBG: return "GRBG";
    case BayerPattern::GBRG: return "GBRG";
  }
  return "?";
}

void RawBayerImage::validate() const {
  require(width() >= 2 && height() >= 2, "RawBayerImage: dimensions must be >= 2");
  require(width() % 2 == 0 && height() % 2 == 0, "RawBayerImage: dimensions must be even");
}

void RgbImage::validate() const {
  for (const auto& p : planes) {
    require(p.rows() == planes[0].rows() && p.cols() == planes[0].cols(),
            "RgbImage: plane sizes must match");
  }
  require(width() > 0 && height() > 0, "RgbImage: empty image");
}

RgbImage RgbImage::constant(int width, int height, std::uint8_t value) {
  RgbImage img;
  for (auto& p : img.planes) p = PlaneU8::Constant(height, width, value);
  return img;
}

namespace {

// Reads one whitespace-delimited token, skipping '#' comment lines.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (!std::isspace(c)) {
      tok.push_back(static_cast<char>(c));
      break;
    }
  }
  while ((c = in.get()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(c));
  if (tok.empty()) throw std::runtime_error("truncated PNM header");
  return tok;
}

int parse_dim(const std::string& tok, const char* what) {
  try {
    const int v = std::stoi(tok);
    if (v <= 0 || v > 1 << 16) throw std::out_of_range("out of range");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("bad PNM ") + what + ": " + tok);
  }
}

PlaneU8 read_pnm_payload(std::istream& in, const char* magic_want, const std::string& path, int planes_interleaved) {
  std::string magic = next_token(in);
  if (magic != magic_want) {
    throw std::runtime_error(path + ": expected " + magic_want + " header, got " + magic);
  }
  const int w = parse_dim(next_token(in), "width");
  const int h = parse_dim(next_token(in), "height");
  const int maxval = parse_dim(next_token(in), "maxval");
  if (maxval != 255) throw std::runtime_error(path + ": only maxval 255 supported");
  // exactly one whitespace byte separates header from payload (already consumed)
  PlaneU8 data(h, w * planes_interleaved);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size())) {
    throw std::runtime_error(path + ": truncated pixel payload");
  }
  return data;
}

}  // namespace

RawBayerImage load_pgm(const std::string& path, BayerPattern pattern) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  RawBayerImage img;
  img.mosaic = read_pnm_payload(in, "P5", path, 1);
  img.pattern = pattern;
  img.validate();
  return img;
}

void save_pgm(const std::string& path, const PlaneU8& plane) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "P5\n" << plane.cols() << " " << plane.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(plane.data()),
            static_cast<std::streamsize>(plane.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

RgbImage load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  PlaneU8 interleaved = read_pnm_payload(in, "P6", path, 3);
  const int h = static_cast<int>(interleaved.rows());
  const int w = static_cast<int>(interleaved.cols()) / 3;
  RgbImage img;
  for (auto& p : img.planes) p.resize(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.planes[0](y, x) = interleaved(y, 3 * x + 0);
      img.planes[1](y, x) = interleaved(y, 3 * x + 1);
      img.planes[2](y, x) = interleaved(y, 3 * x + 2);
    }
  }
  img.validate();
  return img;
}

void save_ppm(const std::string& path, const RgbImage& img) {
  img.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const int h = img.height(), w = img.width();
  out << "P6\n" << w << " " << h << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      row[3 * x + 0] = img.planes[0](y, x);
      row[3 * x + 1] = img.planes[1](y, x);
      row[3 * x + 2] = img.planes[2](y, x);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace edgesim
