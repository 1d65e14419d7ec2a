#include "edgesim/model_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace edgesim {

namespace {

constexpr char kMagic[4] = {'E', 'D', 'G', 'S'};
constexpr std::uint32_t kVersion = 1;

// x86-64 target; raw writes are little-endian by construction.
template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error(path + ": truncated model file");
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in, const std::string& path) {
  const auto n = read_pod<std::uint32_t>(in, path);
  if (n > 1u << 16) throw std::runtime_error(path + ": implausible string length");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw std::runtime_error(path + ": truncated model file");
  return s;
}

}  // namespace

void save_model(const std::string& path, const MicroModel& model) {
  model.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");

  out.write(kMagic, 4);
  write_pod<std::uint32_t>(out, kVersion);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(model.input_side));
  write_pod<double>(out, model.input_scale);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(model.layers.size()));

  for (const auto& l : model.layers) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(l.kind));
    write_string(out, l.name);
    write_pod<std::int32_t>(out, l.input_layer);
    write_pod<std::int32_t>(out, l.concat_with);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(l.in_c));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(l.out_c));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(l.k));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(l.stride));
    write_pod<std::uint8_t>(out, l.relu ? 1 : 0);
    write_pod<double>(out, l.out_scale);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(l.anchors.size()));
    for (const auto& a : l.anchors) {
      write_pod<double>(out, a[0]);
      write_pod<double>(out, a[1]);
    }
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(l.weights.numel()));
    if (l.weights.numel() > 0) {
      out.write(reinterpret_cast<const char*>(l.weights.data.data()),
                static_cast<std::streamsize>(l.weights.numel()));
      write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(l.weights.qparams.scales.size()));
      for (Eigen::Index i = 0; i < l.weights.qparams.scales.size(); ++i) {
        write_pod<double>(out, l.weights.qparams.scales[i]);
      }
      write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(l.bias.size()));
      for (std::int32_t b : l.bias) write_pod<std::int32_t>(out, b);
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

MicroModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error(path + ": not an EDGS model file");
  }
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw std::runtime_error(path + ": unsupported model version " + std::to_string(version));
  }

  MicroModel m;
  m.input_side = static_cast<int>(read_pod<std::uint32_t>(in, path));
  m.input_scale = read_pod<double>(in, path);
  const auto layer_count = read_pod<std::uint32_t>(in, path);
  if (layer_count == 0 || layer_count > 4096) {
    throw std::runtime_error(path + ": implausible layer count");
  }

  m.layers.resize(layer_count);
  for (auto& l : m.layers) {
    const auto kind = read_pod<std::uint32_t>(in, path);
    if (kind > static_cast<std::uint32_t>(LayerKind::head)) {
      throw std::runtime_error(path + ": unknown layer kind");
    }
    l.kind = static_cast<LayerKind>(kind);
    l.name = read_string(in, path);
    l.input_layer = read_pod<std::int32_t>(in, path);
    l.concat_with = read_pod<std::int32_t>(in, path);
    l.in_c = static_cast<int>(read_pod<std::uint32_t>(in, path));
    l.out_c = static_cast<int>(read_pod<std::uint32_t>(in, path));
    l.k = static_cast<int>(read_pod<std::uint32_t>(in, path));
    l.stride = static_cast<int>(read_pod<std::uint32_t>(in, path));
    l.relu = read_pod<std::uint8_t>(in, path) != 0;
    l.out_scale = read_pod<double>(in, path);
    const auto anchor_count = read_pod<std::uint32_t>(in, path);
    if (anchor_count > 64) throw std::runtime_error(path + ": implausible anchor count");
    l.anchors.resize(anchor_count);
    for (auto& a : l.anchors) {
      a[0] = read_pod<double>(in, path);
      a[1] = read_pod<double>(in, path);
    }
    const auto weight_count = read_pod<std::uint32_t>(in, path);
    if (weight_count > 1u << 28) throw std::runtime_error(path + ": implausible weight count");
    if (weight_count > 0) {
      const int icg = l.kind == LayerKind::depthwise ? 1 : l.in_c;
      l.weights.shape = {l.out_c, icg, l.k, l.k};
      l.weights.data.resize(weight_count);
      in.read(reinterpret_cast<char*>(l.weights.data.data()), weight_count);
      if (!in) throw std::runtime_error(path + ": truncated weight blob");
      const auto scale_count = read_pod<std::uint32_t>(in, path);
      l.weights.qparams.granularity = Granularity::per_channel;
      l.weights.qparams.scales.resize(scale_count);
      for (std::uint32_t i = 0; i < scale_count; ++i) {
        l.weights.qparams.scales[i] = read_pod<double>(in, path);
      }
      const auto bias_count = read_pod<std::uint32_t>(in, path);
      l.bias.resize(bias_count);
      for (auto& b : l.bias) b = read_pod<std::int32_t>(in, path);
    }
  }

  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": invalid model: " + e.what());
  }
  return m;
}

}  // namespace edgesim
