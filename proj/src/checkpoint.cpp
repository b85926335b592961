#include "egoscore/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace egoscore {

namespace {

constexpr char kMagic[8] = {'E', 'G', 'O', 'S', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw std::runtime_error("truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_checkpoint(std::ostream& out, const WalkGnnConfig& cfg, const ParamStore& params) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.layers));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.hidden));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.mlp_depth));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.mlp_hidden));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.num_types));
  put<std::uint8_t>(out, cfg.directed_concat);
  put<std::uint8_t>(out, cfg.residual);
  put<std::uint8_t>(out, cfg.node_features);
  put<std::uint8_t>(out, cfg.edge_attrs);
  put<std::uint8_t>(out, cfg.zero_init_layer_output);
  put<std::uint64_t>(out, cfg.seed);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params.params()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (auto dim : p.value.shape()) put<std::uint64_t>(out, dim);
    for (double v : p.value.data()) put<double>(out, v);
  }
  if (!out) throw std::runtime_error("failed writing checkpoint");
}

std::pair<WalkGnnConfig, ParamStore> read_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("not an egoscore checkpoint");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  WalkGnnConfig cfg;
  cfg.layers = static_cast<int>(get<std::uint32_t>(in));
  cfg.hidden = static_cast<int>(get<std::uint32_t>(in));
  cfg.mlp_depth = static_cast<int>(get<std::uint32_t>(in));
  cfg.mlp_hidden = static_cast<int>(get<std::uint32_t>(in));
  cfg.num_types = static_cast<int>(get<std::uint32_t>(in));
  cfg.directed_concat = get<std::uint8_t>(in) != 0;
  cfg.residual = get<std::uint8_t>(in) != 0;
  cfg.node_features = get<std::uint8_t>(in) != 0;
  cfg.edge_attrs = get<std::uint8_t>(in) != 0;
  cfg.zero_init_layer_output = get<std::uint8_t>(in) != 0;
  cfg.seed = get<std::uint64_t>(in);

  ParamStore params;
  const auto count = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(get<std::uint32_t>(in), '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(name.size()))) throw std::runtime_error("truncated checkpoint");
    const auto rank = get<std::uint32_t>(in);
    std::vector<std::size_t> shape(rank);
    for (auto& dim : shape) dim = static_cast<std::size_t>(get<std::uint64_t>(in));
    Tensor value(shape);
    for (double& v : value.data()) v = get<double>(in);
    params.add(std::move(name), std::move(value));
  }
  WalkGnn(cfg).check_params(params);
  return {cfg, std::move(params)};
}

void save_checkpoint(const std::filesystem::path& path, const WalkGnnConfig& cfg, const ParamStore& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  write_checkpoint(out, cfg, params);
}

std::pair<WalkGnnConfig, ParamStore> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace egoscore
