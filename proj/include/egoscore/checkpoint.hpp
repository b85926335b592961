#pragma once

#include <filesystem>
#include <iosfwd>
#include <utility>

#include "egoscore/autodiff.hpp"
#include "egoscore/walkgnn.hpp"

namespace egoscore {

// Binary checkpoint layout (all integers and reals little-endian):
//
//   "EGOSCKPT"                    8-byte magic
//   u32 version                   == 1
//   config: u32 layers, hidden, mlp_depth, mlp_hidden, num_types;
//           u8 directed_concat, residual, node_features, edge_attrs, zero_init_layer_output;
//           u64 seed
//   u32 parameter count
//   per parameter: u32 name length, name bytes, u32 rank, u64 dims[rank],
//                  f64 values[prod(dims)] (raw IEEE-754 bits)

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const WalkGnnConfig& cfg, const ParamStore& params);
std::pair<WalkGnnConfig, ParamStore> read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const WalkGnnConfig& cfg, const ParamStore& params);
std::pair<WalkGnnConfig, ParamStore> load_checkpoint(const std::filesystem::path& path);

}  // namespace egoscore
