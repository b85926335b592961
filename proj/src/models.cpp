#include "egoscore/models.hpp"

#include <filesystem>
#include <stdexcept>

#include "egoscore/checkpoint.hpp"
#include "egoscore/walkgnn.hpp"

namespace egoscore {

std::unique_ptr<InEgoModel> make_model(const std::string& name) {
  if (name == "aa") return std::make_unique<AdamicAdarModel>();
  if (name == "aa-size") return std::make_unique<AdamicAdarModel>(AdamicAdarSize::egonet_size);
  if (name == "cn") return std::make_unique<CommonNeighborsModel>();
  if (name == "waa") return std::make_unique<WeightedAdamicAdarModel>();
  if (name == "fs") return std::make_unique<FriendshipScoreModel>();
  if (!std::filesystem::exists(name)) {
    throw std::invalid_argument("unknown model '" + name + "' (expected aa, aa-size, cn, waa, fs or a checkpoint path)");
  }
  auto [cfg, params] = load_checkpoint(name);
  return std::make_unique<WalkGnnModel>(cfg, std::move(params));
}

}  // namespace egoscore
