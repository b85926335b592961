#pragma once

#include <memory>
#include <string>

#include "egoscore/heuristics.hpp"

namespace egoscore {

/// `aa`, `aa-size`, `cn`, `waa`, `fs`, or a path to a WalkGNN checkpoint.
std::unique_ptr<InEgoModel> make_model(const std::string& name);

}  // namespace egoscore
