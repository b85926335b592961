#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "egoscore/graph.hpp"

namespace egoscore {

// Ego-net text format, one block per ego-net:
//
//   E <ego_global_id> <n>
//   N <local_id> <global_id> <f_0> ... <f_{2T-1}>     (n lines, local ids 0..n-1)
//   A <src> <dst> <etype> <attr>                      (intra ego-net edges)
//   G <u> <v>                                         (optional ground truth)
//
// Reals are written as the shortest decimal string that round-trips.

void write_egonet(std::ostream& out, const EgoNet& e);

/// Streams EgoNet blocks from a text source.
class EgoNetReader {
 public:
  explicit EgoNetReader(std::istream& in);
  explicit EgoNetReader(const std::filesystem::path& path);

  /// Next block, or nullopt at end of input. Throws ParseError.
  std::optional<EgoNet> next();

 private:
  bool fetch_line();

  std::ifstream file_;
  std::istream* in_;
  std::string line_;
  std::size_t line_no_ = 0;
  bool pending_ = false;
};

std::vector<EgoNet> read_egonets(std::istream& in);
std::vector<EgoNet> load_egonets(const std::filesystem::path& path);
void save_egonets(const std::filesystem::path& path, const std::vector<EgoNet>& egonets);

}  // namespace egoscore
