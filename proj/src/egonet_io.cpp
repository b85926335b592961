#include "egoscore/egonet_io.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "text_util.hpp"

namespace egoscore {

void write_egonet(std::ostream& out, const EgoNet& e) {
  out << "E " << e.ego << ' ' << e.size() << '\n';
  for (std::size_t u = 0; u < e.size(); ++u) {
    out << "N " << u << ' ' << e.local_to_global[u];
    for (double f : e.node_features.row(u)) out << ' ' << format_real(f);
    out << '\n';
  }
  for (const auto& a : e.edges) {
    out << "A " << a.src << ' ' << a.dst << ' ' << a.etype << ' ' << format_real(a.attr) << '\n';
  }
  for (const auto& [u, v] : e.ground_truth) out << "G " << u << ' ' << v << '\n';
}

EgoNetReader::EgoNetReader(std::istream& in) : in_(&in) {}

EgoNetReader::EgoNetReader(const std::filesystem::path& path) : file_(path), in_(&file_) {
  if (!file_) throw GraphError("cannot open ego-net file " + path.string());
}

bool EgoNetReader::fetch_line() {
  while (std::getline(*in_, line_)) {
    ++line_no_;
    auto first = line_.find_first_not_of(" \t\r");
    if (first == std::string::npos || line_[first] == '#') continue;
    return true;
  }
  return false;
}

std::optional<EgoNet> EgoNetReader::next() {
  using detail::parse_field;
  if (!pending_ && !fetch_line()) return std::nullopt;
  pending_ = false;

  auto toks = detail::split_ws(line_);
  if (toks[0] != "E" || toks.size() != 3) throw ParseError(line_no_, "expected `E <ego> <n>` header");
  EgoNet e;
  std::size_t n = 0;
  if (!parse_field(toks[1], e.ego) || !parse_field(toks[2], n) || n == 0) {
    throw ParseError(line_no_, "malformed ego-net header");
  }
  e.local_to_global.assign(n, 0);
  std::vector<bool> seen(n, false);
  std::size_t nodes_read = 0;
  std::size_t width = 0;

  while (fetch_line()) {
    toks = detail::split_ws(line_);
    const auto tag = toks[0];
    if (tag == "E") {
      pending_ = true;
      break;
    }
    if (tag == "N") {
      if (nodes_read == n) throw ParseError(line_no_, "more N lines than declared");
      if (toks.size() < 3) throw ParseError(line_no_, "malformed node line");
      const std::size_t w = toks.size() - 3;
      if (nodes_read == 0) {
        if (w == 0 || w % 2 != 0) throw ParseError(line_no_, "node feature width must be 2T > 0");
        width = w;
        e.num_types = static_cast<int>(w / 2);
        e.node_features = Matrix(n, w);
      } else if (w != width) {
        throw ParseError(line_no_, "inconsistent node feature width");
      }
      LocalId id = 0;
      NodeId global = 0;
      if (!parse_field(toks[1], id) || !parse_field(toks[2], global) || id >= n || seen[id]) {
        throw ParseError(line_no_, "bad node id");
      }
      seen[id] = true;
      e.local_to_global[id] = global;
      for (std::size_t f = 0; f < w; ++f) {
        if (!parse_field(toks[3 + f], e.node_features(id, f))) throw ParseError(line_no_, "bad node feature");
      }
      ++nodes_read;
    } else if (tag == "A") {
      if (nodes_read != n) throw ParseError(line_no_, "A line before all N lines");
      TypedEdge a;
      if (toks.size() != 5 || !parse_field(toks[1], a.src) || !parse_field(toks[2], a.dst) ||
          !parse_field(toks[3], a.etype) || !parse_field(toks[4], a.attr)) {
        throw ParseError(line_no_, "malformed edge line");
      }
      e.edges.push_back(a);
    } else if (tag == "G") {
      if (nodes_read != n) throw ParseError(line_no_, "G line before all N lines");
      LocalId u = 0, v = 0;
      if (toks.size() != 3 || !parse_field(toks[1], u) || !parse_field(toks[2], v)) {
        throw ParseError(line_no_, "malformed ground-truth line");
      }
      if (u > v) std::swap(u, v);
      e.ground_truth.emplace_back(u, v);
    } else {
      throw ParseError(line_no_, "unknown record tag `" + std::string(tag) + "`");
    }
  }
  if (nodes_read != n) throw ParseError(line_no_, "ego-net ended before all N lines were read");
  try {
    validate(e);
  } catch (const GraphError& err) {
    throw ParseError(line_no_, std::string("invalid ego-net ") + std::to_string(e.ego) + ": " + err.what());
  }
  return e;
}

std::vector<EgoNet> read_egonets(std::istream& in) {
  EgoNetReader reader(in);
  std::vector<EgoNet> out;
  while (auto e = reader.next()) out.push_back(std::move(*e));
  return out;
}

std::vector<EgoNet> load_egonets(const std::filesystem::path& path) {
  EgoNetReader reader(path);
  std::vector<EgoNet> out;
  while (auto e = reader.next()) out.push_back(std::move(*e));
  return out;
}

void save_egonets(const std::filesystem::path& path, const std::vector<EgoNet>& egonets) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot write " + path.string());
  for (const auto& e : egonets) write_egonet(out, e);
  if (!out) throw GraphError("write failed for " + path.string());
}

}  // namespace egoscore
