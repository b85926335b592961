#include "egoscore/graph.hpp"

#include "text_util.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <system_error>
#include <tuple>

namespace egoscore {

bool edge_less(const TypedEdge& a, const TypedEdge& b) {
  return std::tie(a.src, a.dst, a.etype) < std::tie(b.src, b.dst, b.etype);
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

double transform_time(double t) {
  if (!(t >= 0.0)) return 0.0;
  return 28.0 / (t + 1.0);
}

double transformed_attr(int etype, double attr) {
  return etype == kFriendshipType ? transform_time(attr) : attr;
}

namespace {

// Returns an empty string when the edge is valid.
std::string edge_problem(const TypedEdge& e, int num_types) {
  if (e.src == e.dst) return "self-loop on node " + std::to_string(e.src);
  if (e.etype < 0 || e.etype >= num_types) {
    return "edge type " + std::to_string(e.etype) + " outside [0, " + std::to_string(num_types) + ")";
  }
  if (!std::isfinite(e.attr)) return "non-finite edge attribute";
  if (e.etype == kFriendshipType && e.attr < 0.0 && e.attr != -1.0) {
    return "friendship age must be >= 0 or -1";
  }
  return {};
}

}  // namespace

Graph::Graph(std::vector<TypedEdge> edges, int num_types) : num_types_(num_types), edges_(std::move(edges)) {
  if (num_types_ < 1) throw GraphError("num_types must be >= 1");
  for (const auto& e : edges_) {
    if (auto why = edge_problem(e, num_types_); !why.empty()) throw GraphError(why);
    num_nodes_ = std::max<std::size_t>(num_nodes_, std::max(e.src, e.dst) + 1);
  }
  std::vector<std::uint32_t> order(edges_.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return edge_less(edges_[a], edges_[b]); });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& a = edges_[order[i - 1]];
    const auto& b = edges_[order[i]];
    if (a.src == b.src && a.dst == b.dst && a.etype == b.etype) {
      throw GraphError("duplicate edge " + std::to_string(a.src) + " " + std::to_string(a.dst) + " type " +
                       std::to_string(a.etype));
    }
  }
}

std::size_t Graph::num_referenced_nodes() const {
  std::vector<NodeId> ids;
  ids.reserve(edges_.size() * 2);
  for (const auto& e : edges_) {
    ids.push_back(e.src);
    ids.push_back(e.dst);
  }
  std::sort(ids.begin(), ids.end());
  return static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

void Graph::build_adjacency() {
  if (adjacency_built_) return;
  const std::size_t n = num_nodes_;
  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) {
    ++out_offsets_[e.src + 1];
    ++in_offsets_[e.dst + 1];
  }
  std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
  std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());
  out_adj_.resize(edges_.size());
  in_adj_.resize(edges_.size());
  {
    std::vector<std::size_t> out_fill(out_offsets_.begin(), out_offsets_.end() - 1);
    std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
    for (std::uint32_t i = 0; i < edges_.size(); ++i) {
      const auto& e = edges_[i];
      out_adj_[out_fill[e.src]++] = {e.dst, e.etype, i};
      in_adj_[in_fill[e.dst]++] = {e.src, e.etype, i};
    }
  }
  auto by_nbr = [](const AdjEntry& a, const AdjEntry& b) { return std::tie(a.nbr, a.etype) < std::tie(b.nbr, b.etype); };
  for (std::size_t u = 0; u < n; ++u) {
    std::sort(out_adj_.begin() + out_offsets_[u], out_adj_.begin() + out_offsets_[u + 1], by_nbr);
    std::sort(in_adj_.begin() + in_offsets_[u], in_adj_.begin() + in_offsets_[u + 1], by_nbr);
  }

  und_offsets_.assign(n + 1, 0);
  und_adj_.clear();
  und_adj_.reserve(edges_.size() * 2);
  for (std::size_t u = 0; u < n; ++u) {
    const std::size_t start = und_adj_.size();
    for (std::size_t i = out_offsets_[u]; i < out_offsets_[u + 1]; ++i) und_adj_.push_back(out_adj_[i].nbr);
    for (std::size_t i = in_offsets_[u]; i < in_offsets_[u + 1]; ++i) und_adj_.push_back(in_adj_[i].nbr);
    std::sort(und_adj_.begin() + start, und_adj_.end());
    und_adj_.erase(std::unique(und_adj_.begin() + start, und_adj_.end()), und_adj_.end());
    und_offsets_[u + 1] = und_adj_.size();
  }
  adjacency_built_ = true;
}

void Graph::require_adjacency() const {
  if (!adjacency_built_) throw std::logic_error("Graph adjacency not built; call build_adjacency()");
}

std::span<const AdjEntry> Graph::out_edges(NodeId u) const {
  require_adjacency();
  if (u >= num_nodes_) return {};
  return {out_adj_.data() + out_offsets_[u], out_offsets_[u + 1] - out_offsets_[u]};
}

std::span<const AdjEntry> Graph::in_edges(NodeId u) const {
  require_adjacency();
  if (u >= num_nodes_) return {};
  return {in_adj_.data() + in_offsets_[u], in_offsets_[u + 1] - in_offsets_[u]};
}

std::span<const NodeId> Graph::neighbors(NodeId u) const {
  require_adjacency();
  if (u >= num_nodes_) return {};
  return {und_adj_.data() + und_offsets_[u], und_offsets_[u + 1] - und_offsets_[u]};
}

bool Graph::connected(NodeId u, NodeId v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

bool Graph::has_directed_edge(NodeId src, NodeId dst) const {
  auto out = out_edges(src);
  auto it = std::lower_bound(out.begin(), out.end(), dst, [](const AdjEntry& a, NodeId v) { return a.nbr < v; });
  return it != out.end() && it->nbr == dst;
}

Graph build_adjacency(Graph g) {
  g.build_adjacency();
  return g;
}

Graph read_graph(std::istream& in, int num_types) {
  using detail::parse_field;
  std::vector<TypedEdge> edges;
  std::vector<std::size_t> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = detail::split_ws(line);
    if (toks.empty() || toks[0].front() == '#') continue;
    if (toks.size() != 4) throw ParseError(line_no, "expected 4 fields `src dst etype attr`");
    TypedEdge e;
    if (!parse_field(toks[0], e.src) || !parse_field(toks[1], e.dst) || !parse_field(toks[2], e.etype) ||
        !parse_field(toks[3], e.attr)) {
      throw ParseError(line_no, "malformed edge");
    }
    if (auto why = edge_problem(e, num_types); !why.empty()) throw ParseError(line_no, why);
    edges.push_back(e);
    lines.push_back(line_no);
  }

  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return edge_less(edges[a], edges[b]); });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& a = edges[order[i - 1]];
    const auto& b = edges[order[i]];
    if (a.src == b.src && a.dst == b.dst && a.etype == b.etype) {
      throw ParseError(lines[order[i]], "duplicate edge (first seen on line " + std::to_string(lines[order[i - 1]]) + ")");
    }
  }
  return Graph(std::move(edges), num_types);
}

Graph load_graph(const std::filesystem::path& path, GraphFormat format, int num_types) {
  if (format != GraphFormat::tsv_edges) throw GraphError("unsupported graph format");
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open graph file " + path.string());
  auto g = read_graph(in, num_types);
  g.build_adjacency();
  return g;
}

std::string format_real(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("format_real failed");
  return std::string(buf, ptr);
}

void write_graph(std::ostream& out, const Graph& g) {
  for (const auto& e : g.edges()) {
    out << e.src << ' ' << e.dst << ' ' << e.etype << ' ' << format_real(e.attr) << '\n';
  }
}

void derive_node_features(EgoNet& e, std::span<const TypedEdge> raw_ego_edges) {
  const std::size_t n = e.size();
  const std::size_t t_count = static_cast<std::size_t>(e.num_types);
  e.node_features = Matrix(n, 2 * t_count);
  for (const auto& edge : raw_ego_edges) {
    if (edge.etype < 0 || edge.etype >= e.num_types) throw GraphError("ego edge type out of range");
    if (edge.src >= n || edge.dst >= n) throw GraphError("ego edge endpoint outside the ego-net");
    const double value = transformed_attr(edge.etype, edge.attr);
    if (edge.src == 0 && edge.dst != 0) {
      e.node_features(edge.dst, static_cast<std::size_t>(edge.etype)) = value;
    } else if (edge.dst == 0 && edge.src != 0) {
      e.node_features(edge.src, t_count + static_cast<std::size_t>(edge.etype)) = value;
    } else {
      throw GraphError("edge " + std::to_string(edge.src) + "->" + std::to_string(edge.dst) +
                       " is not incident to the ego");
    }
  }
}

std::vector<std::uint8_t> adjacency_mask(const EgoNet& e) {
  const std::size_t n = e.size();
  std::vector<std::uint8_t> mask(n * n, 0);
  for (const auto& edge : e.edges) {
    mask[edge.src * n + edge.dst] = 1;
    mask[edge.dst * n + edge.src] = 1;
  }
  return mask;
}

void validate(const EgoNet& e) {
  const std::size_t n = e.size();
  if (n == 0) throw GraphError("ego-net has no nodes");
  if (e.local_to_global[0] != e.ego) throw GraphError("local id 0 must map to the ego");
  if (e.node_features.rows != n || e.node_features.cols != e.feature_width()) {
    throw GraphError("node_features must be n x 2T");
  }
  {
    auto ids = e.local_to_global;
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw GraphError("duplicate global id in ego-net");
  }
  for (const auto& edge : e.edges) {
    if (edge.src == 0 || edge.dst == 0) throw GraphError("intra ego-net edge touches the ego");
    if (edge.src >= n || edge.dst >= n) throw GraphError("edge endpoint outside the ego-net");
    if (auto why = edge_problem(edge, e.num_types); !why.empty()) throw GraphError(why);
  }
  const auto mask = adjacency_mask(e);
  for (const auto& [u, v] : e.ground_truth) {
    if (u == 0 || v == 0 || u >= n || v >= n || u >= v) throw GraphError("bad ground-truth pair");
    if (mask[u * n + v]) throw GraphError("ground-truth pair has a base edge");
  }
}

}  // namespace egoscore
