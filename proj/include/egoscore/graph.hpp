#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace egoscore {

using NodeId = std::uint64_t;
using LocalId = std::uint32_t;

/// Edge type carrying friendship age in days (−1 = no friendship).
inline constexpr int kFriendshipType = 0;
inline constexpr int kDefaultEdgeTypes = 4;

struct TypedEdge {
  NodeId src = 0;
  NodeId dst = 0;
  int etype = 0;
  double attr = 0.0;

  friend bool operator==(const TypedEdge&, const TypedEdge&) = default;
};

/// Orders by (src, dst, etype).
bool edge_less(const TypedEdge& a, const TypedEdge& b);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Map a friendship age in days to a recency weight: 28/(t+1) for t >= 0, else 0.
double transform_time(double t);

/// Attribute as seen by models: friendship age goes through transform_time,
/// other types are used raw.
double transformed_attr(int etype, double attr);

/// Dense row-major real matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Dense n x n pairwise relevance. The diagonal is never read by consumers.
struct RelevanceMatrix {
  std::size_t n = 0;
  std::vector<double> scores;

  RelevanceMatrix() = default;
  explicit RelevanceMatrix(std::size_t size, double fill = 0.0) : n(size), scores(size * size, fill) {}

  double& operator()(std::size_t u, std::size_t v) { return scores[u * n + v]; }
  double operator()(std::size_t u, std::size_t v) const { return scores[u * n + v]; }
};

/// One entry of a per-node adjacency list.
struct AdjEntry {
  NodeId nbr = 0;
  int etype = 0;
  std::uint32_t edge = 0;  // index into Graph::edges()
};

/// Typed directed multigraph over global node ids.
///
/// Edges are validated on construction (no self loops, no duplicate
/// (src, dst, etype), etype in range, friendship attr >= 0 or == −1).
/// The adjacency index is built separately by build_adjacency().
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::vector<TypedEdge> edges, int num_types = kDefaultEdgeTypes);

  int num_types() const { return num_types_; }
  /// One past the largest referenced id.
  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_referenced_nodes() const;
  std::span<const TypedEdge> edges() const { return edges_; }

  /// Build out/in/undirected neighbor indices. Idempotent.
  void build_adjacency();
  bool has_adjacency() const { return adjacency_built_; }

  /// Outgoing edges of u sorted by (dst, etype).
  std::span<const AdjEntry> out_edges(NodeId u) const;
  /// Incoming edges of u sorted by (src, etype).
  std::span<const AdjEntry> in_edges(NodeId u) const;
  /// Distinct undirected neighbors of u, ascending.
  std::span<const NodeId> neighbors(NodeId u) const;
  std::size_t degree(NodeId u) const { return neighbors(u).size(); }
  /// Any edge of any type in either direction.
  bool connected(NodeId u, NodeId v) const;
  bool has_directed_edge(NodeId src, NodeId dst) const;

 private:
  void require_adjacency() const;

  int num_types_ = kDefaultEdgeTypes;
  std::size_t num_nodes_ = 0;
  std::vector<TypedEdge> edges_;
  bool adjacency_built_ = false;
  std::vector<std::size_t> out_offsets_, in_offsets_, und_offsets_;
  std::vector<AdjEntry> out_adj_, in_adj_;
  std::vector<NodeId> und_adj_;
};

/// Returns a copy of g with its adjacency index built.
Graph build_adjacency(Graph g);

enum class GraphFormat { tsv_edges };

/// Parse `src dst etype attr` lines; `#` starts a comment line.
/// Throws ParseError (with 1-based line number) on malformed input,
/// self loops and duplicate (src, dst, etype) edges.
Graph read_graph(std::istream& in, int num_types = kDefaultEdgeTypes);
Graph load_graph(const std::filesystem::path& path, GraphFormat format = GraphFormat::tsv_edges,
                 int num_types = kDefaultEdgeTypes);
void write_graph(std::ostream& out, const Graph& g);

/// Shortest decimal text that parses back to the same double.
std::string format_real(double x);

/// Ego-centred local graph. Local id 0 is the ego; edges touching the ego are
/// folded into node_features and are absent from `edges`.
struct EgoNet {
  NodeId ego = 0;
  int num_types = kDefaultEdgeTypes;
  std::vector<NodeId> local_to_global;  // [0] == ego
  std::vector<TypedEdge> edges;         // local ids, sorted by edge_less
  Matrix node_features;                 // size() x 2*num_types
  std::vector<std::pair<LocalId, LocalId>> ground_truth;  // undirected, u < v

  std::size_t size() const { return local_to_global.size(); }
  std::size_t feature_width() const { return 2 * static_cast<std::size_t>(num_types); }

  friend bool operator==(const EgoNet&, const EgoNet&) = default;
};

/// Fill e.node_features from edges between the ego (local 0) and the other
/// members. Row u holds ego->u attributes in slots [0, T) and u->ego in
/// [T, 2T); absent edges are 0; the ego row stays 0.
void derive_node_features(EgoNet& e, std::span<const TypedEdge> raw_ego_edges);

/// n x n indicator of "some base edge exists between u and v" (either direction).
std::vector<std::uint8_t> adjacency_mask(const EgoNet& e);

/// Throws GraphError if any EgoNet invariant is violated.
void validate(const EgoNet& e);

}  // namespace egoscore
