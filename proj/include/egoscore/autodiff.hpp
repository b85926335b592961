#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "egoscore/tensor.hpp"

namespace egoscore {

/// A named trainable tensor with its gradient and Adam moment buffers.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor first_moment;
  Tensor second_moment;
};

/// Flat registry of parameters, in registration order.
class ParamStore {
 public:
  /// Throws std::invalid_argument on a duplicate name.
  std::size_t add(std::string name, Tensor init);

  std::size_t size() const { return params_.size(); }
  bool empty() const { return params_.empty(); }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index_of(const std::string& name) const;

  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  Parameter& at(const std::string& name) { return params_[index_of(name)]; }
  const Parameter& at(const std::string& name) const { return params_[index_of(name)]; }

  std::vector<Parameter>& params() { return params_; }
  const std::vector<Parameter>& params() const { return params_; }

  std::size_t num_scalars() const;
  void zero_grad();
  /// Adds other's gradients into ours (same layout required).
  void accumulate_grads(const ParamStore& other);

  std::uint64_t step = 0;  // optimizer steps taken

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Reverse-mode tape. Nodes are appended in evaluation order; backward()
/// walks them in reverse, accumulates into parameter gradients and frees the tape.
class Tape {
 public:
  struct Var {
    std::size_t id = std::numeric_limits<std::size_t>::max();
  };
  using BackwardFn = std::function<void(Tape&)>;

  Var constant(Tensor value);
  /// Parameter leaf; on backward its gradient is added into `param.grad`
  /// when `track` is set.
  Var parameter(const Parameter& param, Parameter* track);
  /// Records an op output. `backward` reads grad(result) and adds into its inputs' grads.
  Var record(Tensor value, bool requires_grad, BackwardFn backward);

  const Tensor& value(Var v) const;
  /// Gradient buffer of v, allocated as zeros on first use.
  Tensor& grad(Var v);
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  void clear() { nodes_.clear(); }

  /// Seeds d(loss)/d(loss) = 1 and back-propagates. Throws std::logic_error
  /// if the tape is empty (no forward pass) or loss is not a scalar.
  void backward(Var loss);

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    Parameter* param = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

namespace ad {

using Var = Tape::Var;

/// x viewed as [rows, in] with in = w.dim(0); result has x's leading shape and last dim w.dim(1).
Var linear(Tape& tape, Var x, Var w, Var b);
Var relu(Tape& tape, Var x);
Var add(Tape& tape, Var a, Var b);
Var scale(Tape& tape, Var x, double factor);
Var sum(Tape& tape, Var x);

/// Scatter rows [m, k] into a zero [n, n, k] tensor at the given (q, v) cells.
Var scatter_pairs(Tape& tape, Var rows, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& cells,
                  std::size_t n);

/// out[u,v,t] = scale * sum_{q,c} state[u,q,c] * filters[q,v,c,t].
/// state: [n, n, d]; filters: [n, n, d*d] (row-major d x d per cell).
Var walk_contract(Tape& tape, Var state, Var filters, std::size_t d, double scale);

/// [n, n, d] -> [n, n, 2d]: out[u,v] = x[u,v] ++ x[v,u].
Var concat_transpose(Tape& tape, Var x);

/// A (positive, negative) pair of cells of a score matrix; each side is
/// scored by the larger of its two directed entries.
struct RankPair {
  std::uint32_t pos_u, pos_v, neg_u, neg_v;
};

/// Mean over pairs of ln(1 + exp(-(s_pos - s_neg))). scores: n*n entries.
Var pairwise_logistic(Tape& tape, Var scores, std::size_t n, const std::vector<RankPair>& pairs);

}  // namespace ad

/// Numerically stable ln(1 + exp(x)).
double softplus(double x);

}  // namespace egoscore
