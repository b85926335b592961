#include "egoscore/autodiff.hpp"

#include <cmath>
#include <stdexcept>

#include "egoscore/kernels.hpp"

namespace egoscore {

std::size_t ParamStore::add(std::string name, Tensor init) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter name " + name);
  Parameter p;
  p.grad = Tensor(init.shape());
  p.first_moment = Tensor(init.shape());
  p.second_moment = Tensor(init.shape());
  p.value = std::move(init);
  p.name = name;
  index_.emplace(std::move(name), params_.size());
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

std::size_t ParamStore::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named " + name);
  return it->second;
}

std::size_t ParamStore::num_scalars() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p.value.size();
  return total;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

void ParamStore::accumulate_grads(const ParamStore& other) {
  if (other.params_.size() != params_.size()) throw std::invalid_argument("parameter layouts differ");
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i].grad += other.params_[i].grad;
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

Tape::Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return {nodes_.size() - 1};
}

Tape::Var Tape::parameter(const Parameter& param, Parameter* track) {
  Node node;
  node.external = &param.value;
  node.param = track;
  node.requires_grad = track != nullptr;
  nodes_.push_back(std::move(node));
  return {nodes_.size() - 1};
}

Tape::Var Tape::record(Tensor value, bool requires_grad, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return {nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
  const Node& node = nodes_.at(v.id);
  return node.external ? *node.external : node.value;
}

Tensor& Tape::grad(Var v) {
  Node& node = nodes_.at(v.id);
  if (node.grad.shape() != value(v).shape() || node.grad.size() != value(v).size()) {
    node.grad = Tensor(value(v).shape());
  }
  return node.grad;
}

void Tape::backward(Var loss) {
  if (nodes_.empty() || loss.id >= nodes_.size()) throw std::logic_error("backward called without a recorded forward pass");
  if (value(loss).size() != 1) throw std::logic_error("backward needs a scalar loss");
  grad(loss)[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || node.grad.empty()) continue;
    if (node.backward) node.backward(*this);
    if (node.param) node.param->grad += node.grad;
  }
  nodes_.clear();
}

namespace ad {

Var linear(Tape& tape, Var x, Var w, Var b) {
  const Tensor& xv = tape.value(x);
  const Tensor& wv = tape.value(w);
  if (wv.rank() != 2 || tape.value(b).size() != wv.dim(1)) throw std::invalid_argument("linear: bad weight shapes");
  const std::size_t in = wv.dim(0), out = wv.dim(1);
  if (xv.rank() == 0 || xv.shape().back() != in) throw std::invalid_argument("linear: input width mismatch");
  const std::size_t m = xv.size() / in;
  auto shape = xv.shape();
  shape.back() = out;
  Tensor y(shape);
  kernels::linear_forward(xv.data(), wv.data(), tape.value(b).data(), y.data(), m, in, out);
  const bool rg = tape.requires_grad(x) || tape.requires_grad(w) || tape.requires_grad(b);
  Var self{tape.size()};
  return tape.record(std::move(y), rg, [=](Tape& t) {
    const Tensor& dy = t.grad(self);
    std::span<double> dx, dw, db;
    if (t.requires_grad(x)) dx = t.grad(x).data();
    if (t.requires_grad(w)) dw = t.grad(w).data();
    if (t.requires_grad(b)) db = t.grad(b).data();
    kernels::linear_backward(t.value(x).data(), t.value(w).data(), dy.data(), dx, dw, db, m, in, out);
  });
}

Var relu(Tape& tape, Var x) {
  Tensor y = tape.value(x);
  for (double& v : y.data()) v = v < 0.0 ? 0.0 : v;  // NaN passes through
  Var self{tape.size()};
  return tape.record(std::move(y), tape.requires_grad(x), [=](Tape& t) {
    const Tensor& dy = t.grad(self);
    const Tensor& xv = t.value(x);
    Tensor& dx = t.grad(x);
    for (std::size_t i = 0; i < dx.size(); ++i) {
      if (xv[i] > 0.0) dx[i] += dy[i];
    }
  });
}

Var add(Tape& tape, Var a, Var b) {
  if (tape.value(a).shape() != tape.value(b).shape()) throw std::invalid_argument("add: shape mismatch");
  Tensor y = tape.value(a);
  y += tape.value(b);
  Var self{tape.size()};
  return tape.record(std::move(y), tape.requires_grad(a) || tape.requires_grad(b), [=](Tape& t) {
    const Tensor dy = t.grad(self);
    if (t.requires_grad(a)) t.grad(a) += dy;
    if (t.requires_grad(b)) t.grad(b) += dy;
  });
}

Var scale(Tape& tape, Var x, double factor) {
  Tensor y = tape.value(x);
  for (double& v : y.data()) v *= factor;
  Var self{tape.size()};
  return tape.record(std::move(y), tape.requires_grad(x), [=](Tape& t) {
    const Tensor& dy = t.grad(self);
    Tensor& dx = t.grad(x);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += factor * dy[i];
  });
}

Var sum(Tape& tape, Var x) {
  double total = 0.0;
  for (double v : tape.value(x).data()) total += v;
  Var self{tape.size()};
  return tape.record(Tensor({1}, std::vector<double>{total}), tape.requires_grad(x), [=](Tape& t) {
    const double g = t.grad(self)[0];
    for (double& v : t.grad(x).data()) v += g;
  });
}

Var scatter_pairs(Tape& tape, Var rows, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& cells,
                  std::size_t n) {
  const Tensor& r = tape.value(rows);
  if (r.rank() != 2 || r.dim(0) != cells.size()) throw std::invalid_argument("scatter_pairs: rows must be [m, k]");
  const std::size_t k = r.dim(1);
  Tensor y({n, n, k});
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto [q, v] = cells[i];
    std::copy_n(r.ptr() + i * k, k, y.ptr() + (q * n + v) * k);
  }
  Var self{tape.size()};
  return tape.record(std::move(y), tape.requires_grad(rows), [=](Tape& t) {
    const Tensor& dy = t.grad(self);
    Tensor& dr = t.grad(rows);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto [q, v] = cells[i];
      const double* src = dy.ptr() + (q * n + v) * k;
      double* dst = dr.ptr() + i * k;
      for (std::size_t j = 0; j < k; ++j) dst[j] += src[j];
    }
  });
}

Var walk_contract(Tape& tape, Var state, Var filters, std::size_t d, double scale_factor) {
  const Tensor& s = tape.value(state);
  const Tensor& f = tape.value(filters);
  if (s.rank() != 3 || s.dim(0) != s.dim(1) || s.dim(2) != d) throw std::invalid_argument("walk_contract: state must be [n, n, d]");
  const std::size_t n = s.dim(0);
  if (f.size() != n * n * d * d) throw std::invalid_argument("walk_contract: filters must be [n, n, d, d]");
  Tensor out({n, n, d});
  kernels::walk_contract(s.data(), f.data(), out.data(), n, d, scale_factor);
  Var self{tape.size()};
  const bool rg = tape.requires_grad(state) || tape.requires_grad(filters);
  return tape.record(std::move(out), rg, [=](Tape& t) {
    const Tensor& dy = t.grad(self);
    if (t.requires_grad(state)) {
      kernels::walk_contract_grad_state(dy.data(), t.value(filters).data(), t.grad(state).data(), n, d, scale_factor);
    }
    if (t.requires_grad(filters)) {
      kernels::walk_contract_grad_filters(dy.data(), t.value(state).data(), t.grad(filters).data(), n, d, scale_factor);
    }
  });
}

Var concat_transpose(Tape& tape, Var x) {
  const Tensor& xv = tape.value(x);
  if (xv.rank() != 3 || xv.dim(0) != xv.dim(1)) throw std::invalid_argument("concat_transpose: expected [n, n, d]");
  const std::size_t n = xv.dim(0), d = xv.dim(2);
  Tensor y({n, n, 2 * d});
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      double* dst = y.ptr() + (u * n + v) * 2 * d;
      std::copy_n(xv.ptr() + (u * n + v) * d, d, dst);
      std::copy_n(xv.ptr() + (v * n + u) * d, d, dst + d);
    }
  }
  Var self{tape.size()};
  return tape.record(std::move(y), tape.requires_grad(x), [=](Tape& t) {
    const Tensor& dy = t.grad(self);
    Tensor& dx = t.grad(x);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        const double* src = dy.ptr() + (u * n + v) * 2 * d;
        double* a = dx.ptr() + (u * n + v) * d;
        double* b = dx.ptr() + (v * n + u) * d;
        for (std::size_t c = 0; c < d; ++c) {
          a[c] += src[c];
          b[c] += src[d + c];
        }
      }
    }
  });
}

Var pairwise_logistic(Tape& tape, Var scores, std::size_t n, const std::vector<RankPair>& pairs) {
  const Tensor& s = tape.value(scores);
  if (s.size() != n * n) throw std::invalid_argument("pairwise_logistic: scores must have n*n entries");
  if (pairs.empty()) throw std::invalid_argument("pairwise_logistic: no pairs");
  // index of the larger directed entry of an undirected pair
  auto pick = [&s, n](std::uint32_t u, std::uint32_t v) {
    const std::size_t a = u * n + v, b = v * n + u;
    return s[a] >= s[b] ? a : b;
  };
  std::vector<std::size_t> pos(pairs.size()), neg(pairs.size());
  std::vector<double> gaps(pairs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    pos[i] = pick(pairs[i].pos_u, pairs[i].pos_v);
    neg[i] = pick(pairs[i].neg_u, pairs[i].neg_v);
    gaps[i] = s[pos[i]] - s[neg[i]];
    total += softplus(-gaps[i]);
  }
  const double count = static_cast<double>(pairs.size());
  Var self{tape.size()};
  return tape.record(Tensor({1}, std::vector<double>{total / count}), tape.requires_grad(scores), [=](Tape& t) {
    const double g = t.grad(self)[0] / count;
    Tensor& ds = t.grad(scores);
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      // d/dgap ln(1 + e^{-gap}) = -sigmoid(-gap)
      const double sig = 1.0 / (1.0 + std::exp(gaps[i]));
      ds[pos[i]] -= g * sig;
      ds[neg[i]] += g * sig;
    }
  });
}

}  // namespace ad
}  // namespace egoscore
