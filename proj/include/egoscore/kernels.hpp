#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

// Dense kernels behind WalkConv and the MLP layers.
//
// Every kernel has a *_serial reference and an OpenMP version. The parallel
// versions split work so that each output element is written by exactly one
// thread in a fixed summation order, so results are bit-identical to the
// serial reference for any thread count.
//
// Layouts (row-major):
//   state   [n, n, d]       state[u, q, c]
//   filters [n, n, d, d]    filters[q, v, c, t]
//   out     [n, n, d]       out[u, v, t]

namespace egoscore::kernels {

/// Scalar multiply-adds executed by the walk_contract forward kernels since the last reset.
std::uint64_t walk_contract_op_count();
void reset_walk_contract_op_count();

/// out[u,v,t] = scale * sum_{q,c} state[u,q,c] * filters[q,v,c,t]   (overwrites out)
void walk_contract_serial(std::span<const double> state, std::span<const double> filters, std::span<double> out,
                          std::size_t n, std::size_t d, double scale);
void walk_contract(std::span<const double> state, std::span<const double> filters, std::span<double> out,
                   std::size_t n, std::size_t d, double scale);

/// d_state[u,q,c] += scale * sum_{v,t} d_out[u,v,t] * filters[q,v,c,t]
void walk_contract_grad_state_serial(std::span<const double> d_out, std::span<const double> filters,
                                     std::span<double> d_state, std::size_t n, std::size_t d, double scale);
void walk_contract_grad_state(std::span<const double> d_out, std::span<const double> filters,
                              std::span<double> d_state, std::size_t n, std::size_t d, double scale);

/// d_filters[q,v,c,t] += scale * sum_u state[u,q,c] * d_out[u,v,t]
void walk_contract_grad_filters_serial(std::span<const double> d_out, std::span<const double> state,
                                       std::span<double> d_filters, std::size_t n, std::size_t d, double scale);
void walk_contract_grad_filters(std::span<const double> d_out, std::span<const double> state,
                                std::span<double> d_filters, std::size_t n, std::size_t d, double scale);

/// y[m, out] = x[m, in] * w[in, out] + b[out]   (overwrites y)
void linear_forward_serial(std::span<const double> x, std::span<const double> w, std::span<const double> b,
                           std::span<double> y, std::size_t m, std::size_t in, std::size_t out);
void linear_forward(std::span<const double> x, std::span<const double> w, std::span<const double> b,
                    std::span<double> y, std::size_t m, std::size_t in, std::size_t out);

/// dx += dy * w^T ; dw += x^T * dy ; db += colsum(dy). Null spans are skipped.
void linear_backward_serial(std::span<const double> x, std::span<const double> w, std::span<const double> dy,
                            std::span<double> dx, std::span<double> dw, std::span<double> db, std::size_t m,
                            std::size_t in, std::size_t out);
void linear_backward(std::span<const double> x, std::span<const double> w, std::span<const double> dy,
                     std::span<double> dx, std::span<double> dw, std::span<double> db, std::size_t m,
                     std::size_t in, std::size_t out);

}  // namespace egoscore::kernels
