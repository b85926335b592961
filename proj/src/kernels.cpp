#include "egoscore/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>

namespace egoscore::kernels {

namespace {

std::atomic<std::uint64_t> g_walk_ops{0};

// One output row u of the contraction. Returns the multiply-adds performed.
std::uint64_t contract_row(const double* state, const double* filters, double* out, std::size_t n, std::size_t d,
                           double scale, std::size_t u) {
  const std::size_t dd = d * d;
  double* out_u = out + u * n * d;
  std::fill(out_u, out_u + n * d, 0.0);
  std::uint64_t ops = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double* s = state + (u * n + q) * d;
    const double* f_q = filters + q * n * dd;
    for (std::size_t v = 0; v < n; ++v) {
      const double* f = f_q + v * dd;
      double* o = out_u + v * d;
      for (std::size_t c = 0; c < d; ++c) {
        const double sc = s[c];
        const double* fr = f + c * d;
        for (std::size_t t = 0; t < d; ++t) o[t] += sc * fr[t];
      }
      ops += dd;
    }
  }
  for (std::size_t i = 0; i < n * d; ++i) out_u[i] *= scale;
  return ops;
}

void grad_state_row(const double* d_out, const double* filters, double* d_state, std::size_t n, std::size_t d,
                    double scale, std::size_t u) {
  const std::size_t dd = d * d;
  for (std::size_t q = 0; q < n; ++q) {
    double* ds = d_state + (u * n + q) * d;
    for (std::size_t c = 0; c < d; ++c) {
      double acc = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        const double* dov = d_out + (u * n + v) * d;
        const double* fr = filters + (q * n + v) * dd + c * d;
        for (std::size_t t = 0; t < d; ++t) acc += dov[t] * fr[t];
      }
      ds[c] += scale * acc;
    }
  }
}

void grad_filters_row(const double* d_out, const double* state, double* d_filters, std::size_t n, std::size_t d,
                      double scale, std::size_t q) {
  const std::size_t dd = d * d;
  for (std::size_t u = 0; u < n; ++u) {
    const double* s = state + (u * n + q) * d;
    for (std::size_t v = 0; v < n; ++v) {
      const double* dov = d_out + (u * n + v) * d;
      double* df = d_filters + (q * n + v) * dd;
      for (std::size_t c = 0; c < d; ++c) {
        const double sc = scale * s[c];
        for (std::size_t t = 0; t < d; ++t) df[c * d + t] += sc * dov[t];
      }
    }
  }
}

void linear_row(const double* x, const double* w, const double* b, double* y, std::size_t in, std::size_t out,
                std::size_t i) {
  double* yi = y + i * out;
  std::copy(b, b + out, yi);
  const double* xi = x + i * in;
  for (std::size_t k = 0; k < in; ++k) {
    const double xk = xi[k];
    const double* wk = w + k * out;
    for (std::size_t j = 0; j < out; ++j) yi[j] += xk * wk[j];
  }
}

void linear_dx_row(const double* w, const double* dy, double* dx, std::size_t in, std::size_t out, std::size_t i) {
  const double* dyi = dy + i * out;
  double* dxi = dx + i * in;
  for (std::size_t k = 0; k < in; ++k) {
    const double* wk = w + k * out;
    double acc = 0.0;
    for (std::size_t j = 0; j < out; ++j) acc += dyi[j] * wk[j];
    dxi[k] += acc;
  }
}

void linear_dw_row(const double* x, const double* dy, double* dw, std::size_t m, std::size_t in, std::size_t out,
                   std::size_t k) {
  double* dwk = dw + k * out;
  for (std::size_t i = 0; i < m; ++i) {
    const double xik = x[i * in + k];
    const double* dyi = dy + i * out;
    for (std::size_t j = 0; j < out; ++j) dwk[j] += xik * dyi[j];
  }
}

void linear_db(const double* dy, double* db, std::size_t m, std::size_t out) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < out; ++j) db[j] += dy[i * out + j];
  }
}

using Index = long long;

}  // namespace

std::uint64_t walk_contract_op_count() { return g_walk_ops.load(); }
void reset_walk_contract_op_count() { g_walk_ops.store(0); }

void walk_contract_serial(std::span<const double> state, std::span<const double> filters, std::span<double> out,
                          std::size_t n, std::size_t d, double scale) {
  std::uint64_t ops = 0;
  for (std::size_t u = 0; u < n; ++u) ops += contract_row(state.data(), filters.data(), out.data(), n, d, scale, u);
  g_walk_ops += ops;
}

void walk_contract(std::span<const double> state, std::span<const double> filters, std::span<double> out,
                   std::size_t n, std::size_t d, double scale) {
  std::uint64_t ops = 0;
#pragma omp parallel for schedule(static) reduction(+ : ops)
  for (Index u = 0; u < static_cast<Index>(n); ++u) {
    ops += contract_row(state.data(), filters.data(), out.data(), n, d, scale, static_cast<std::size_t>(u));
  }
  g_walk_ops += ops;
}

void walk_contract_grad_state_serial(std::span<const double> d_out, std::span<const double> filters,
                                     std::span<double> d_state, std::size_t n, std::size_t d, double scale) {
  for (std::size_t u = 0; u < n; ++u) grad_state_row(d_out.data(), filters.data(), d_state.data(), n, d, scale, u);
}

void walk_contract_grad_state(std::span<const double> d_out, std::span<const double> filters,
                              std::span<double> d_state, std::size_t n, std::size_t d, double scale) {
#pragma omp parallel for schedule(static)
  for (Index u = 0; u < static_cast<Index>(n); ++u) {
    grad_state_row(d_out.data(), filters.data(), d_state.data(), n, d, scale, static_cast<std::size_t>(u));
  }
}

void walk_contract_grad_filters_serial(std::span<const double> d_out, std::span<const double> state,
                                       std::span<double> d_filters, std::size_t n, std::size_t d, double scale) {
  for (std::size_t q = 0; q < n; ++q) grad_filters_row(d_out.data(), state.data(), d_filters.data(), n, d, scale, q);
}

void walk_contract_grad_filters(std::span<const double> d_out, std::span<const double> state,
                                std::span<double> d_filters, std::size_t n, std::size_t d, double scale) {
#pragma omp parallel for schedule(static)
  for (Index q = 0; q < static_cast<Index>(n); ++q) {
    grad_filters_row(d_out.data(), state.data(), d_filters.data(), n, d, scale, static_cast<std::size_t>(q));
  }
}

void linear_forward_serial(std::span<const double> x, std::span<const double> w, std::span<const double> b,
                           std::span<double> y, std::size_t m, std::size_t in, std::size_t out) {
  for (std::size_t i = 0; i < m; ++i) linear_row(x.data(), w.data(), b.data(), y.data(), in, out, i);
}

void linear_forward(std::span<const double> x, std::span<const double> w, std::span<const double> b,
                    std::span<double> y, std::size_t m, std::size_t in, std::size_t out) {
#pragma omp parallel for schedule(static) if (m * in * out > 32768)
  for (Index i = 0; i < static_cast<Index>(m); ++i) {
    linear_row(x.data(), w.data(), b.data(), y.data(), in, out, static_cast<std::size_t>(i));
  }
}

void linear_backward_serial(std::span<const double> x, std::span<const double> w, std::span<const double> dy,
                            std::span<double> dx, std::span<double> dw, std::span<double> db, std::size_t m,
                            std::size_t in, std::size_t out) {
  if (!dx.empty()) {
    for (std::size_t i = 0; i < m; ++i) linear_dx_row(w.data(), dy.data(), dx.data(), in, out, i);
  }
  if (!dw.empty()) {
    for (std::size_t k = 0; k < in; ++k) linear_dw_row(x.data(), dy.data(), dw.data(), m, in, out, k);
  }
  if (!db.empty()) linear_db(dy.data(), db.data(), m, out);
}

void linear_backward(std::span<const double> x, std::span<const double> w, std::span<const double> dy,
                     std::span<double> dx, std::span<double> dw, std::span<double> db, std::size_t m,
                     std::size_t in, std::size_t out) {
  const bool big = m * in * out > 32768;
  if (!dx.empty()) {
#pragma omp parallel for schedule(static) if (big)
    for (Index i = 0; i < static_cast<Index>(m); ++i) {
      linear_dx_row(w.data(), dy.data(), dx.data(), in, out, static_cast<std::size_t>(i));
    }
  }
  if (!dw.empty()) {
#pragma omp parallel for schedule(static) if (big)
    for (Index k = 0; k < static_cast<Index>(in); ++k) {
      linear_dw_row(x.data(), dy.data(), dw.data(), m, in, out, static_cast<std::size_t>(k));
    }
  }
  if (!db.empty()) linear_db(dy.data(), db.data(), m, out);
}

}  // namespace egoscore::kernels
