#include <gtest/gtest.h>

#include <omp.h>

#include <random>
#include <vector>

#include "egoscore/kernels.hpp"

namespace egoscore {
namespace {

std::vector<double> random_vector(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(size);
  for (auto& x : v) x = dist(rng);
  return v;
}

class KernelSizes : public ::testing::TestWithParam<std::pair<std::size_t, std::size_t>> {};

TEST_P(KernelSizes, WalkContractMatchesNaiveLoops) {
  const auto [n, d] = GetParam();
  const auto state = random_vector(n * n * d, 1);
  const auto filters = random_vector(n * n * d * d, 2);
  std::vector<double> out(n * n * d, 99.0);
  kernels::walk_contract_serial(state, filters, out, n, d, 0.5);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t t = 0; t < d; ++t) {
        double acc = 0.0;
        for (std::size_t q = 0; q < n; ++q) {
          for (std::size_t c = 0; c < d; ++c) acc += state[(u * n + q) * d + c] * filters[((q * n + v) * d + c) * d + t];
        }
        EXPECT_NEAR(out[(u * n + v) * d + t], 0.5 * acc, 1e-12);
      }
    }
  }
}

TEST_P(KernelSizes, ParallelBitIdenticalToSerial) {
  const auto [n, d] = GetParam();
  const auto state = random_vector(n * n * d, 3);
  const auto filters = random_vector(n * n * d * d, 4);
  const auto d_out = random_vector(n * n * d, 5);

  std::vector<double> a(n * n * d), b(n * n * d);
  kernels::walk_contract_serial(state, filters, a, n, d, 0.25);
  std::vector<double> gs_a(n * n * d, 0.1), gs_b(n * n * d, 0.1);
  kernels::walk_contract_grad_state_serial(d_out, filters, gs_a, n, d, 0.25);
  std::vector<double> gf_a(n * n * d * d, 0.2), gf_b(n * n * d * d, 0.2);
  kernels::walk_contract_grad_filters_serial(d_out, state, gf_a, n, d, 0.25);

  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    std::fill(gs_b.begin(), gs_b.end(), 0.1);
    std::fill(gf_b.begin(), gf_b.end(), 0.2);
    kernels::walk_contract(state, filters, b, n, d, 0.25);
    kernels::walk_contract_grad_state(d_out, filters, gs_b, n, d, 0.25);
    kernels::walk_contract_grad_filters(d_out, state, gf_b, n, d, 0.25);
    EXPECT_EQ(a, b) << threads;
    EXPECT_EQ(gs_a, gs_b) << threads;
    EXPECT_EQ(gf_a, gf_b) << threads;
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, KernelSizes,
                         ::testing::Values(std::pair<std::size_t, std::size_t>{1, 1}, std::pair<std::size_t, std::size_t>{3, 2},
                                           std::pair<std::size_t, std::size_t>{7, 4},
                                           std::pair<std::size_t, std::size_t>{12, 8}));

TEST(Kernels, GradientsAreAdjointOfForward) {
  // <d_out, contract(state, filters)> is bilinear; its partials are the grad kernels.
  const std::size_t n = 5, d = 3;
  const auto state = random_vector(n * n * d, 6);
  const auto filters = random_vector(n * n * d * d, 7);
  const auto d_out = random_vector(n * n * d, 8);
  std::vector<double> out(n * n * d);
  kernels::walk_contract_serial(state, filters, out, n, d, 1.0);
  double lhs = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) lhs += d_out[i] * out[i];

  std::vector<double> gs(n * n * d, 0.0), gf(n * n * d * d, 0.0);
  kernels::walk_contract_grad_state_serial(d_out, filters, gs, n, d, 1.0);
  kernels::walk_contract_grad_filters_serial(d_out, state, gf, n, d, 1.0);
  double via_state = 0.0, via_filters = 0.0;
  for (std::size_t i = 0; i < gs.size(); ++i) via_state += gs[i] * state[i];
  for (std::size_t i = 0; i < gf.size(); ++i) via_filters += gf[i] * filters[i];
  EXPECT_NEAR(via_state, lhs, 1e-10);
  EXPECT_NEAR(via_filters, lhs, 1e-10);
}

TEST(Kernels, LinearMatchesNaiveAndParallel) {
  const std::size_t m = 17, in = 6, out = 5;
  const auto x = random_vector(m * in, 9);
  const auto w = random_vector(in * out, 10);
  const auto b = random_vector(out, 11);
  const auto dy = random_vector(m * out, 12);
  std::vector<double> y(m * out), y_par(m * out);
  kernels::linear_forward_serial(x, w, b, y, m, in, out);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < in; ++i) acc += x[r * in + i] * w[i * out + o];
      EXPECT_NEAR(y[r * out + o], acc, 1e-12);
    }
  }
  std::vector<double> dx(m * in, 0.0), dw(in * out, 0.0), db(out, 0.0);
  kernels::linear_backward_serial(x, w, dy, dx, dw, db, m, in, out);
  for (std::size_t i = 0; i < in; ++i) {
    for (std::size_t o = 0; o < out; ++o) {
      double acc = 0.0;
      for (std::size_t r = 0; r < m; ++r) acc += x[r * in + i] * dy[r * out + o];
      EXPECT_NEAR(dw[i * out + o], acc, 1e-12);
    }
  }
  for (int threads : {1, 3}) {
    omp_set_num_threads(threads);
    kernels::linear_forward(x, w, b, y_par, m, in, out);
    EXPECT_EQ(y, y_par);
    std::vector<double> dx2(m * in, 0.0), dw2(in * out, 0.0), db2(out, 0.0);
    kernels::linear_backward(x, w, dy, dx2, dw2, db2, m, in, out);
    EXPECT_EQ(dx, dx2);
    EXPECT_EQ(dw, dw2);
    EXPECT_EQ(db, db2);
  }
}

TEST(Kernels, LinearBackwardSkipsNullSpans) {
  const std::size_t m = 2, in = 3, out = 2;
  const auto x = random_vector(m * in, 13);
  const auto w = random_vector(in * out, 14);
  const auto dy = random_vector(m * out, 15);
  std::vector<double> dw(in * out, 0.0);
  kernels::linear_backward(x, w, dy, {}, dw, {}, m, in, out);
  double total = 0.0;
  for (double g : dw) total += std::abs(g);
  EXPECT_GT(total, 0.0);
}

TEST(Kernels, OpCountIsCubicInN) {
  const std::size_t d = 2;
  for (std::size_t n : {4, 8}) {
    const auto state = random_vector(n * n * d, 16);
    const auto filters = random_vector(n * n * d * d, 17);
    std::vector<double> out(n * n * d);
    kernels::reset_walk_contract_op_count();
    kernels::walk_contract(state, filters, out, n, d, 1.0);
    EXPECT_EQ(kernels::walk_contract_op_count(), n * n * n * d * d);
  }
}

}  // namespace
}  // namespace egoscore
