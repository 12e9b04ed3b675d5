#include "open_dgd/kernels.hpp"
#include "open_dgd/random_instances.hpp"

#include <gtest/gtest.h>

namespace odgd {
namespace {

struct Case {
  ProblemInstance inst;
  Vector x;
};

// Sizes straddle the parallel threshold so both code paths run.
Case make_case(int agents, int dim, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  RandomInstanceSpec spec{agents, {1.0, 25.0, dim}, 2.0};
  ProblemInstance inst = random_instance(spec, rng);
  std::normal_distribution<double> g;
  Vector x(agents * dim);
  for (auto& v : x) v = g(rng);
  return {std::move(inst), std::move(x)};
}

class KernelEquality : public ::testing::TestWithParam<std::tuple<int, int>> {};

TEST_P(KernelEquality, SerialAndParallelAreBitwiseEqual) {
  const auto [agents, dim] = GetParam();
  const Case c = make_case(agents, dim, static_cast<std::uint64_t>(agents * 10 + dim));
  const auto& fs = c.inst.functions();
  const Network& net = c.inst.network();
  const int m = agents * dim;

  Vector a(m), b(m);
  kernels::laplacian_apply_serial(net, c.x, dim, a);
  kernels::laplacian_apply_parallel(net, c.x, dim, b);
  EXPECT_EQ(a, b);

  kernels::penalized_gradient_serial(fs, net, c.inst.rho(), c.x, dim, a);
  kernels::penalized_gradient_parallel(fs, net, c.inst.rho(), c.x, dim, b);
  EXPECT_EQ(a, b);

  kernels::dgd_step_serial(fs, net, c.inst.rho(), c.inst.eta(), c.x, dim, a);
  kernels::dgd_step_parallel(fs, net, c.inst.rho(), c.inst.eta(), c.x, dim, b);
  EXPECT_EQ(a, b);
}

INSTANTIATE_TEST_SUITE_P(Sizes, KernelEquality,
                         ::testing::Values(std::make_tuple(2, 1), std::make_tuple(7, 3),
                                           std::make_tuple(63, 2), std::make_tuple(64, 2),
                                           std::make_tuple(150, 3)));

TEST(Kernels, DgdStepIsGradientStep) {
  const Case c = make_case(80, 2, 99);
  const auto& fs = c.inst.functions();
  Vector g(c.x.size()), next(c.x.size());
  kernels::penalized_gradient_serial(fs, c.inst.network(), c.inst.rho(), c.x, 2, g);
  kernels::dgd_step_parallel(fs, c.inst.network(), c.inst.rho(), c.inst.eta(), c.x, 2, next);
  EXPECT_LT((next - (c.x - c.inst.eta() * g)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kernels, ThreadCountDoesNotChangeResults) {
  const Case c = make_case(200, 2, 5);
  const auto& fs = c.inst.functions();
  Vector one(c.x.size()), many(c.x.size());
  const int saved = kernels::max_threads();
  kernels::set_threads(1);
  kernels::dgd_step_parallel(fs, c.inst.network(), c.inst.rho(), c.inst.eta(), c.x, 2, one);
  kernels::set_threads(4);
  kernels::dgd_step_parallel(fs, c.inst.network(), c.inst.rho(), c.inst.eta(), c.x, 2, many);
  kernels::set_threads(saved);
  EXPECT_EQ(one, many);
}

TEST(Kernels, SizeMismatchThrows) {
  const Case c = make_case(3, 2, 1);
  Vector y(5);
  EXPECT_THROW(kernels::laplacian_apply_serial(c.inst.network(), c.x, 2, y), DimensionError);
  EXPECT_THROW(kernels::laplacian_apply_parallel(c.inst.network(), c.x, 2, y), DimensionError);
}

}  // namespace
}  // namespace odgd
