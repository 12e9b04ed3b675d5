#pragma once

// Per-agent data-parallel kernels.  Each *_serial routine is the reference the
// OpenMP variant is tested against; both evaluate every block with the same
// arithmetic so results are bitwise identical regardless of thread count.

#include "open_dgd/common.hpp"
#include "open_dgd/function_class.hpp"
#include "open_dgd/network.hpp"

#include <span>

namespace odgd::kernels {

// Below this many agents the OpenMP variants run on the calling thread.
inline constexpr int kParallelAgentThreshold = 64;

// y = (L kron I_d) x
void laplacian_apply_serial(const Network& net, Eigen::Ref<const Vector> x, int d,
                            Eigen::Ref<Vector> y);
void laplacian_apply_parallel(const Network& net, Eigen::Ref<const Vector> x, int d,
                              Eigen::Ref<Vector> y);

// out = grad F_rho(x) with local objectives `fs`.
void penalized_gradient_serial(std::span<const QuadraticFunction> fs, const Network& net,
                               double rho, Eigen::Ref<const Vector> x, int d,
                               Eigen::Ref<Vector> out);
void penalized_gradient_parallel(std::span<const QuadraticFunction> fs, const Network& net,
                                 double rho, Eigen::Ref<const Vector> x, int d,
                                 Eigen::Ref<Vector> out);

// next = x - eta grad F_rho(x).  `next` must not alias `x`.
void dgd_step_serial(std::span<const QuadraticFunction> fs, const Network& net, double rho,
                     double eta, Eigen::Ref<const Vector> x, int d, Eigen::Ref<Vector> next);
void dgd_step_parallel(std::span<const QuadraticFunction> fs, const Network& net, double rho,
                       double eta, Eigen::Ref<const Vector> x, int d, Eigen::Ref<Vector> next);

// Thread count used by the batch drivers; <= 0 leaves the OpenMP default.
void set_threads(int threads);
int max_threads();

}  // namespace odgd::kernels
