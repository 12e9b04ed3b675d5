#include "open_dgd/kernels.hpp"

#include <omp.h>

namespace odgd::kernels {

namespace {

inline void laplacian_block(const Network& net, const Eigen::Ref<const Vector>& x, int d, int i,
                            Eigen::Ref<Vector> y) {
  auto yi = y.segment(static_cast<Eigen::Index>(i) * d, d);
  yi.setZero();
  const auto xi = x.segment(static_cast<Eigen::Index>(i) * d, d);
  for (const Edge& e : net.neighbors(i)) {
    yi += e.weight * (xi - x.segment(static_cast<Eigen::Index>(e.to) * d, d));
  }
}

inline void gradient_block(std::span<const QuadraticFunction> fs, const Network& net, double rho,
                           const Eigen::Ref<const Vector>& x, int d, int i,
                           Eigen::Ref<Vector> out) {
  const Eigen::Index off = static_cast<Eigen::Index>(i) * d;
  auto gi = out.segment(off, d);
  const auto xi = x.segment(off, d);
  gi.setZero();
  for (const Edge& e : net.neighbors(i)) {
    gi += e.weight * (xi - x.segment(static_cast<Eigen::Index>(e.to) * d, d));
  }
  gi *= rho;
  fs[static_cast<size_t>(i)].accumulate_gradient(xi, 1.0, gi);
}

inline void step_block(std::span<const QuadraticFunction> fs, const Network& net, double rho,
                       double eta, const Eigen::Ref<const Vector>& x, int d, int i,
                       Eigen::Ref<Vector> next) {
  gradient_block(fs, net, rho, x, d, i, next);
  const Eigen::Index off = static_cast<Eigen::Index>(i) * d;
  next.segment(off, d) = x.segment(off, d) - eta * next.segment(off, d);
}

void check(std::span<const QuadraticFunction> fs, const Network& net, Eigen::Index size, int d) {
  require_size(static_cast<Eigen::Index>(fs.size()), net.size(), "function count");
  require_size(size, static_cast<Eigen::Index>(net.size()) * d, "stacked state");
}

}  // namespace

void laplacian_apply_serial(const Network& net, Eigen::Ref<const Vector> x, int d,
                            Eigen::Ref<Vector> y) {
  require_size(x.size(), static_cast<Eigen::Index>(net.size()) * d, "stacked state");
  require_size(y.size(), x.size(), "laplacian output");
  for (int i = 0; i < net.size(); ++i) laplacian_block(net, x, d, i, y);
}

void laplacian_apply_parallel(const Network& net, Eigen::Ref<const Vector> x, int d,
                              Eigen::Ref<Vector> y) {
  require_size(x.size(), static_cast<Eigen::Index>(net.size()) * d, "stacked state");
  require_size(y.size(), x.size(), "laplacian output");
  const int n = net.size();
#pragma omp parallel for schedule(static) if (n >= kParallelAgentThreshold)
  for (int i = 0; i < n; ++i) laplacian_block(net, x, d, i, y);
}

void penalized_gradient_serial(std::span<const QuadraticFunction> fs, const Network& net,
                               double rho, Eigen::Ref<const Vector> x, int d,
                               Eigen::Ref<Vector> out) {
  check(fs, net, x.size(), d);
  for (int i = 0; i < net.size(); ++i) gradient_block(fs, net, rho, x, d, i, out);
}

void penalized_gradient_parallel(std::span<const QuadraticFunction> fs, const Network& net,
                                 double rho, Eigen::Ref<const Vector> x, int d,
                                 Eigen::Ref<Vector> out) {
  check(fs, net, x.size(), d);
  const int n = net.size();
#pragma omp parallel for schedule(static) if (n >= kParallelAgentThreshold)
  for (int i = 0; i < n; ++i) gradient_block(fs, net, rho, x, d, i, out);
}

void dgd_step_serial(std::span<const QuadraticFunction> fs, const Network& net, double rho,
                     double eta, Eigen::Ref<const Vector> x, int d, Eigen::Ref<Vector> next) {
  check(fs, net, x.size(), d);
  for (int i = 0; i < net.size(); ++i) step_block(fs, net, rho, eta, x, d, i, next);
}

void dgd_step_parallel(std::span<const QuadraticFunction> fs, const Network& net, double rho,
                       double eta, Eigen::Ref<const Vector> x, int d, Eigen::Ref<Vector> next) {
  check(fs, net, x.size(), d);
  const int n = net.size();
#pragma omp parallel for schedule(static) if (n >= kParallelAgentThreshold)
  for (int i = 0; i < n; ++i) step_block(fs, net, rho, eta, x, d, i, next);
}

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace odgd::kernels
