#include "open_dgd/dgd.hpp"

#include "open_dgd/kernels.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace odgd {

namespace {
void check_state(const ProblemInstance& inst, const StackedState& x) {
  if (x.agents() != inst.agents() || x.dim() != inst.dim()) {
    throw DimensionError("state shape does not match the instance");
  }
}
}  // namespace

StackedState dgd_step(const ProblemInstance& inst, const StackedState& x) {
  check_state(inst, x);
  StackedState next(inst.agents(), inst.dim());
  kernels::dgd_step_parallel(inst.functions(), inst.network(), inst.rho(), inst.eta(), x.values(),
                             inst.dim(), next.values());
  return next;
}

Matrix mixing_matrix(const ProblemInstance& inst) {
  const Network& net = inst.network();
  const int n = net.size();
  const double scale = inst.eta() * inst.rho();
  Matrix mix = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (const Edge& e : net.neighbors(i)) mix(i, e.to) = scale * e.weight;
    mix(i, i) = 1.0 - scale * net.off_diagonal_degree(i);
    if (mix(i, i) < 0.0) {
      throw std::invalid_argument(
          fmt::format("eta*rho = {} too large: mixing diagonal of agent {} is negative", scale, i));
    }
  }
  return mix;
}

StackedState dgd_step_mixing(const ProblemInstance& inst, const StackedState& x) {
  check_state(inst, x);
  const Matrix mix = mixing_matrix(inst);
  const int n = inst.agents();
  StackedState next(n, inst.dim());
  for (int i = 0; i < n; ++i) {
    auto out = next.block(i);
    out = mix(i, i) * x.block(i);
    for (const Edge& e : inst.network().neighbors(i)) out += mix(i, e.to) * x.block(e.to);
    inst.functions()[static_cast<size_t>(i)].accumulate_gradient(x.block(i), -inst.eta(), out);
  }
  return next;
}

TraceRecord record_state(std::span<const QuadraticFunction> fs, const Network& net, double rho,
                         int k, const Vector& x, int d, const Vector* minimizer) {
  TraceRecord r;
  r.k = k;
  r.norm_x = x.norm();
  r.dist_to_min =
      minimizer ? (x - *minimizer).norm() : std::numeric_limits<double>::quiet_NaN();
  r.consensus_residual = laplacian_quadratic_form(net, x);
  double local = 0.0;
  for (size_t i = 0; i < fs.size(); ++i) {
    local += fs[i].value(x.segment(static_cast<Eigen::Index>(i) * d, d));
  }
  r.F_rho = local + 0.5 * rho * r.consensus_residual;
  return r;
}

DGDTrace run(const ProblemInstance& inst, const StackedState& x0, int iterations,
             const RunOptions& options) {
  check_state(inst, x0);
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  DGDTrace trace;
  if (!inst.eta_within_limit()) {
    trace.warnings.push_back(fmt::format(
        "eta = {} exceeds 1/(beta + rho lambda_n) = {}; contraction is not guaranteed",
        inst.eta(), inst.default_eta()));
  }
  trace.minimizer = exact_minimizer_F_rho(inst);
  const int d = inst.dim();
  const auto& fs = inst.functions();
  const Network& net = inst.network();

  Vector x = x0.values();
  Vector next(x.size());
  trace.records.reserve(static_cast<size_t>(iterations) + 1);
  if (options.store_iterates) trace.iterates.reserve(static_cast<size_t>(iterations) + 1);
  for (int k = 0;; ++k) {
    trace.records.push_back(record_state(fs, net, inst.rho(), k, x, d, &trace.minimizer.values()));
    if (options.store_iterates) trace.iterates.emplace_back(inst.agents(), d, x);
    if (k == iterations) break;
    kernels::dgd_step_parallel(fs, net, inst.rho(), inst.eta(), x, d, next);
    x.swap(next);
  }
  trace.final_state = StackedState(inst.agents(), d, x);
  trace.terminal_gradient_norm = F_rho_gradient(inst, trace.final_state).norm();
  return trace;
}

int contraction_violations(const DGDTrace& trace, double eta, double alpha, double slack) {
  const double factor = 1.0 - eta * alpha;
  int violations = 0;
  for (size_t k = 0; k + 1 < trace.records.size(); ++k) {
    const double before = trace.records[k].dist_to_min;
    const double after = trace.records[k + 1].dist_to_min;
    if (after * after > factor * before * before + slack) ++violations;
  }
  return violations;
}

}  // namespace odgd
