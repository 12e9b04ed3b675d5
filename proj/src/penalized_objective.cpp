#include "open_dgd/penalized_objective.hpp"

#include "open_dgd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace odgd {

StackedState::StackedState(int agents, int dim)
    : StackedState(agents, dim, Vector::Zero(static_cast<Eigen::Index>(agents) * dim)) {}

StackedState::StackedState(int agents, int dim, Vector values)
    : agents_(agents), dim_(dim), values_(std::move(values)) {
  if (agents < 1 || dim < 1) throw std::invalid_argument("stacked state needs n, d >= 1");
  require_size(values_.size(), static_cast<Eigen::Index>(agents) * dim, "stacked state");
}

StackedState StackedState::consensus(int agents, const Vector& block) {
  StackedState s(agents, static_cast<int>(block.size()));
  for (int i = 0; i < agents; ++i) s.block(i) = block;
  return s;
}

double StackedState::max_block_norm() const {
  double m = 0.0;
  for (int i = 0; i < agents_; ++i) m = std::max(m, block(i).norm());
  return m;
}

double StackedState::block_spread() const {
  double m = 0.0;
  for (int i = 0; i < agents_; ++i) {
    for (int j = i + 1; j < agents_; ++j) m = std::max(m, (block(i) - block(j)).norm());
  }
  return m;
}

namespace {

FunctionClassParams infer_params(const std::vector<QuadraticFunction>& fs) {
  FunctionClassParams p;
  p.dim = fs.front().dimension();
  p.alpha = std::numeric_limits<double>::infinity();
  p.beta = 0.0;
  for (const auto& f : fs) {
    p.alpha = std::min(p.alpha, f.min_eigenvalue());
    p.beta = std::max(p.beta, f.max_eigenvalue());
  }
  return p;
}

void check_state(const ProblemInstance& inst, const StackedState& x) {
  if (x.agents() != inst.agents() || x.dim() != inst.dim()) {
    throw DimensionError("state is " + std::to_string(x.agents()) + "x" + std::to_string(x.dim()) +
                         ", instance is " + std::to_string(inst.agents()) + "x" +
                         std::to_string(inst.dim()));
  }
}

}  // namespace

ProblemInstance::ProblemInstance(std::vector<QuadraticFunction> functions, Network net, double rho,
                                 std::optional<double> eta,
                                 std::optional<FunctionClassParams> params)
    : functions_(std::move(functions)), net_(std::move(net)), rho_(rho) {
  if (functions_.empty()) throw std::invalid_argument("instance has no functions");
  if (static_cast<int>(functions_.size()) != net_.size()) {
    throw DimensionError("instance has " + std::to_string(functions_.size()) +
                         " functions but the network has " + std::to_string(net_.size()) +
                         " agents");
  }
  const int d = functions_.front().dimension();
  for (const auto& f : functions_) {
    if (f.dimension() != d) throw DimensionError("functions do not share a dimension");
  }
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be >= 0");
  params_ = params ? *params : infer_params(functions_);
  if (params_.dim != d) throw DimensionError("class parameters disagree with function dimension");
  params_.validate();
  eta_ = eta ? *eta : default_eta();
  if (!(eta_ > 0.0) || !std::isfinite(eta_)) throw std::invalid_argument("eta must be positive");
}

std::vector<MembershipReport> ProblemInstance::membership() const {
  std::vector<MembershipReport> out;
  out.reserve(functions_.size());
  for (const auto& f : functions_) out.push_back(validate_membership(f, params_));
  return out;
}

bool ProblemInstance::all_members() const {
  const auto reps = membership();
  return std::all_of(reps.begin(), reps.end(), [](const MembershipReport& r) { return r.ok(); });
}

ProblemInstance ProblemInstance::with_rho(double rho, std::optional<double> eta) const {
  return ProblemInstance(functions_, net_, rho, eta, params_);
}

ProblemInstance ProblemInstance::with_eta(double eta) const {
  return ProblemInstance(functions_, net_, rho_, eta, params_);
}

ProblemInstance ProblemInstance::with_functions(std::vector<QuadraticFunction> functions) const {
  return ProblemInstance(std::move(functions), net_, rho_, eta_, params_);
}

double F_value(const ProblemInstance& inst, const StackedState& x) {
  check_state(inst, x);
  double total = 0.0;
  for (int i = 0; i < inst.agents(); ++i) {
    total += inst.functions()[static_cast<size_t>(i)].value(x.block(i));
  }
  return total;
}

double F_rho_value(const ProblemInstance& inst, const StackedState& x) {
  return F_value(inst, x) + 0.5 * inst.rho() * laplacian_quadratic_form(inst.network(), x.values());
}

StackedState F_rho_gradient(const ProblemInstance& inst, const StackedState& x) {
  check_state(inst, x);
  StackedState g(inst.agents(), inst.dim());
  kernels::penalized_gradient_parallel(inst.functions(), inst.network(), inst.rho(), x.values(),
                                       inst.dim(), g.values());
  return g;
}

StackedState exact_minimizer_F_rho(const ProblemInstance& inst) {
  const int n = inst.agents();
  const int d = inst.dim();
  Matrix system = inst.rho() * kron_identity(inst.network().laplacian(), d);
  Vector rhs(static_cast<Eigen::Index>(n) * d);
  for (int i = 0; i < n; ++i) {
    const auto& f = inst.functions()[static_cast<size_t>(i)];
    system.block(i * d, i * d, d, d) += f.hessian();
    rhs.segment(i * d, d) = f.hessian() * f.minimizer();
  }
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success) {
    throw SolverError("penalized system is not positive definite");
  }
  StackedState x(n, d, llt.solve(rhs));
  // Iterative refinement on the stationarity residual.
  for (int pass = 0; pass < 3; ++pass) {
    const StackedState g = F_rho_gradient(inst, x);
    if (g.norm() <= tol::kStationarity * (1.0 + x.norm())) return x;
    x.values() -= llt.solve(g.values());
  }
  const double residual = F_rho_gradient(inst, x).norm();
  if (residual > tol::kStationarity * (1.0 + x.norm())) {
    throw SolverError("penalized minimizer residual " + std::to_string(residual) +
                      " above tolerance");
  }
  return x;
}

Vector exact_minimizer_f(std::span<const QuadraticFunction> functions) {
  if (functions.empty()) throw std::invalid_argument("no functions to minimize");
  QuadraticSum sum(functions.front().dimension());
  for (const auto& f : functions) sum.add(f);
  return sum.minimizer();
}

QuadraticSum::QuadraticSum(int dim)
    : hessian_(Matrix::Zero(dim, dim)), linear_(Vector::Zero(dim)) {}

QuadraticSum& QuadraticSum::add(const QuadraticFunction& f) {
  require_size(f.dimension(), hessian_.rows(), "quadratic sum");
  hessian_ += f.hessian();
  linear_ += f.hessian() * f.minimizer();
  ++count_;
  return *this;
}

QuadraticSum QuadraticSum::plus(const QuadraticFunction& f) const {
  QuadraticSum out = *this;
  out.add(f);
  return out;
}

Vector QuadraticSum::minimizer() const {
  if (count_ == 0) throw std::invalid_argument("empty quadratic sum");
  Eigen::LLT<Matrix> llt(hessian_);
  if (llt.info() != Eigen::Success) throw SolverError("sum of hessians is not positive definite");
  Vector x = llt.solve(linear_);
  for (int pass = 0; pass < 3; ++pass) {
    const Vector g = hessian_ * x - linear_;
    if (g.norm() <= tol::kStationarity * (1.0 + x.norm())) break;
    x -= llt.solve(g);
  }
  return x;
}

}  // namespace odgd
