#pragma once

// F(x) = sum_i f_i(x_i) and the penalized objective
// F_rho(x) = F(x) + rho/2 x^T (L kron I) x over stacked agent states.

#include "open_dgd/common.hpp"
#include "open_dgd/function_class.hpp"
#include "open_dgd/network.hpp"

#include <optional>
#include <span>
#include <vector>

namespace odgd {

/// n blocks of dimension d stored contiguously.
class StackedState {
 public:
  StackedState() = default;
  StackedState(int agents, int dim);
  StackedState(int agents, int dim, Vector values);

  static StackedState consensus(int agents, const Vector& block);

  int agents() const { return agents_; }
  int dim() const { return dim_; }

  auto block(int i) { return values_.segment(static_cast<Eigen::Index>(i) * dim_, dim_); }
  auto block(int i) const { return values_.segment(static_cast<Eigen::Index>(i) * dim_, dim_); }

  Vector& values() { return values_; }
  const Vector& values() const { return values_; }
  double norm() const { return values_.norm(); }
  double max_block_norm() const;
  // Largest distance between any two blocks.
  double block_spread() const;

 private:
  int agents_ = 0;
  int dim_ = 0;
  Vector values_;
};

/// n quadratic local objectives on a shared network plus penalty and step.
///
/// Membership of the functions in F(alpha, beta) is not enforced here so that
/// corrupted inputs can still be loaded and reported; see membership().
class ProblemInstance {
 public:
  // When params is empty, alpha/beta are taken as the extreme Hessian
  // eigenvalues over all functions.  When eta is empty, eta = 1/(beta + rho
  // lambda_n).  Throws on size mismatch, rho < 0 or eta <= 0.
  ProblemInstance(std::vector<QuadraticFunction> functions, Network net, double rho,
                  std::optional<double> eta = std::nullopt,
                  std::optional<FunctionClassParams> params = std::nullopt);

  const std::vector<QuadraticFunction>& functions() const { return functions_; }
  const Network& network() const { return net_; }
  const FunctionClassParams& params() const { return params_; }
  double rho() const { return rho_; }
  double eta() const { return eta_; }
  int agents() const { return net_.size(); }
  int dim() const { return params_.dim; }

  double strong_convexity() const { return params_.alpha; }
  double smoothness() const { return params_.beta + rho_ * net_.lambda_max(); }
  double kappa_rho() const { return smoothness() / params_.alpha; }
  double default_eta() const { return 1.0 / smoothness(); }
  bool eta_within_limit() const { return eta_ <= default_eta() * (1.0 + 1e-12); }

  std::vector<MembershipReport> membership() const;
  bool all_members() const;

  ProblemInstance with_rho(double rho, std::optional<double> eta = std::nullopt) const;
  ProblemInstance with_eta(double eta) const;
  ProblemInstance with_functions(std::vector<QuadraticFunction> functions) const;

 private:
  std::vector<QuadraticFunction> functions_;
  Network net_;
  double rho_ = 0.0;
  double eta_ = 1.0;
  FunctionClassParams params_;
};

double F_value(const ProblemInstance& inst, const StackedState& x);
double F_rho_value(const ProblemInstance& inst, const StackedState& x);
StackedState F_rho_gradient(const ProblemInstance& inst, const StackedState& x);

// Direct SPD solve of (blockdiag(H_i) + rho L kron I) x = (H_i c_i)_i.
StackedState exact_minimizer_F_rho(const ProblemInstance& inst);

// Solves (sum H_i) x = sum H_i c_i.
Vector exact_minimizer_f(std::span<const QuadraticFunction> functions);

/// Running sum of quadratics; the sum is again quadratic with Hessian sum H_i
/// and linear term sum H_i c_i, so the minimizer of any partial sum is one
/// small solve.
class QuadraticSum {
 public:
  explicit QuadraticSum(int dim);
  QuadraticSum& add(const QuadraticFunction& f);
  QuadraticSum plus(const QuadraticFunction& f) const;
  int count() const { return count_; }
  const Matrix& hessian() const { return hessian_; }
  Vector minimizer() const;

 private:
  Matrix hessian_;
  Vector linear_;
  int count_ = 0;
};

}  // namespace odgd
