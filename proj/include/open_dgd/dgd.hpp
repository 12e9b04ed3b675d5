#pragma once

#include "open_dgd/penalized_objective.hpp"

#include <span>
#include <string>
#include <vector>

namespace odgd {

struct TraceRecord {
  int k = 0;
  double norm_x = 0.0;
  double dist_to_min = 0.0;  // distance to the F_rho minimizer; NaN when untracked
  double F_rho = 0.0;
  double consensus_residual = 0.0;  // x^T (L kron I) x
};

struct DGDTrace {
  std::vector<TraceRecord> records;
  std::vector<StackedState> iterates;  // filled only with RunOptions::store_iterates
  StackedState final_state;
  StackedState minimizer;
  double terminal_gradient_norm = 0.0;
  std::vector<std::string> warnings;
};

struct RunOptions {
  bool store_iterates = false;
};

// x - eta grad F_rho(x).
StackedState dgd_step(const ProblemInstance& inst, const StackedState& x);

// Row-stochastic mixing matrix: off-diagonal eta*rho*a_ij, diagonal
// 1 - eta*rho*sum_{j != i} a_ij.  Throws std::invalid_argument if a diagonal
// entry would be negative.
Matrix mixing_matrix(const ProblemInstance& inst);

// x_i <- sum_j mix_ij x_j - eta grad f_i(x_i); same iterate as dgd_step.
StackedState dgd_step_mixing(const ProblemInstance& inst, const StackedState& x);

// Fixed-budget run; records iterations 0..iterations (iterations + 1 rows).
// Warns (does not throw) when eta exceeds 1/(beta + rho lambda_n).
DGDTrace run(const ProblemInstance& inst, const StackedState& x0, int iterations,
             const RunOptions& options = {});

// Number of consecutive pairs violating
// ||x^{k+1} - x^rho||^2 <= (1 - eta alpha) ||x^k - x^rho||^2 + slack.
int contraction_violations(const DGDTrace& trace, double eta, double alpha, double slack = 1e-12);

// Shared by run() and the open-system simulator so that both produce the same
// numbers for the same state.
TraceRecord record_state(std::span<const QuadraticFunction> fs, const Network& net, double rho,
                         int k, const Vector& x, int d, const Vector* minimizer);

}  // namespace odgd
