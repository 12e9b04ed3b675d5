#pragma once

// Empirical worst case of ||x^a - x^b|| over two-dimensional rotated
// quadratics with eigenvalues {1, kappa}.  Each of the n + 1 functions
// (f_1..f_{n-1}, f_a, f_b) is encoded by three box-constrained coordinates:
// rotation angle in (-pi/2, pi/2], minimizer radius in [0, 1] and minimizer
// polar angle in (-pi, pi].

#include "open_dgd/function_class.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace odgd {

struct SearchSpace {
  int agents = 2;  // n: number of functions in each sum
  double kappa = 1.0;
  int dim = 2;

  int coordinates() const { return 3 * (agents + 1); }
  void validate() const;
};

struct DecodedPoint {
  std::vector<QuadraticFunction> common;  // n - 1 functions
  std::vector<QuadraticFunction> swap;    // {f_a, f_b}
};

// Clamps radius into [0, 1] and wraps angles before expanding.
DecodedPoint decode(const SearchSpace& space, const Vector& point);
double objective(const SearchSpace& space, const Vector& point);

// Encoding of the running example: every common function is f1, f_a = f2,
// f_b = fb.  For n = 2 the objective equals (kappa - 1) / (2 sqrt(kappa)).
Vector construction_start(const SearchSpace& space);
Vector random_start(const SearchSpace& space, std::uint64_t seed, std::uint64_t restart);

struct SearchParams {
  int restarts = 16;
  int budget = 20000;  // objective evaluations per restart
  std::uint64_t seed = 0;
  double initial_step = 0.5;
  double min_step = 1e-7;
};

struct SearchResult {
  Vector best_point;
  double best_value = 0.0;
  int best_restart = -1;
  std::vector<double> start_values;  // objective at each start point
  std::vector<double> history;       // best-so-far after each restart, nondecreasing
  int evaluations = 0;
};

// Coordinate pattern search maximizing the objective from one start.
struct LocalResult {
  Vector point;
  double value = 0.0;
  double start_value = 0.0;
  int evaluations = 0;
};
LocalResult pattern_search(const SearchSpace& space, Vector start, int budget, double initial_step,
                           double min_step);

// Restart 0 is the two-agent construction; the rest are random.  Restarts run
// under OpenMP; the reduction takes the first maximum in restart order.
SearchResult search(const SearchSpace& space, const SearchParams& params);
SearchResult search_serial(const SearchSpace& space, const SearchParams& params);

struct ScalingRow {
  double kappa = 1.0;
  double sqrt_kappa = 1.0;
  int agents = 2;
  double best_value = 0.0;
  double ratio_to_sqrt_kappa = 0.0;
  double sensitivity_bound = 0.0;
};

std::vector<ScalingRow> scaling_report(int agents, const std::vector<double>& kappas,
                                       const SearchParams& params);

}  // namespace odgd
