#pragma once

#include "open_dgd/open_system.hpp"
#include "open_dgd/penalized_objective.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace odgd {

struct CheckRecord {
  std::string name;
  double observed = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - observed
  bool pass = false;
};

// pass <=> observed <= bound + kBound (1 + |bound|)
CheckRecord make_check(std::string name, double observed, double bound);

struct BoundsReport {
  std::vector<CheckRecord> checks;
  std::string fingerprint;  // FNV-1a of the instance JSON, hex

  void add(CheckRecord record) { checks.push_back(std::move(record)); }
  void append(const BoundsReport& other);
  bool all_pass() const;
  std::size_t failures() const;
};

std::string fingerprint_of(const std::string& text);

namespace formulas {

double localization_radius(double kappa);  // 1 + sqrt(kappa)

struct BoundTriple {
  double without_n;
  double sqrt_n;
  double linear_n;
  double min() const;
};

// Bounds on ||x^a - x^b|| for n functions in the sum (n >= 2).
BoundTriple sensitivity(int n, double kappa);
// Bounds on ||x* - x^-|| when one function is added to n - 1 others.
BoundTriple single_change(int n, double kappa);
// beta2 (R1 + R2) / (alpha1 + alpha2)
double two_function(double alpha1, double alpha2, double beta2, double r1, double r2);

}  // namespace formulas

// ||argmin f|| <= 1 + sqrt(kappa); with a network and rho, also every block of
// argmin F_rho.
BoundsReport check_localization(std::span<const QuadraticFunction> functions, double kappa);
BoundsReport check_localization(const ProblemInstance& inst);

// Membership of every function of the instance (one record per violated
// property, observed/bound carrying the offending value).
BoundsReport check_membership(const ProblemInstance& inst);

// common = f_1..f_{n-1}; emits the main three-way bound, the single-change
// bound for each of x^a and x^b, the triangle relation, and the two-function
// bound applied to (f^-, f_a) and (f^-, f_b).
BoundsReport check_sensitivity(std::span<const QuadraticFunction> common,
                               const QuadraticFunction& fa, const QuadraticFunction& fb,
                               const FunctionClassParams& params);

struct TwoFunctionParams {
  double alpha = 1.0;
  double beta = 1.0;
  double radius = 1.0;
};

// Throws std::invalid_argument if g1/g2 violate their stated constants.
CheckRecord check_two_function_bound(const TwoFunctionParams& p1, const TwoFunctionParams& p2,
                                     const QuadraticFunction& g1, const QuadraticFunction& g2);

// Latched invariance of ||x^k|| <= R after first entry.
CheckRecord check_stability_envelope(const OpenTrace& trace, const StabilityEnvelope& envelope);

// --- batch verification over random instances ---------------------------

struct BatchCell {
  int agents = 2;
  int dim = 1;
  double kappa = 1.0;
};

struct BatchConfig {
  std::vector<BatchCell> cells;
  int instances_per_cell = 1;
  std::uint64_t seed = 0;
  bool localization = true;
  bool sensitivity = true;
};

// Default randomized grid: n in {2..10}, d in {1, 2, 5}, kappa in {1, 10, 100, 1000}.
std::vector<BatchCell> default_grid();

struct CellSummary {
  BatchCell cell;
  // Worst (smallest margin) record per check name.
  std::vector<CheckRecord> worst;
  std::size_t checks = 0;
  std::size_t failures = 0;
};

struct BatchResult {
  std::vector<CellSummary> cells;
  std::size_t checks = 0;
  std::size_t failures = 0;
  bool all_pass() const { return failures == 0; }
  BoundsReport as_report() const;
};

// One instance: random functions, network and rho drawn from its own stream.
BoundsReport verify_random_instance(const BatchCell& cell, std::uint64_t seed,
                                    std::uint64_t index, bool localization, bool sensitivity);

BatchResult verify_batch(const BatchConfig& config);         // OpenMP over instances
BatchResult verify_batch_serial(const BatchConfig& config);  // reference

}  // namespace odgd
