#pragma once

// Random members of F(alpha, beta) and random problem instances.
// Hessians are R diag(lambda) R^T with lambda log-uniform on [alpha, beta] and
// R Haar-distributed (QR of a Gaussian matrix with sign fix); minimizers are
// uniform in the unit ball.  Every batch driver derives one RNG stream per
// item from (seed, index) so results do not depend on the thread count.

#include "open_dgd/function_class.hpp"
#include "open_dgd/network.hpp"
#include "open_dgd/penalized_objective.hpp"

#include <cstdint>
#include <random>

namespace odgd {

using Rng = std::mt19937_64;

Rng make_stream(std::uint64_t seed, std::uint64_t stream);

Matrix random_rotation(int dim, Rng& rng);
Vector random_on_sphere(int dim, Rng& rng);
Vector random_in_ball(int dim, Rng& rng);

struct RandomQuadraticOptions {
  // Force lambda_min = alpha and lambda_max = beta (d >= 2) or pick one of
  // the two endpoints (d = 1).
  bool pin_extremes = false;
  bool minimizer_on_sphere = false;
};

Vector random_spectrum(int dim, double alpha, double beta, Rng& rng, bool pin_extremes);
QuadraticFunction random_quadratic(const FunctionClassParams& params, Rng& rng,
                                   const RandomQuadraticOptions& options = {});

// Connected weighted G(n, p) with p ~ U[0.3, 1], weights ~ U[0.2, 2].
Matrix random_adjacency(int n, Rng& rng);

struct RandomInstanceSpec {
  int agents = 2;
  FunctionClassParams params;
  double rho = 1.0;
  RandomQuadraticOptions quadratic;
};

ProblemInstance random_instance(const RandomInstanceSpec& spec, Rng& rng);

}  // namespace odgd
