#include "open_dgd/random_instances.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace odgd {

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x6f64u};
  return Rng(seq);
}

Matrix random_rotation(int dim, Rng& rng) {
  if (dim == 1) {
    Matrix r(1, 1);
    r(0, 0) = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
    return r;
  }
  if (dim == 2) {
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    return rotation2d(angle(rng));
  }
  std::normal_distribution<double> normal;
  Matrix g(dim, dim);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Vector random_on_sphere(int dim, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

Vector random_in_ball(int dim, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double radius = std::pow(unif(rng), 1.0 / dim);
  return std::min(radius, 1.0) * random_on_sphere(dim, rng);
}

Vector random_spectrum(int dim, double alpha, double beta, Rng& rng, bool pin_extremes) {
  std::uniform_real_distribution<double> unif(std::log(alpha), std::log(beta));
  Vector lambda(dim);
  for (int i = 0; i < dim; ++i) lambda[i] = std::clamp(std::exp(unif(rng)), alpha, beta);
  if (pin_extremes) {
    if (dim == 1) {
      lambda[0] = std::bernoulli_distribution(0.5)(rng) ? alpha : beta;
    } else {
      lambda[0] = alpha;
      lambda[dim - 1] = beta;
    }
  }
  return lambda;
}

QuadraticFunction random_quadratic(const FunctionClassParams& params, Rng& rng,
                                   const RandomQuadraticOptions& options) {
  const Vector lambda =
      random_spectrum(params.dim, params.alpha, params.beta, rng, options.pin_extremes);
  const Matrix rot = random_rotation(params.dim, rng);
  Vector c = options.minimizer_on_sphere ? random_on_sphere(params.dim, rng)
                                         : random_in_ball(params.dim, rng);
  return QuadraticFunction::from_spectrum(rot, lambda, std::move(c));
}

Matrix random_adjacency(int n, Rng& rng) {
  std::uniform_real_distribution<double> prob(0.3, 1.0);
  std::uniform_real_distribution<double> weight(0.2, 2.0);
  const double p = prob(rng);
  std::bernoulli_distribution coin(p);
  for (;;) {
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      a(i, i) = weight(rng);
      for (int j = i + 1; j < n; ++j) {
        if (coin(rng)) a(i, j) = a(j, i) = weight(rng);
      }
    }
    if (is_connected(a)) return a;
  }
}

ProblemInstance random_instance(const RandomInstanceSpec& spec, Rng& rng) {
  spec.params.validate();
  std::vector<QuadraticFunction> fs;
  fs.reserve(static_cast<size_t>(spec.agents));
  for (int i = 0; i < spec.agents; ++i) fs.push_back(random_quadratic(spec.params, rng, spec.quadratic));
  return ProblemInstance(std::move(fs), Network(random_adjacency(spec.agents, rng)), spec.rho,
                         std::nullopt, spec.params);
}

}  // namespace odgd
