#pragma once

#include "open_dgd/common.hpp"

#include <cstdint>
#include <vector>

namespace odgd {

struct Edge {
  int to = 0;
  double weight = 0.0;
};

/// Undirected weighted communication graph with positive self weights.
///
/// Construction validates symmetry, positive diagonal and connectivity, then
/// computes L = D - A and its full spectrum (dense symmetric eigensolve).
/// Immutable afterwards.
class Network {
 public:
  // Throws std::invalid_argument naming the violated condition.
  explicit Network(Matrix adjacency);

  int size() const { return static_cast<int>(adjacency_.rows()); }
  const Matrix& adjacency() const { return adjacency_; }
  const Matrix& laplacian() const { return laplacian_; }
  const Vector& degrees() const { return degrees_; }
  // Ascending.
  const Vector& eigenvalues() const { return eigenvalues_; }
  double lambda_2() const { return size() > 1 ? eigenvalues_[1] : 0.0; }
  double lambda_max() const { return eigenvalues_[size() - 1]; }

  // Off-diagonal positive entries of row i.
  const std::vector<Edge>& neighbors(int i) const { return neighbors_[static_cast<size_t>(i)]; }
  // Sum over j != i of a_ij, equal to L_ii.
  double off_diagonal_degree(int i) const { return laplacian_(i, i); }

 private:
  Matrix adjacency_;
  Matrix laplacian_;
  Vector degrees_;
  Vector eigenvalues_;
  std::vector<std::vector<Edge>> neighbors_;
};

Network build_network(const Matrix& adjacency);

// Breadth-first search over the positive off-diagonal pattern.
bool is_connected(const Matrix& adjacency);

// sum_i sum_{j>i} a_ij ||x_i - x_j||^2 (pairwise form).
double laplacian_quadratic_form(const Network& net, Eigen::Ref<const Vector> x);
// x^T (L kron I_d) x using the dense Laplacian (independent route).
double laplacian_quadratic_form_kron(const Network& net, Eigen::Ref<const Vector> x);

// Block i = sum_j a_ij (x_i - x_j), i.e. (L kron I_d) x.
Vector laplacian_apply(const Network& net, Eigen::Ref<const Vector> x);

// Dense L kron I_d, mostly for oracles and exact solves.
Matrix kron_identity(const Matrix& m, int d);

namespace generators {

Matrix complete(int n, double edge_weight = 1.0, double self_weight = 1.0);
Matrix path(int n, double edge_weight = 1.0, double self_weight = 1.0);
Matrix cycle(int n, double edge_weight = 1.0, double self_weight = 1.0);
// G(n, p) redrawn until connected; throws after max_attempts.
Matrix erdos_renyi(int n, double p, std::uint64_t seed, double edge_weight = 1.0,
                   double self_weight = 1.0, int max_attempts = 10000);

}  // namespace generators

}  // namespace odgd
