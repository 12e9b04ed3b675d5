#include "open_dgd/network.hpp"

#include "open_dgd/kernels.hpp"

#include <queue>
#include <random>
#include <string>
#include <utility>

namespace odgd {

Network::Network(Matrix adjacency) : adjacency_(std::move(adjacency)) {
  const Eigen::Index n = adjacency_.rows();
  if (n == 0 || adjacency_.cols() != n) {
    throw std::invalid_argument("adjacency must be a non-empty square matrix");
  }
  if (!adjacency_.allFinite()) throw std::invalid_argument("adjacency has non-finite entries");
  if ((adjacency_.array() < 0.0).any()) {
    throw std::invalid_argument("adjacency has negative entries");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (adjacency_(i, j) != adjacency_(j, i)) {
        throw std::invalid_argument("adjacency is not symmetric at (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ")");
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(adjacency_(i, i) > 0.0)) {
      throw std::invalid_argument("adjacency diagonal entry " + std::to_string(i) +
                                  " is not positive");
    }
  }
  if (!is_connected(adjacency_)) throw std::invalid_argument("graph is disconnected");

  degrees_ = adjacency_.rowwise().sum();
  laplacian_ = Matrix(degrees_.asDiagonal()) - adjacency_;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(laplacian_, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw std::runtime_error("laplacian eigensolve failed");
  eigenvalues_ = eig.eigenvalues();

  neighbors_.resize(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && adjacency_(i, j) > 0.0) {
        neighbors_[static_cast<size_t>(i)].push_back(Edge{static_cast<int>(j), adjacency_(i, j)});
      }
    }
  }
}

Network build_network(const Matrix& adjacency) { return Network(adjacency); }

bool is_connected(const Matrix& adjacency) {
  const Eigen::Index n = adjacency.rows();
  if (n == 0) return false;
  std::vector<char> seen(static_cast<size_t>(n), 0);
  std::queue<Eigen::Index> frontier;
  frontier.push(0);
  seen[0] = 1;
  Eigen::Index reached = 1;
  while (!frontier.empty()) {
    const Eigen::Index i = frontier.front();
    frontier.pop();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!seen[static_cast<size_t>(j)] && adjacency(i, j) > 0.0) {
        seen[static_cast<size_t>(j)] = 1;
        ++reached;
        frontier.push(j);
      }
    }
  }
  return reached == n;
}

namespace {
int block_dim(const Network& net, Eigen::Index size, const char* what) {
  const int n = net.size();
  if (size % n != 0 || size == 0) {
    throw DimensionError(std::string(what) + ": stacked size " + std::to_string(size) +
                         " is not a multiple of n = " + std::to_string(n));
  }
  return static_cast<int>(size / n);
}
}  // namespace

double laplacian_quadratic_form(const Network& net, Eigen::Ref<const Vector> x) {
  const int d = block_dim(net, x.size(), "laplacian_quadratic_form");
  const int n = net.size();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (const Edge& e : net.neighbors(i)) {
      if (e.to <= i) continue;
      total += e.weight * (x.segment(i * d, d) - x.segment(e.to * d, d)).squaredNorm();
    }
  }
  return total;
}

double laplacian_quadratic_form_kron(const Network& net, Eigen::Ref<const Vector> x) {
  const int d = block_dim(net, x.size(), "laplacian_quadratic_form_kron");
  return x.dot(kron_identity(net.laplacian(), d) * x);
}

Vector laplacian_apply(const Network& net, Eigen::Ref<const Vector> x) {
  const int d = block_dim(net, x.size(), "laplacian_apply");
  Vector y(x.size());
  kernels::laplacian_apply_parallel(net, x, d, y);
  return y;
}

Matrix kron_identity(const Matrix& m, int d) {
  Matrix out = Matrix::Zero(m.rows() * d, m.cols() * d);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) out.block(i * d, j * d, d, d).diagonal().setConstant(m(i, j));
    }
  }
  return out;
}

namespace generators {

namespace {
void check_weights(int n, double edge_weight, double self_weight, int min_n) {
  if (n < min_n) throw std::invalid_argument("graph needs at least " + std::to_string(min_n) +
                                             " nodes");
  if (!(edge_weight > 0.0) || !(self_weight > 0.0)) {
    throw std::invalid_argument("edge and self weights must be positive");
  }
}
}  // namespace

Matrix complete(int n, double edge_weight, double self_weight) {
  check_weights(n, edge_weight, self_weight, 1);
  Matrix a = Matrix::Constant(n, n, edge_weight);
  a.diagonal().setConstant(self_weight);
  return a;
}

Matrix path(int n, double edge_weight, double self_weight) {
  check_weights(n, edge_weight, self_weight, 1);
  Matrix a = Matrix::Zero(n, n);
  a.diagonal().setConstant(self_weight);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = a(i + 1, i) = edge_weight;
  return a;
}

Matrix cycle(int n, double edge_weight, double self_weight) {
  check_weights(n, edge_weight, self_weight, 3);
  Matrix a = path(n, edge_weight, self_weight);
  a(0, n - 1) = a(n - 1, 0) = edge_weight;
  return a;
}

Matrix erdos_renyi(int n, double p, std::uint64_t seed, double edge_weight, double self_weight,
                   int max_attempts) {
  check_weights(n, edge_weight, self_weight, 1);
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("edge probability must be in [0, 1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Matrix a = Matrix::Zero(n, n);
    a.diagonal().setConstant(self_weight);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (coin(rng)) a(i, j) = a(j, i) = edge_weight;
      }
    }
    if (is_connected(a)) return a;
  }
  throw std::runtime_error("erdos_renyi: no connected sample within the attempt budget");
}

}  // namespace generators

}  // namespace odgd
