#include "open_dgd/function_class.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace odgd {

void FunctionClassParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be positive, got " + std::to_string(alpha));
  }
  if (!(beta >= alpha) || !std::isfinite(beta)) {
    throw std::invalid_argument("beta must satisfy beta >= alpha");
  }
  if (dim < 1) throw std::invalid_argument("dimension must be at least 1");
}

QuadraticFunction::QuadraticFunction(Matrix hessian, Vector minimizer)
    : hessian_(std::move(hessian)), minimizer_(std::move(minimizer)) {
  if (hessian_.rows() != hessian_.cols()) {
    throw std::invalid_argument("hessian must be square");
  }
  require_size(minimizer_.size(), hessian_.rows(), "quadratic minimizer");
  if (hessian_.size() == 0) throw std::invalid_argument("empty hessian");
  if (!hessian_.allFinite() || !minimizer_.allFinite()) {
    throw std::invalid_argument("quadratic has non-finite entries");
  }
  const double scale = hessian_.cwiseAbs().maxCoeff();
  if ((hessian_ - hessian_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + scale)) {
    throw std::invalid_argument("hessian is not symmetric");
  }
  hessian_ = 0.5 * (hessian_ + hessian_.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian_, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw std::invalid_argument("hessian eigensolve failed");
  min_eig_ = eig.eigenvalues().minCoeff();
  max_eig_ = eig.eigenvalues().maxCoeff();
  if (!(min_eig_ > 0.0)) throw std::invalid_argument("hessian is not positive definite");
}

QuadraticFunction::QuadraticFunction(Matrix hessian, Vector minimizer, double min_eig,
                                     double max_eig)
    : hessian_(std::move(hessian)),
      minimizer_(std::move(minimizer)),
      min_eig_(min_eig),
      max_eig_(max_eig) {}

QuadraticFunction QuadraticFunction::from_spectrum(const Matrix& rotation,
                                                   const Vector& eigenvalues, Vector minimizer) {
  const auto d = eigenvalues.size();
  if (rotation.rows() != d || rotation.cols() != d) {
    throw DimensionError("rotation does not match the number of eigenvalues");
  }
  require_size(minimizer.size(), d, "quadratic minimizer");
  if (!(eigenvalues.minCoeff() > 0.0)) {
    throw std::invalid_argument("eigenvalues must be positive");
  }
  Matrix h = rotation * eigenvalues.asDiagonal() * rotation.transpose();
  h = 0.5 * (h + h.transpose()).eval();
  return QuadraticFunction(std::move(h), std::move(minimizer), eigenvalues.minCoeff(),
                           eigenvalues.maxCoeff());
}

QuadraticFunction QuadraticFunction::isotropic(int dim, double curvature, Vector minimizer) {
  if (!(curvature > 0.0)) throw std::invalid_argument("curvature must be positive");
  require_size(minimizer.size(), dim, "quadratic minimizer");
  return QuadraticFunction(curvature * Matrix::Identity(dim, dim), std::move(minimizer),
                           curvature, curvature);
}

double QuadraticFunction::value(Eigen::Ref<const Vector> x) const {
  require_size(x.size(), minimizer_.size(), "evaluate");
  const Vector r = x - minimizer_;
  return 0.5 * r.dot(hessian_ * r);
}

Vector QuadraticFunction::gradient(Eigen::Ref<const Vector> x) const {
  require_size(x.size(), minimizer_.size(), "gradient");
  return hessian_ * (x - minimizer_);
}

void QuadraticFunction::accumulate_gradient(Eigen::Ref<const Vector> x, double scale,
                                            Eigen::Ref<Vector> out) const {
  const Eigen::Index d = minimizer_.size();
  for (Eigen::Index c = 0; c < d; ++c) {
    const double r = scale * (x[c] - minimizer_[c]);
    out += r * hessian_.col(c);
  }
}

Matrix rotation2d(double angle) {
  Matrix r(2, 2);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  r << c, -s, s, c;
  return r;
}

Matrix RotatedQuadratic2D::hessian() const {
  const Matrix r = rotation2d(sign >= 0 ? phi : -phi);
  return r * Eigen::Vector2d(beta, alpha).asDiagonal() * r.transpose();
}

QuadraticFunction RotatedQuadratic2D::expand() const {
  if (sign != 1 && sign != -1) throw std::invalid_argument("rotation sign must be +1 or -1");
  if (!(alpha > 0.0) || !(beta >= alpha)) {
    throw std::invalid_argument("rotated quadratic needs 0 < alpha <= beta");
  }
  return QuadraticFunction::from_spectrum(rotation2d(sign >= 0 ? phi : -phi),
                                          Eigen::Vector2d(beta, alpha), Vector(minimizer));
}

ExamplePair make_example_pair(double kappa) {
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("kappa must be >= 1");
  }
  const double phi = std::atan(1.0 / std::sqrt(kappa));
  const RotatedQuadratic2D f1{phi, -1, Eigen::Vector2d(-1.0, 0.0), 1.0, kappa};
  const RotatedQuadratic2D f2{phi, +1, Eigen::Vector2d(1.0, 0.0), 1.0, kappa};
  const RotatedQuadratic2D fb{phi, -1, Eigen::Vector2d(1.0, 0.0), 1.0, kappa};
  return ExamplePair{kappa, phi, f1, f2, fb, f1.expand(), f2.expand(), fb.expand()};
}

double example_pair_offset(double kappa, double tan_phi) {
  return (kappa - 1.0) * tan_phi / (1.0 + kappa * tan_phi * tan_phi);
}

MembershipReport validate_membership(const QuadraticFunction& f,
                                     const FunctionClassParams& params) {
  MembershipReport rep;
  rep.dimension_ok = f.dimension() == params.dim;
  rep.min_eigenvalue = f.min_eigenvalue();
  rep.max_eigenvalue = f.max_eigenvalue();
  rep.minimizer_norm = f.minimizer_norm();
  rep.strongly_convex = rep.min_eigenvalue >= params.alpha * (1.0 - tol::kEigenRelative);
  rep.smooth = rep.max_eigenvalue <= params.beta * (1.0 + tol::kEigenRelative);
  rep.in_unit_ball = rep.minimizer_norm <= 1.0 + tol::kUnitBall;
  rep.zero_minimum = true;
  return rep;
}

QuadraticFunction departure_placeholder(const FunctionClassParams& params) {
  params.validate();
  return QuadraticFunction::isotropic(params.dim, params.alpha, Vector::Zero(params.dim));
}

}  // namespace odgd
