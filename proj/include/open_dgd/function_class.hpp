#pragma once

// Members of the class F(alpha, beta): alpha-strongly convex, beta-smooth
// functions with zero minimum value attained inside the closed unit ball.
// Only quadratics ship; the abstract interface is kept so other members can be
// plugged into the function-generic bound formulas later.

#include "open_dgd/common.hpp"

namespace odgd {

struct FunctionClassParams {
  double alpha = 1.0;
  double beta = 1.0;
  int dim = 1;

  double kappa() const { return beta / alpha; }
  // Throws std::invalid_argument unless alpha > 0, beta >= alpha and dim >= 1.
  void validate() const;
};

class SmoothStronglyConvex {
 public:
  virtual ~SmoothStronglyConvex() = default;

  virtual int dimension() const = 0;
  virtual double value(Eigen::Ref<const Vector> x) const = 0;
  virtual Vector gradient(Eigen::Ref<const Vector> x) const = 0;
  virtual double strong_convexity() const = 0;
  virtual double smoothness() const = 0;
  virtual double minimizer_norm() const = 0;
};

/// f(x) = 1/2 (x - c)^T H (x - c) with H symmetric positive definite.
///
/// The spectrum of H is computed once at construction (or supplied by the
/// caller through from_spectrum) so membership checks are O(1) afterwards.
/// Objects are immutable; all member functions are safe to call concurrently.
class QuadraticFunction final : public SmoothStronglyConvex {
 public:
  // Throws std::invalid_argument for non-square, non-symmetric or non-PD
  // Hessians and DimensionError when sizes of H and c disagree.
  QuadraticFunction(Matrix hessian, Vector minimizer);

  // H = Q diag(eigenvalues) Q^T; Q must be orthogonal (not re-checked).
  static QuadraticFunction from_spectrum(const Matrix& rotation, const Vector& eigenvalues,
                                         Vector minimizer);
  static QuadraticFunction isotropic(int dim, double curvature, Vector minimizer);

  int dimension() const override { return static_cast<int>(minimizer_.size()); }
  double value(Eigen::Ref<const Vector> x) const override;
  Vector gradient(Eigen::Ref<const Vector> x) const override;
  double strong_convexity() const override { return min_eig_; }
  double smoothness() const override { return max_eig_; }
  double minimizer_norm() const override { return minimizer_.norm(); }

  // out += scale * H (x - c); no allocation, used by the DGD kernels.
  void accumulate_gradient(Eigen::Ref<const Vector> x, double scale,
                           Eigen::Ref<Vector> out) const;

  const Matrix& hessian() const { return hessian_; }
  const Vector& minimizer() const { return minimizer_; }
  double min_eigenvalue() const { return min_eig_; }
  double max_eigenvalue() const { return max_eig_; }

 private:
  QuadraticFunction(Matrix hessian, Vector minimizer, double min_eig, double max_eig);

  Matrix hessian_;
  Vector minimizer_;
  double min_eig_ = 0.0;
  double max_eig_ = 0.0;
};

Matrix rotation2d(double angle);

/// Axis-aligned quadratic beta/2 u^2 + alpha/2 v^2 rotated by sign * phi and
/// translated to `minimizer`.  Hessian: R(sign*phi) diag(beta, alpha) R^T.
struct RotatedQuadratic2D {
  double phi = 0.0;
  int sign = 1;
  Eigen::Vector2d minimizer = Eigen::Vector2d::Zero();
  double alpha = 1.0;
  double beta = 1.0;

  Matrix hessian() const;
  QuadraticFunction expand() const;
};

// The running two-dimensional example with alpha = 1, beta = kappa and
// tan(phi) = 1/sqrt(kappa).  argmin(f1 + f2) = (0, (kappa-1)/(2 sqrt(kappa)))
// while argmin(f1 + fb) = 0: fb is f2 rotated by 2*phi about its minimizer.
struct ExamplePair {
  double kappa = 1.0;
  double phi = 0.0;
  RotatedQuadratic2D f1_spec;
  RotatedQuadratic2D f2_spec;
  RotatedQuadratic2D fb_spec;
  QuadraticFunction f1;
  QuadraticFunction f2;
  QuadraticFunction fb;
};

ExamplePair make_example_pair(double kappa);

// Second coordinate of argmin(f1 + f2) for a general angle.
double example_pair_offset(double kappa, double tan_phi);

struct MembershipReport {
  bool dimension_ok = true;
  bool strongly_convex = true;  // lambda_min(H) >= alpha (relative slack)
  bool smooth = true;           // lambda_max(H) <= beta (relative slack)
  bool in_unit_ball = true;     // ||c|| <= 1
  bool zero_minimum = true;     // structural for quadratics
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double minimizer_norm = 0.0;

  bool spectrum_in_range() const { return strongly_convex && smooth; }
  bool ok() const {
    return dimension_ok && strongly_convex && smooth && in_unit_ball && zero_minimum;
  }
};

MembershipReport validate_membership(const QuadraticFunction& f, const FunctionClassParams& params);

// Stand-in used when an agent leaves: H = alpha I, c = 0.  It is a member of
// F(alpha, beta) so the switching dynamics stay inside the class.
QuadraticFunction departure_placeholder(const FunctionClassParams& params);

}  // namespace odgd
