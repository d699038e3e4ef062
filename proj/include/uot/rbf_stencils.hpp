#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "uot/geometry.hpp"

namespace uot {

enum class ShapeMode {
  Fixed,          // use fixed_shape everywhere
  TargetCondition // bisect per stencil for kappa(A(eps)) = target_condition
};

struct KernelConfig {
  ShapeMode shape_mode = ShapeMode::Fixed;
  double fixed_shape = 1.0;
  double target_condition = 1e10;
  int poly_degree = 2;
  int stencil_size = 7;
};

/// phi(r) = exp(-(eps r)^2)
double gaussian(double r, double eps);
/// grad phi at displacement x - x_k
Eigen::VectorXd gaussian_gradient(const Eigen::VectorXd& displacement, double eps);
/// Laplacian of phi at displacement x - x_k (dimension = displacement size)
double gaussian_laplacian(const Eigen::VectorXd& displacement, double eps);

struct Monomial {
  std::array<int, 3> e{0, 0, 0};
  int degree() const { return e[0] + e[1] + e[2]; }
};

/// Monomials of total degree <= degree in `dim` variables, graded order.
std::vector<Monomial> monomial_basis(int dim, int degree);
double monomial_eval(const Monomial& m, const Eigen::VectorXd& x);

/// A linear operator L evaluated at the stencil center (the local origin).
class StencilOperator {
public:
  virtual ~StencilOperator() = default;
  /// L applied to phi(||x - x_k||), at x = 0.
  virtual double kernel_rhs(const Eigen::VectorXd& xk, double eps) const = 0;
  /// L applied to the monomial, at x = 0.
  virtual double monomial_rhs(const Monomial& m) const = 0;
};

class PointEvaluationOp : public StencilOperator {
public:
  double kernel_rhs(const Eigen::VectorXd& xk, double eps) const override;
  double monomial_rhs(const Monomial& m) const override;
};

class LaplacianOp : public StencilOperator {
public:
  double kernel_rhs(const Eigen::VectorXd& xk, double eps) const override;
  double monomial_rhs(const Monomial& m) const override;
};

/// L u = dir . grad u
class DirectionalGradientOp : public StencilOperator {
public:
  explicit DirectionalGradientOp(Eigen::VectorXd dir) : dir_(std::move(dir)) {}
  double kernel_rhs(const Eigen::VectorXd& xk, double eps) const override;
  double monomial_rhs(const Monomial& m) const override;

private:
  Eigen::VectorXd dir_;
};

struct WeightSystemResult {
  Eigen::MatrixXd weights;     // n x (#operators)
  Eigen::MatrixXd multipliers; // kept_monomials x (#operators)
  std::vector<int> kept;       // indices into monomial_basis(dim, degree)
  double condition = 0.0;      // pivot-ratio estimate of the saddle matrix
};

/// Solves the polynomially augmented saddle system for one or more operators
/// sharing a stencil. `nodes` are local coordinates, center first at the
/// origin. Numerically dependent monomial columns (degenerate stencils) are
/// pruned before assembly. Throws on a rank-deficient saddle matrix.
WeightSystemResult
solve_weight_system(const std::vector<Eigen::VectorXd>& nodes, double eps, int degree,
                    const std::vector<const StencilOperator*>& ops, int node_index = -1);

/// l2 condition number of the RBF interpolation block A(eps); +inf when the
/// smallest eigenvalue is nonpositive in floating point.
double interpolation_condition(const std::vector<Eigen::VectorXd>& nodes, double eps);

/// Shape parameter with kappa(A(eps)) = kappa_target, found by bisection on
/// log(kappa/kappa_target): at most 100 iterations or |F| <= 1e-10.
double select_shape_parameter(const std::vector<Eigen::VectorXd>& nodes,
                              double kappa_target, int node_index = -1);

/// Tangent-plane Laplacian weights for one node.
Eigen::VectorXd laplacian_stencil(const std::vector<Eigen::Vector2d>& projected,
                                  double eps, int poly_degree, int node_index = -1);

/// Projected-gradient weight 3-vectors b_k for one node; component c carries
/// the weights of (P grad)_c so that div_Gamma u = sum_k b_k . u_k.
/// `rotated` are R (x_k - x_c); directions live in the rotated frame.
std::array<Eigen::VectorXd, 3>
divergence_stencil(const std::vector<Eigen::VectorXd>& rotated, const TangentFrame& frame,
                   double eps, int poly_degree, int node_index = -1);

/// Largest polynomial degree l' <= requested with (l'+1)(l'+2)(l'+3)/6 <= n.
int feasible_divergence_degree(int requested, int stencil_size);

/// Per-node operator weights for a whole cloud.
struct StencilSet {
  int stencil_size = 0;
  Eigen::MatrixXi neighbors; // N x n, center first
  Eigen::MatrixXd proj_u;    // N x n tangent coordinates
  Eigen::MatrixXd proj_v;
  Eigen::MatrixXd lap_weights;              // N x n
  std::array<Eigen::MatrixXd, 3> div_weights; // N x n each
  Eigen::VectorXd shape_lap; // shape parameter used per node (2D system)
  Eigen::VectorXd shape_div; // shape parameter used per node (3D system)
  Eigen::VectorXd cond_lap;  // kappa(A(eps)) of the 2D block, for audits

  int size() const { return static_cast<int>(neighbors.rows()); }
};

StencilSet build_stencils(const PointCloud& cloud, const std::vector<TangentFrame>& frames,
                          const KernelConfig& config,
                          ProjectionMode mode = ProjectionMode::AlongNeighborNormal);

} // namespace uot
