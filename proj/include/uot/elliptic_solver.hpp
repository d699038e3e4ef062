#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <vector>

#include "uot/discretization.hpp"

namespace uot {

struct EllipticOptions {
  double tol = 1e-10;
  // Zeroth-order shift: -1 gives mode matrices L + (gamma_i - 1) I, the
  // uniformly invertible convention; +1 is a reproduction flag only.
  double shift = -1.0;
  bool iterative = false; // BiCGSTAB fallback instead of cached sparse LU
};

/// Factorized solver for  d_tt lambda + L lambda + shift * lambda = rhs
/// with time-Neumann data, decoupled into N_t + 1 spatial solves through the
/// cosine basis. Factorizations persist for the lifetime of the system.
class EllipticSystem {
public:
  EllipticSystem(SpatialOperator L, SpectralBasis basis, EllipticOptions opts = {});

  /// lambda with max-norm residual of the fully discrete system bounded by
  /// tol * (1 + max|rhs|). g0/gT enter through the ghost correction.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs, const Eigen::VectorXd& g0,
                        const Eigen::VectorXd& gT) const;

  /// Max-norm defect of E lambda + L lambda + shift lambda - b.
  double residual(const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& b) const;

  const SpectralBasis& basis() const { return basis_; }
  const SpatialOperator& spatial() const { return L_; }
  const EllipticOptions& options() const { return opts_; }
  int mode_count() const { return static_cast<int>(factors_.size()); }

private:
  SpatialOperator L_;
  SpectralBasis basis_;
  EllipticOptions opts_;
  std::vector<SpatialOperator> mode_matrices_;
  std::vector<std::unique_ptr<Eigen::SparseLU<SpatialOperator>>> factors_;
};

inline EllipticSystem build_system(SpatialOperator L, SpectralBasis basis,
                                   EllipticOptions opts = {}) {
  return EllipticSystem(std::move(L), std::move(basis), opts);
}

/// Direct dense solve of the full (N_t+1) N_n space-time system; validation
/// only, capped at 5000 unknowns.
Eigen::MatrixXd dense_oracle_solve(const SpatialOperator& L, const SpectralBasis& basis,
                                   const Eigen::MatrixXd& rhs, const Eigen::VectorXd& g0,
                                   const Eigen::VectorXd& gT, double shift = -1.0);

} // namespace uot
