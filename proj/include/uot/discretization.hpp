#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>

#include "uot/rbf_stencils.hpp"

namespace uot {

/// Uniform grid on [0, 1]: N_t intervals, N_t + 1 nodes t_i = i * dt.
struct TimeGrid {
  int nt = 0;
  double dt = 0.0;
  Eigen::VectorXd nodes;

  static TimeGrid uniform(int nt);
  int rows() const { return nt + 1; }
};

/// Eigenpairs of the ghost-point second-difference operator together with
/// the forward/inverse cosine transform tables.
struct SpectralBasis {
  TimeGrid grid;
  Eigen::VectorXd gamma;   // gamma_i = (-2 + 2 cos(i pi dt)) / dt^2
  Eigen::MatrixXd modes;   // column i holds cos(i pi t_k); inverse transform
  Eigen::MatrixXd forward; // mode coefficients = forward * samples
};

SpectralBasis build_spectral_basis(const TimeGrid& grid);

using SpatialOperator = Eigen::SparseMatrix<double>;

/// Fields are (N_t + 1) x N_n matrices: rows sweep time, columns nodes.

/// Ghost-point-eliminated second difference in time applied to every column.
Eigen::MatrixXd second_time_difference(const Eigen::MatrixXd& field, double dt);

/// Second-order first derivative in time: central interior rows, one-sided
/// three-point stencils on rows 0 and N_t.
Eigen::MatrixXd one_sided_time_derivative(const Eigen::MatrixXd& field, double dt);

/// Right-hand-side correction encoding time-Neumann data: row 0 carries
/// (2/dt) g0, row N_t carries -(2/dt) gT, interior rows are zero. The system
/// E lambda + L lambda - lambda = rhs + correction then discretizes the
/// Neumann problem.
Eigen::MatrixXd ghost_rhs_correction(const Eigen::VectorXd& g0, const Eigen::VectorXd& gT,
                                     double dt, int nt);

/// Sparse spatial Laplacian: row j holds node j's stencil weights a_k.
SpatialOperator assemble_laplacian(const StencilSet& stencils);

/// The three sparse tangential-derivative matrices B_c built from the
/// divergence weight vectors; div m = sum_c B_c m_c and (grad lambda)_c =
/// B_c lambda.
std::array<SpatialOperator, 3> assemble_gradient(const StencilSet& stencils);

} // namespace uot
