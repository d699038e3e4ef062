#include "uot/elliptic_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>

#include "uot/error.hpp"

namespace uot {

EllipticSystem::EllipticSystem(SpatialOperator L, SpectralBasis basis, EllipticOptions opts)
    : L_(std::move(L)), basis_(std::move(basis)), opts_(opts) {
  const int n_nodes = static_cast<int>(L_.rows());
  const int modes = basis_.grid.rows();

  SpatialOperator identity(n_nodes, n_nodes);
  identity.setIdentity();

  mode_matrices_.reserve(modes);
  for (int i = 0; i < modes; ++i) {
    SpatialOperator M = L_ + (basis_.gamma[i] + opts_.shift) * identity;
    M.makeCompressed();
    mode_matrices_.push_back(std::move(M));
  }

  if (!opts_.iterative) {
    factors_.reserve(modes);
    for (int i = 0; i < modes; ++i) {
      auto lu = std::make_unique<Eigen::SparseLU<SpatialOperator>>();
      lu->compute(mode_matrices_[i]);
      if (lu->info() != Eigen::Success) {
        throw make_error("mode matrix ", i, " (gamma = ", basis_.gamma[i],
                         ") is singular");
      }
      factors_.push_back(std::move(lu));
    }
  }
}

Eigen::MatrixXd EllipticSystem::solve(const Eigen::MatrixXd& rhs, const Eigen::VectorXd& g0,
                                      const Eigen::VectorXd& gT) const {
  const int rows = basis_.grid.rows();
  const int n_nodes = static_cast<int>(L_.rows());
  if (rhs.rows() != rows || rhs.cols() != n_nodes) {
    throw make_error("elliptic solve: rhs is ", rhs.rows(), "x", rhs.cols(),
                     ", expected ", rows, "x", n_nodes);
  }

  const Eigen::MatrixXd b = rhs + ghost_rhs_correction(g0, gT, basis_.grid.dt, basis_.grid.nt);
  const Eigen::MatrixXd coeffs = basis_.forward * b;

  Eigen::MatrixXd mode_solutions(rows, n_nodes);
  for (int i = 0; i < rows; ++i) {
    const Eigen::VectorXd r = coeffs.row(i).transpose();
    Eigen::VectorXd w;
    if (!opts_.iterative) {
      w = factors_[i]->solve(r);
    } else {
      Eigen::BiCGSTAB<SpatialOperator, Eigen::IncompleteLUT<double>> krylov;
      krylov.setTolerance(opts_.tol);
      krylov.setMaxIterations(20 * n_nodes);
      krylov.compute(mode_matrices_[i]);
      w = krylov.solve(r);
      if (krylov.info() != Eigen::Success) {
        throw make_error("iterative solve failed on mode ", i, " with residual ",
                         krylov.error());
      }
    }
    mode_solutions.row(i) = w.transpose();
  }

  Eigen::MatrixXd lambda = basis_.modes * mode_solutions;

  const double defect = residual(lambda, b);
  const double allowed = opts_.tol * (1.0 + rhs.cwiseAbs().maxCoeff());
  if (!(defect <= allowed)) {
    throw make_error("elliptic solve residual ", defect, " exceeds tolerance ", allowed);
  }
  return lambda;
}

double EllipticSystem::residual(const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& b) const {
  const Eigen::MatrixXd defect = second_time_difference(lambda, basis_.grid.dt) +
                                 (L_ * lambda.transpose()).transpose() +
                                 opts_.shift * lambda - b;
  return defect.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd dense_oracle_solve(const SpatialOperator& L, const SpectralBasis& basis,
                                   const Eigen::MatrixXd& rhs, const Eigen::VectorXd& g0,
                                   const Eigen::VectorXd& gT, double shift) {
  const int rows = basis.grid.rows();
  const int n_nodes = static_cast<int>(L.rows());
  const int total = rows * n_nodes;
  if (total > 5000) {
    throw make_error("dense oracle limited to 5000 unknowns, got ", total);
  }
  const double dt = basis.grid.dt;
  const double s = 1.0 / (dt * dt);

  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(total, total);
  const Eigen::MatrixXd Ld(L);
  for (int i = 0; i < rows; ++i) {
    full.block(i * n_nodes, i * n_nodes, n_nodes, n_nodes) =
        Ld + (shift - 2.0 * s) * Eigen::MatrixXd::Identity(n_nodes, n_nodes);
    if (i == 0 || i == rows - 1) {
      const int other = (i == 0) ? 1 : rows - 2;
      full.block(i * n_nodes, other * n_nodes, n_nodes, n_nodes) +=
          2.0 * s * Eigen::MatrixXd::Identity(n_nodes, n_nodes);
    } else {
      full.block(i * n_nodes, (i - 1) * n_nodes, n_nodes, n_nodes) +=
          s * Eigen::MatrixXd::Identity(n_nodes, n_nodes);
      full.block(i * n_nodes, (i + 1) * n_nodes, n_nodes, n_nodes) +=
          s * Eigen::MatrixXd::Identity(n_nodes, n_nodes);
    }
  }

  const Eigen::MatrixXd b = rhs + ghost_rhs_correction(g0, gT, dt, basis.grid.nt);
  Eigen::VectorXd stacked(total);
  for (int i = 0; i < rows; ++i) {
    stacked.segment(i * n_nodes, n_nodes) = b.row(i).transpose();
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(full);
  const Eigen::VectorXd sol = lu.solve(stacked);
  if (!sol.allFinite()) {
    throw make_error("dense oracle: full space-time system is singular");
  }

  Eigen::MatrixXd lambda(rows, n_nodes);
  for (int i = 0; i < rows; ++i) {
    lambda.row(i) = sol.segment(i * n_nodes, n_nodes).transpose();
  }
  return lambda;
}

} // namespace uot
