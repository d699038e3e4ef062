#pragma once

#include <Eigen/Dense>
#include <vector>

#include "uot/elliptic_solver.hpp"
#include "uot/geometry.hpp"

namespace uot {

/// A 3-vector field on the time x node grid, one matrix per component.
struct Vec3Field {
  Eigen::MatrixXd x, y, z;

  static Vec3Field zero(int rows, int cols) {
    return {Eigen::MatrixXd::Zero(rows, cols), Eigen::MatrixXd::Zero(rows, cols),
            Eigen::MatrixXd::Zero(rows, cols)};
  }
  Eigen::MatrixXd squared_norm() const {
    return x.cwiseProduct(x) + y.cwiseProduct(y) + z.cwiseProduct(z);
  }
};

struct AdmmState {
  Eigen::MatrixXd rho, f;     // Step-1 variables (m below)
  Vec3Field m;
  Eigen::MatrixXd rho_bar, f_bar; // Step-2 variables
  Vec3Field m_bar;
  Eigen::MatrixXd p, r;       // duals
  Vec3Field q;
  int iteration = 0;
  bool converged = false;
};

/// Everything fixed for a run: discrete geometry, operators, factorized
/// elliptic system, boundary densities and the model parameters.
struct UotProblem {
  PointCloud cloud;
  StencilSet stencils;
  SpatialOperator laplacian;
  std::array<SpatialOperator, 3> gradient;
  EllipticSystem system;
  Eigen::VectorXd rho0, rhoT;
  double alpha = 1.0;
  double eta = 1.0;

  const TimeGrid& grid() const { return system.basis().grid; }
};

struct IterationReport {
  int iteration = 0;
  double primal = 0.0;      // ||(rho,m,f) - (rho_bar,m_bar,f_bar)||, discrete L2
  double dual = 0.0;        // alpha ||bar^{s+1} - bar^s||
  double continuity = 0.0;  // optimality-system continuity defect, relative
  double continuity_fd = 0.0; // first-order-operator continuity defect, diagnostic
  double wfr = 0.0;
  long infeasible_points = 0; // cost sentinel hits
};

struct AdmmParams {
  double tol = 1e-4; // on primal AND dual residuals, relative to iteration 1
  int max_iters = 3000;
  double rho_floor = 1e-12;
  double cost_sentinel = 1e30;
  bool project_m_bar = false; // tangential projection experiment, default off
};

/// G(rho) whose largest root drives the Step-1 closed forms.
double quintic_residual(double rho, double rho_bar_minus_p, double m_norm2,
                        double f_minus_r_sq, double alpha, double eta);

/// Largest root of the quintic in [0, B], clamped to 0 when G(0) >= 0.
double solve_quintic(double rho_bar_minus_p, double m_norm2, double f_minus_r_sq,
                     double alpha, double eta);

void step1_update(AdmmState& state, double alpha, double eta);
void step2_update(AdmmState& state, const UotProblem& problem, IterationReport& report,
                  bool project_m_bar = false);
void step3_update(AdmmState& state);

struct CostBreakdown {
  double value = 0.0;
  long infeasible_points = 0;
};

/// Trapezoidal-in-time, weighted-in-space integral of M + F over the primal
/// fields. Points below the density floor with live momentum or source
/// contribute the sentinel (reported, never thrown).
CostBreakdown wfr_cost(const Eigen::MatrixXd& rho, const Vec3Field& m,
                       const Eigen::MatrixXd& f, const Eigen::VectorXd& weights,
                       double dt, double eta, double rho_floor = 1e-12,
                       double sentinel = 1e30);

struct AdmmResult {
  AdmmState state;
  std::vector<IterationReport> history;
};

/// rho starts as the linear-in-time interpolation of the boundary densities;
/// everything else starts at zero. Iterates steps 1 -> 2 -> 3 until both
/// residuals drop below tol relative to their first-iteration values.
AdmmResult run(const UotProblem& problem, const AdmmParams& params = {});

} // namespace uot
