#include "uot/discretization.hpp"

#include <cmath>

#include "uot/error.hpp"

namespace uot {

TimeGrid TimeGrid::uniform(int nt) {
  if (nt < 2) throw make_error("time grid needs at least 2 intervals, got ", nt);
  TimeGrid grid;
  grid.nt = nt;
  grid.dt = 1.0 / nt;
  grid.nodes.resize(nt + 1);
  for (int i = 0; i <= nt; ++i) grid.nodes[i] = i * grid.dt;
  return grid;
}

SpectralBasis build_spectral_basis(const TimeGrid& grid) {
  const int rows = grid.rows();
  const int nt = grid.nt;
  SpectralBasis basis;
  basis.grid = grid;
  basis.gamma.resize(rows);
  basis.modes.resize(rows, rows);
  basis.forward.resize(rows, rows);

  const double pi = std::acos(-1.0);
  for (int i = 0; i <= nt; ++i) {
    basis.gamma[i] = (-2.0 + 2.0 * std::cos(i * pi * grid.dt)) / (grid.dt * grid.dt);
    for (int k = 0; k <= nt; ++k) {
      basis.modes(k, i) = std::cos(i * pi * grid.nodes[k]);
    }
  }

  // Closed-grid cosine orthogonality with endpoint half-weights:
  // sum_k'' cos(i pi t_k) cos(j pi t_k) = 0 (i != j), N_t/2 (0 < i < N_t),
  // N_t (i in {0, N_t}).
  for (int i = 0; i <= nt; ++i) {
    const double h = (i == 0 || i == nt) ? nt : nt / 2.0;
    for (int k = 0; k <= nt; ++k) {
      const double c = (k == 0 || k == nt) ? 0.5 : 1.0;
      basis.forward(i, k) = c * basis.modes(k, i) / h;
    }
  }
  return basis;
}

Eigen::MatrixXd second_time_difference(const Eigen::MatrixXd& field, double dt) {
  const int rows = static_cast<int>(field.rows());
  if (rows < 3) throw make_error("second time difference needs N_t >= 2");
  const double s = 1.0 / (dt * dt);
  Eigen::MatrixXd out(rows, field.cols());
  out.row(0) = s * (-2.0 * field.row(0) + 2.0 * field.row(1));
  for (int i = 1; i < rows - 1; ++i) {
    out.row(i) = s * (field.row(i - 1) - 2.0 * field.row(i) + field.row(i + 1));
  }
  out.row(rows - 1) = s * (-2.0 * field.row(rows - 1) + 2.0 * field.row(rows - 2));
  return out;
}

Eigen::MatrixXd one_sided_time_derivative(const Eigen::MatrixXd& field, double dt) {
  const int rows = static_cast<int>(field.rows());
  if (rows < 3) throw make_error("time derivative needs N_t >= 2");
  const double s = 1.0 / (2.0 * dt);
  Eigen::MatrixXd out(rows, field.cols());
  out.row(0) = s * (-3.0 * field.row(0) + 4.0 * field.row(1) - field.row(2));
  for (int i = 1; i < rows - 1; ++i) {
    out.row(i) = s * (field.row(i + 1) - field.row(i - 1));
  }
  out.row(rows - 1) =
      s * (3.0 * field.row(rows - 1) - 4.0 * field.row(rows - 2) + field.row(rows - 3));
  return out;
}

Eigen::MatrixXd ghost_rhs_correction(const Eigen::VectorXd& g0, const Eigen::VectorXd& gT,
                                     double dt, int nt) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nt + 1, g0.size());
  out.row(0) = (2.0 / dt) * g0.transpose();
  out.row(nt) = (-2.0 / dt) * gT.transpose();
  return out;
}

SpatialOperator assemble_laplacian(const StencilSet& stencils) {
  const int n_nodes = stencils.size();
  const int n = stencils.stencil_size;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(n_nodes) * n);
  for (int j = 0; j < n_nodes; ++j) {
    for (int k = 0; k < n; ++k) {
      triplets.emplace_back(j, stencils.neighbors(j, k), stencils.lap_weights(j, k));
    }
  }
  SpatialOperator L(n_nodes, n_nodes);
  L.setFromTriplets(triplets.begin(), triplets.end());
  L.makeCompressed();
  return L;
}

std::array<SpatialOperator, 3> assemble_gradient(const StencilSet& stencils) {
  const int n_nodes = stencils.size();
  const int n = stencils.stencil_size;
  std::array<SpatialOperator, 3> out;
  for (int c = 0; c < 3; ++c) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<size_t>(n_nodes) * n);
    for (int j = 0; j < n_nodes; ++j) {
      for (int k = 0; k < n; ++k) {
        triplets.emplace_back(j, stencils.neighbors(j, k), stencils.div_weights[c](j, k));
      }
    }
    out[c].resize(n_nodes, n_nodes);
    out[c].setFromTriplets(triplets.begin(), triplets.end());
    out[c].makeCompressed();
  }
  return out;
}

} // namespace uot
