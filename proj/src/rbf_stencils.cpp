#include "uot/rbf_stencils.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uot/error.hpp"

namespace uot {

double gaussian(double r, double eps) {
  const double t = eps * r;
  return std::exp(-t * t);
}

Eigen::VectorXd gaussian_gradient(const Eigen::VectorXd& displacement, double eps) {
  const double phi = std::exp(-eps * eps * displacement.squaredNorm());
  return -2.0 * eps * eps * phi * displacement;
}

double gaussian_laplacian(const Eigen::VectorXd& displacement, double eps) {
  const double r2 = displacement.squaredNorm();
  const double e2 = eps * eps;
  const int d = static_cast<int>(displacement.size());
  return (4.0 * e2 * e2 * r2 - 2.0 * d * e2) * std::exp(-e2 * r2);
}

std::vector<Monomial> monomial_basis(int dim, int degree) {
  std::vector<Monomial> basis;
  for (int d = 0; d <= degree; ++d) {
    if (dim == 2) {
      for (int i = d; i >= 0; --i) {
        Monomial m;
        m.e = {i, d - i, 0};
        basis.push_back(m);
      }
    } else {
      for (int i = d; i >= 0; --i) {
        for (int j = d - i; j >= 0; --j) {
          Monomial m;
          m.e = {i, j, d - i - j};
          basis.push_back(m);
        }
      }
    }
  }
  return basis;
}

double monomial_eval(const Monomial& m, const Eigen::VectorXd& x) {
  double v = 1.0;
  for (int a = 0; a < static_cast<int>(x.size()); ++a) {
    for (int p = 0; p < m.e[a]; ++p) v *= x[a];
  }
  return v;
}

double PointEvaluationOp::kernel_rhs(const Eigen::VectorXd& xk, double eps) const {
  return gaussian(xk.norm(), eps);
}

double PointEvaluationOp::monomial_rhs(const Monomial& m) const {
  return m.degree() == 0 ? 1.0 : 0.0;
}

double LaplacianOp::kernel_rhs(const Eigen::VectorXd& xk, double eps) const {
  return gaussian_laplacian(-xk, eps);
}

double LaplacianOp::monomial_rhs(const Monomial& m) const {
  // Delta p at the origin is 2 for each pure square, 0 otherwise.
  for (int a = 0; a < 3; ++a) {
    if (m.e[a] == 2 && m.degree() == 2) return 2.0;
  }
  return 0.0;
}

double DirectionalGradientOp::kernel_rhs(const Eigen::VectorXd& xk, double eps) const {
  return dir_.dot(gaussian_gradient(-xk, eps));
}

double DirectionalGradientOp::monomial_rhs(const Monomial& m) const {
  if (m.degree() != 1) return 0.0;
  for (int a = 0; a < static_cast<int>(dir_.size()); ++a) {
    if (m.e[a] == 1) return dir_[a];
  }
  return 0.0;
}

namespace {

// Greedy deterministic selection of numerically independent columns
// (modified Gram-Schmidt with a relative residual threshold). Degenerate
// stencils -- collinear projections, flat clouds -- shed the dependent
// monomials here instead of producing a singular saddle matrix.
std::vector<int> independent_columns(const Eigen::MatrixXd& P, double tol_rel) {
  const int m = static_cast<int>(P.cols());
  Eigen::MatrixXd resid = P;
  std::vector<bool> used(m, false);
  std::vector<int> kept;
  double scale = 0.0;
  for (int j = 0; j < m; ++j) scale = std::max(scale, P.col(j).norm());
  if (scale == 0.0) return kept;

  for (int pick = 0; pick < m; ++pick) {
    int best = -1;
    double best_norm = tol_rel * scale;
    for (int j = 0; j < m; ++j) {
      if (used[j]) continue;
      const double nrm = resid.col(j).norm();
      if (nrm > best_norm) {
        best_norm = nrm;
        best = j;
      }
    }
    if (best < 0) break;
    used[best] = true;
    kept.push_back(best);
    const Eigen::VectorXd q = resid.col(best) / best_norm;
    for (int j = 0; j < m; ++j) {
      if (!used[j]) resid.col(j) -= q.dot(resid.col(j)) * q;
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

} // namespace

WeightSystemResult
solve_weight_system(const std::vector<Eigen::VectorXd>& nodes, double eps, int degree,
                    const std::vector<const StencilOperator*>& ops, int node_index) {
  const int n = static_cast<int>(nodes.size());
  const int dim = static_cast<int>(nodes[0].size());

  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      A(i, k) = gaussian((nodes[i] - nodes[k]).norm(), eps);
    }
  }

  const auto basis = monomial_basis(dim, degree);
  const int m = static_cast<int>(basis.size());
  Eigen::MatrixXd P(n, m);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < m; ++l) {
      P(i, l) = monomial_eval(basis[l], nodes[i]);
    }
  }

  WeightSystemResult result;
  result.kept = independent_columns(P, 1e-10);
  const int km = static_cast<int>(result.kept.size());

  Eigen::MatrixXd saddle = Eigen::MatrixXd::Zero(n + km, n + km);
  saddle.topLeftCorner(n, n) = A;
  for (int l = 0; l < km; ++l) {
    saddle.col(n + l).head(n) = P.col(result.kept[l]);
    saddle.row(n + l).head(n) = P.col(result.kept[l]).transpose();
  }

  const int nops = static_cast<int>(ops.size());
  Eigen::MatrixXd rhs(n + km, nops);
  for (int o = 0; o < nops; ++o) {
    for (int k = 0; k < n; ++k) rhs(k, o) = ops[o]->kernel_rhs(nodes[k], eps);
    for (int l = 0; l < km; ++l) rhs(n + l, o) = ops[o]->monomial_rhs(basis[result.kept[l]]);
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(saddle);
  const double max_piv = lu.maxPivot();
  const double min_piv = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  result.condition = (min_piv > 0.0) ? max_piv / min_piv
                                     : std::numeric_limits<double>::infinity();
  if (!(min_piv > 0.0) || result.condition > 1e16) {
    throw make_error("weight system is numerically singular (pivot ratio ",
                     result.condition, ") at node ", node_index,
                     "; stencil points may be coincident or degenerate");
  }

  Eigen::MatrixXd sol = lu.solve(rhs);
  // Two rounds of iterative refinement recover the digits pivot growth eats
  // on nearly flat kernels.
  for (int round = 0; round < 2; ++round) {
    sol += lu.solve(rhs - saddle * sol);
  }
  result.weights = sol.topRows(n);
  result.multipliers = sol.bottomRows(km);
  return result;
}

double interpolation_condition(const std::vector<Eigen::VectorXd>& nodes, double eps) {
  const int n = static_cast<int>(nodes.size());
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      A(i, k) = gaussian((nodes[i] - nodes[k]).norm(), eps);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

double select_shape_parameter(const std::vector<Eigen::VectorXd>& nodes,
                              double kappa_target, int node_index) {
  if (!(kappa_target > 1.0)) {
    throw make_error("target condition number must exceed 1, got ", kappa_target);
  }
  double radius = 0.0;
  for (const auto& p : nodes) radius = std::max(radius, p.norm());
  if (radius <= 0.0) {
    throw make_error("shape selection: all stencil points coincide at node ", node_index);
  }

  const auto F = [&](double eps) {
    const double kappa = interpolation_condition(nodes, eps);
    if (std::isinf(kappa)) return std::numeric_limits<double>::infinity();
    return std::log(kappa / kappa_target);
  };

  // kappa(A(eps)) decreases in eps: bracket with F(lo) >= 0 >= F(hi).
  double lo = 0.1 / radius;
  double hi = 10.0 / radius;
  for (int i = 0; i < 60 && F(lo) < 0.0; ++i) lo *= 0.25;
  for (int i = 0; i < 60 && F(hi) > 0.0; ++i) hi *= 4.0;
  if (F(lo) < 0.0 || F(hi) > 0.0) {
    throw make_error("target condition ", kappa_target, " unreachable at node ",
                     node_index, "; achievable range is [",
                     interpolation_condition(nodes, hi), ", ",
                     interpolation_condition(nodes, lo), "]");
  }

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    mid = 0.5 * (lo + hi);
    const double f = F(mid);
    if (std::abs(f) <= 1e-10) return mid;
    if (f > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd laplacian_stencil(const std::vector<Eigen::Vector2d>& projected,
                                  double eps, int poly_degree, int node_index) {
  std::vector<Eigen::VectorXd> nodes;
  nodes.reserve(projected.size());
  for (const auto& p : projected) nodes.push_back(p);
  LaplacianOp op;
  const auto result = solve_weight_system(nodes, eps, poly_degree, {&op}, node_index);
  return result.weights.col(0);
}

int feasible_divergence_degree(int requested, int stencil_size) {
  int degree = 0;
  for (int l = 1; l <= requested; ++l) {
    if ((l + 1) * (l + 2) * (l + 3) / 6 <= stencil_size) degree = l;
  }
  return degree;
}

std::array<Eigen::VectorXd, 3>
divergence_stencil(const std::vector<Eigen::VectorXd>& rotated, const TangentFrame& frame,
                   double eps, int poly_degree, int node_index) {
  // In the rotated frame, (P grad)_c becomes the directional derivative along
  // (s1[c], s2[c], 0).
  std::array<DirectionalGradientOp, 3> ops = {
      DirectionalGradientOp(Eigen::Vector3d(frame.s1[0], frame.s2[0], 0.0)),
      DirectionalGradientOp(Eigen::Vector3d(frame.s1[1], frame.s2[1], 0.0)),
      DirectionalGradientOp(Eigen::Vector3d(frame.s1[2], frame.s2[2], 0.0))};
  const int degree = feasible_divergence_degree(poly_degree,
                                                static_cast<int>(rotated.size()));
  const auto result = solve_weight_system(rotated, eps, degree,
                                          {&ops[0], &ops[1], &ops[2]}, node_index);
  return {result.weights.col(0), result.weights.col(1), result.weights.col(2)};
}

StencilSet build_stencils(const PointCloud& cloud, const std::vector<TangentFrame>& frames,
                          const KernelConfig& config, ProjectionMode mode) {
  const int n_nodes = cloud.size();
  const int n = config.stencil_size;
  if (n_nodes < n) {
    throw make_error("cloud has ", n_nodes, " nodes, fewer than the stencil size ", n);
  }

  StencilSet set;
  set.stencil_size = n;
  set.neighbors.resize(n_nodes, n);
  set.proj_u.resize(n_nodes, n);
  set.proj_v.resize(n_nodes, n);
  set.lap_weights.resize(n_nodes, n);
  for (auto& w : set.div_weights) w.resize(n_nodes, n);
  set.shape_lap.resize(n_nodes);
  set.shape_div.resize(n_nodes);
  set.cond_lap.resize(n_nodes);

  const KnnIndex index(cloud);

  for (int j = 0; j < n_nodes; ++j) {
    NeighborSet nb = index.query(j, n);
    project_neighbor_set(cloud, frames[j], nb, mode);
    for (int k = 0; k < n; ++k) {
      set.neighbors(j, k) = nb.neighbors[k];
      set.proj_u(j, k) = nb.projected[k][0];
      set.proj_v(j, k) = nb.projected[k][1];
    }

    std::vector<Eigen::VectorXd> proj2d;
    proj2d.reserve(n);
    for (const auto& p : nb.projected) proj2d.push_back(p);

    std::vector<Eigen::VectorXd> rot3d;
    rot3d.reserve(n);
    for (int k : nb.neighbors) {
      rot3d.push_back(frames[j].rotation * (cloud.points[k] - cloud.points[j]));
    }

    const double eps_lap = (config.shape_mode == ShapeMode::Fixed)
                               ? config.fixed_shape
                               : select_shape_parameter(proj2d, config.target_condition, j);
    const double eps_div = (config.shape_mode == ShapeMode::Fixed)
                               ? config.fixed_shape
                               : select_shape_parameter(rot3d, config.target_condition, j);

    set.lap_weights.row(j) =
        laplacian_stencil(nb.projected, eps_lap, config.poly_degree, j).transpose();
    const auto b = divergence_stencil(rot3d, frames[j], eps_div, config.poly_degree, j);
    for (int c = 0; c < 3; ++c) set.div_weights[c].row(j) = b[c].transpose();

    set.shape_lap[j] = eps_lap;
    set.shape_div[j] = eps_div;
    set.cond_lap[j] = interpolation_condition(proj2d, eps_lap);
  }
  return set;
}

} // namespace uot
