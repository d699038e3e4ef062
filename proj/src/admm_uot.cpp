#include "uot/admm_uot.hpp"

#include <cmath>

#include "uot/error.hpp"

namespace uot {

namespace {

// Applies a node-space sparse operator to every time row of a field.
Eigen::MatrixXd apply_nodes(const SpatialOperator& op, const Eigen::MatrixXd& field) {
  return (op * field.transpose()).transpose();
}

double quintic_derivative(double rho, double c1, double m2, double f2, double alpha,
                          double eta) {
  const double a2 = 2.0 / (eta * alpha) + rho;
  const double a1 = 1.0 / alpha + rho;
  return alpha * (2.0 * a2 * a1 * a1 * (rho - c1) + 2.0 * a2 * a2 * a1 * (rho - c1) +
                  a2 * a2 * a1 * a1) -
         m2 * a2 - 2.0 * f2 / eta * a1;
}

} // namespace

double quintic_residual(double rho, double rho_bar_minus_p, double m_norm2,
                        double f_minus_r_sq, double alpha, double eta) {
  const double a2 = 2.0 / (eta * alpha) + rho;
  const double a1 = 1.0 / alpha + rho;
  return alpha * a2 * a2 * a1 * a1 * (rho - rho_bar_minus_p) - 0.5 * m_norm2 * a2 * a2 -
         f_minus_r_sq / eta * a1 * a1;
}

double solve_quintic(double c1, double m2, double f2, double alpha, double eta) {
  const double g_at_zero = quintic_residual(0.0, c1, m2, f2, alpha, eta);
  if (g_at_zero >= 0.0) return 0.0;

  const double B = std::abs(c1) + std::cbrt(m2 / (2.0 * alpha)) +
                   std::cbrt(f2 / (eta * alpha)) + 1.0;
  const double g_at_B = quintic_residual(B, c1, m2, f2, alpha, eta);
  if (g_at_B < 0.0) {
    throw make_error("quintic bracket failure: G(0) = ", g_at_zero, ", G(B) = ", g_at_B,
                     " with rho_bar - p = ", c1, ", |m_bar - q|^2 = ", m2,
                     ", (f_bar - r)^2 = ", f2, ", alpha = ", alpha, ", eta = ", eta);
  }

  // G is increasing beyond max(0, c1), so the largest root lives there.
  double lo = std::max(0.0, c1);
  double hi = B;
  const double a2 = 2.0 / (eta * alpha) + B;
  const double a1 = 1.0 / alpha + B;
  const double scale = alpha * a2 * a2 * a1 * a1 * (1.0 + B);
  const double gtol = 1e-12 * scale;

  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double g = quintic_residual(x, c1, m2, f2, alpha, eta);
    if (std::abs(g) <= gtol) return x;
    if (g < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double dg = quintic_derivative(x, c1, m2, f2, alpha, eta);
    double next = (dg != 0.0) ? x - g / dg : lo;
    if (!(next > lo) || !(next < hi) || !std::isfinite(next)) {
      next = 0.5 * (lo + hi);
    }
    x = next;
  }
  return x;
}

void step1_update(AdmmState& state, double alpha, double eta) {
  const Eigen::MatrixXd c1 = state.rho_bar - state.p;
  const Vec3Field mq = {state.m_bar.x - state.q.x, state.m_bar.y - state.q.y,
                        state.m_bar.z - state.q.z};
  const Eigen::MatrixXd m2 = mq.squared_norm();
  const Eigen::MatrixXd fr = state.f_bar - state.r;

  const int rows = static_cast<int>(c1.rows());
  const int cols = static_cast<int>(c1.cols());
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double f2 = fr(i, j) * fr(i, j);
      const double rho = solve_quintic(c1(i, j), m2(i, j), f2, alpha, eta);
      state.rho(i, j) = rho;
      const double cm = alpha * rho / (1.0 + alpha * rho);
      state.m.x(i, j) = cm * mq.x(i, j);
      state.m.y(i, j) = cm * mq.y(i, j);
      state.m.z(i, j) = cm * mq.z(i, j);
      const double cf = eta * alpha * rho / (2.0 + eta * alpha * rho);
      state.f(i, j) = cf * fr(i, j);
    }
  }
}

void step2_update(AdmmState& state, const UotProblem& problem, IterationReport& report,
                  bool project_m_bar) {
  const TimeGrid& grid = problem.grid();
  const double dt = grid.dt;
  const int nt = grid.nt;

  const Eigen::MatrixXd u = state.rho + state.p;
  const Vec3Field w = {state.m.x + state.q.x, state.m.y + state.q.y,
                       state.m.z + state.q.z};
  const Eigen::MatrixXd v = state.f + state.r;

  const Eigen::MatrixXd div_w = apply_nodes(problem.gradient[0], w.x) +
                                apply_nodes(problem.gradient[1], w.y) +
                                apply_nodes(problem.gradient[2], w.z);
  const Eigen::MatrixXd rhs = -one_sided_time_derivative(u, dt) - div_w + v;
  const Eigen::VectorXd g0 = problem.rho0 - u.row(0).transpose();
  const Eigen::VectorXd gT = problem.rhoT - u.row(nt).transpose();

  const Eigen::MatrixXd lambda = problem.system.solve(rhs, g0, gT);

  state.rho_bar = u + one_sided_time_derivative(lambda, dt);
  state.m_bar = {w.x + apply_nodes(problem.gradient[0], lambda),
                 w.y + apply_nodes(problem.gradient[1], lambda),
                 w.z + apply_nodes(problem.gradient[2], lambda)};
  state.f_bar = v + lambda;

  if (project_m_bar) {
    for (int j = 0; j < problem.cloud.size(); ++j) {
      const Eigen::Vector3d& n = problem.cloud.normals[j];
      for (int i = 0; i <= nt; ++i) {
        Eigen::Vector3d mv(state.m_bar.x(i, j), state.m_bar.y(i, j), state.m_bar.z(i, j));
        mv -= n.dot(mv) * n;
        state.m_bar.x(i, j) = mv[0];
        state.m_bar.y(i, j) = mv[1];
        state.m_bar.z(i, j) = mv[2];
      }
    }
  }

  // Continuity defect of the fully discrete optimality system, reconstructed
  // from the recovered fields (lambda = f_bar - v by the recovery algebra).
  const Eigen::MatrixXd lambda_rec = state.f_bar - v;
  const Eigen::MatrixXd b = rhs + ghost_rhs_correction(g0, gT, dt, nt);
  report.continuity =
      problem.system.residual(lambda_rec, b) / (1.0 + b.cwiseAbs().maxCoeff());

  // Diagnostic: the same constraint measured with the composed first-order
  // operators on interior time rows.
  const Eigen::MatrixXd div_m_bar = apply_nodes(problem.gradient[0], state.m_bar.x) +
                                    apply_nodes(problem.gradient[1], state.m_bar.y) +
                                    apply_nodes(problem.gradient[2], state.m_bar.z);
  const Eigen::MatrixXd cont_fd =
      one_sided_time_derivative(state.rho_bar, dt) + div_m_bar - state.f_bar;
  double interior_max = 0.0;
  for (int i = 1; i < nt; ++i) {
    interior_max = std::max(interior_max, cont_fd.row(i).cwiseAbs().maxCoeff());
  }
  report.continuity_fd = interior_max / (1.0 + b.cwiseAbs().maxCoeff());
}

void step3_update(AdmmState& state) {
  state.p += state.rho - state.rho_bar;
  state.q.x += state.m.x - state.m_bar.x;
  state.q.y += state.m.y - state.m_bar.y;
  state.q.z += state.m.z - state.m_bar.z;
  state.r += state.f - state.f_bar;
}

CostBreakdown wfr_cost(const Eigen::MatrixXd& rho, const Vec3Field& m,
                       const Eigen::MatrixXd& f, const Eigen::VectorXd& weights,
                       double dt, double eta, double rho_floor, double sentinel) {
  const int rows = static_cast<int>(rho.rows());
  const int cols = static_cast<int>(rho.cols());
  const Eigen::MatrixXd m2 = m.squared_norm();

  CostBreakdown out;
  for (int i = 0; i < rows; ++i) {
    const double tw = dt * ((i == 0 || i == rows - 1) ? 0.5 : 1.0);
    for (int j = 0; j < cols; ++j) {
      const double rr = rho(i, j);
      const double mm2 = m2(i, j);
      const double ff = f(i, j);
      double contrib;
      if (rr > rho_floor) {
        contrib = 0.5 * mm2 / rr + ff * ff / (eta * rr);
      } else if (std::sqrt(mm2) <= rho_floor && std::abs(ff) <= rho_floor) {
        contrib = 0.0;
      } else {
        contrib = sentinel;
        ++out.infeasible_points;
      }
      out.value += weights[j] * tw * contrib;
    }
  }
  return out;
}

namespace {

double weighted_l2(const Eigen::MatrixXd& field, const Eigen::VectorXd& weights,
                   double dt) {
  const int rows = static_cast<int>(field.rows());
  double total = 0.0;
  for (int i = 0; i < rows; ++i) {
    const double tw = dt * ((i == 0 || i == rows - 1) ? 0.5 : 1.0);
    total += tw * field.row(i).cwiseAbs2().cwiseProduct(weights.transpose()).sum();
  }
  return total;
}

} // namespace

AdmmResult run(const UotProblem& problem, const AdmmParams& params) {
  const TimeGrid& grid = problem.grid();
  const int rows = grid.rows();
  const int n_nodes = problem.cloud.size();
  const double dt = grid.dt;
  const Eigen::VectorXd& w = problem.cloud.weights;

  AdmmResult result;
  AdmmState& s = result.state;
  s.rho.resize(rows, n_nodes);
  for (int i = 0; i < rows; ++i) {
    const double t = grid.nodes[i];
    s.rho.row(i) = ((1.0 - t) * problem.rho0 + t * problem.rhoT).transpose();
  }
  s.rho_bar = s.rho;
  s.f = Eigen::MatrixXd::Zero(rows, n_nodes);
  s.f_bar = s.f;
  s.p = s.f;
  s.r = s.f;
  s.m = Vec3Field::zero(rows, n_nodes);
  s.m_bar = Vec3Field::zero(rows, n_nodes);
  s.q = Vec3Field::zero(rows, n_nodes);

  double primal0 = -1.0;
  double dual0 = -1.0;

  for (int iter = 1; iter <= params.max_iters; ++iter) {
    const Eigen::MatrixXd rho_bar_prev = s.rho_bar;
    const Vec3Field m_bar_prev = s.m_bar;
    const Eigen::MatrixXd f_bar_prev = s.f_bar;

    IterationReport rep;
    rep.iteration = iter;

    step1_update(s, problem.alpha, problem.eta);
    step2_update(s, problem, rep, params.project_m_bar);
    step3_update(s);
    s.iteration = iter;

    const Eigen::MatrixXd d_rho = s.rho - s.rho_bar;
    const Vec3Field d_m = {s.m.x - s.m_bar.x, s.m.y - s.m_bar.y, s.m.z - s.m_bar.z};
    const Eigen::MatrixXd d_f = s.f - s.f_bar;
    rep.primal = std::sqrt(weighted_l2(d_rho, w, dt) + weighted_l2(d_m.x, w, dt) +
                           weighted_l2(d_m.y, w, dt) + weighted_l2(d_m.z, w, dt) +
                           weighted_l2(d_f, w, dt));
    rep.dual = problem.alpha *
               std::sqrt(weighted_l2(s.rho_bar - rho_bar_prev, w, dt) +
                         weighted_l2(s.m_bar.x - m_bar_prev.x, w, dt) +
                         weighted_l2(s.m_bar.y - m_bar_prev.y, w, dt) +
                         weighted_l2(s.m_bar.z - m_bar_prev.z, w, dt) +
                         weighted_l2(s.f_bar - f_bar_prev, w, dt));

    const CostBreakdown cost =
        wfr_cost(s.rho, s.m, s.f, w, dt, problem.eta, params.rho_floor,
                 params.cost_sentinel);
    rep.wfr = cost.value;
    rep.infeasible_points = cost.infeasible_points;
    result.history.push_back(rep);

    if (iter == 1) {
      primal0 = rep.primal;
      dual0 = rep.dual;
    }
    const double rel_primal = rep.primal / std::max(primal0, 1e-300);
    const double rel_dual = rep.dual / std::max(dual0, 1e-300);
    if (rel_primal <= params.tol && rel_dual <= params.tol) {
      s.converged = true;
      break;
    }
  }
  return result;
}

} // namespace uot
