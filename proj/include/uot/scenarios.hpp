#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uot/discretization.hpp"
#include "uot/geometry.hpp"

namespace uot {

/// Implicit surface with an analytic gradient.
struct LevelSetSurface {
  std::string name;
  std::function<double(const Eigen::Vector3d&)> phi;
  std::function<Eigen::Vector3d(const Eigen::Vector3d&)> grad;
  std::optional<double> analytic_area;
  Eigen::Vector3d box_lo{-0.1, -0.1, -0.1};
  Eigen::Vector3d box_hi{1.1, 1.1, 1.1};
};

/// sphere | ellipsoid | peanut | torus | opener
LevelSetSurface surface_by_name(const std::string& name);

/// Surface area of an axis-aligned ellipsoid from Legendre elliptic integrals.
double ellipsoid_area(double a, double b, double c);

/// Jittered-grid candidates near the zero set, Newton-projected along the
/// gradient, thinned to ~target_count by farthest-point sampling. Nodes land
/// on the level set to 1e-10 with normals grad phi / |grad phi|.
PointCloud sample_surface(const LevelSetSurface& surface, int target_count,
                          std::uint64_t seed = 12345,
                          std::optional<double> total_area = std::nullopt);

/// Sampler invariant under the 90-degree rotation about the axis
/// x = y = 1/2: farthest-point sampling in the quotient metric on a quarter
/// domain, replicated by the four rotations. The surface must share the
/// symmetry (the sphere scenarios do).
PointCloud sample_surface_symmetric(const LevelSetSurface& surface, int target_count,
                                    std::uint64_t seed = 12345,
                                    std::optional<double> total_area = std::nullopt);

/// The 90-degree rotation used by the symmetric sampler and scenarios S1/S2.
Eigen::Vector3d rotate_quarter(const Eigen::Vector3d& x, int times = 1);

/// Sum of scaled Gaussian bumps 100 exp(-|mu - x|^2 / sigma), rescaled so the
/// weighted node sum hits mass_target.
struct DensitySpec {
  struct Component {
    Eigen::Vector3d center;
    double sigma = 0.05;
    double coeff = 1.0;
  };
  std::vector<Component> components;
  double mass_target = 1.0;
};

Eigen::VectorXd evaluate_density(const DensitySpec& spec, const PointCloud& cloud);

DensitySpec rho_mg1_spec();
DensitySpec rho_mg2_spec();

/// Boundary density pair for a named surface scenario; rho0 is normalized to
/// mass 1, rho1 to mass beta. Names: sphere, ellipsoid, peanut, torus,
/// opener, sphere-s1, sphere-s2, airplane, cow.
std::pair<DensitySpec, DensitySpec> scenario_densities(const std::string& name,
                                                       double beta);

/// N equispaced nodes on the circle of circumference 1 (radius 1/(2 pi)) in
/// the z = 0 plane, radial normals, uniform weights 1/N. Arc length of node
/// k is k/N.
PointCloud circle_cloud(int n_nodes);

/// 1D Gaussian (2 pi sigma)^{-1/2} exp(-(x - mu)^2 / (2 sigma)).
double gauss_1d(double x, double mu, double sigma);

/// Space-time Poisson problem on the circle with the exact separable cosine
/// solution; zero Neumann data. N_t = N_n = n.
struct Poisson1dCase {
  PointCloud cloud;
  TimeGrid grid;
  Eigen::MatrixXd rhs;   // for the operator d_tt + Lap - id
  Eigen::MatrixXd exact; // cos(2 pi t) cos(2 pi s) samples
  Eigen::VectorXd g0, gT;
};
Poisson1dCase poisson_1d_case(int n);
double poisson_exact_solution(double t, double s);

/// 1D transport between Gaussians on the circle plus the quantile-coupling
/// cost oracle (evaluated on a fixed fine grid, independent of n).
struct Ot1dCase {
  PointCloud cloud;
  Eigen::VectorXd rho0, rho1; // normalized to unit mass
  double oracle_cost = 0.0;   // (1/2) int (F0^{-1} - F1^{-1})^2 du
};
Ot1dCase ot_1d_case(int n_nodes);

/// Exact squared-W2 between two atomic measures given by equal-position
/// atoms; masses must each sum to 1.
double quantile_coupling_w2sq(const Eigen::VectorXd& positions,
                              const Eigen::VectorXd& mass0, const Eigen::VectorXd& mass1);

/// Oracle shared by tests and the table command.
double ot_1d_oracle_cost(int resolution = 16384);

} // namespace uot
