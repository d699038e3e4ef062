#include "uot/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "uot/error.hpp"

namespace uot {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::Vector3d centered(const Eigen::Vector3d& x) {
  return x - Eigen::Vector3d(0.5, 0.5, 0.5);
}

} // namespace

double ellipsoid_area(double a, double b, double c) {
  // Legendre form for semi-axes a >= b >= c.
  double axes[3] = {a, b, c};
  std::sort(axes, axes + 3, std::greater<double>());
  a = axes[0];
  b = axes[1];
  c = axes[2];
  const double phi = std::acos(c / a);
  const double k =
      std::sqrt(a * a * (b * b - c * c) / (b * b * (a * a - c * c)));
  const double sin_phi = std::sin(phi);
  return 2.0 * kPi * c * c +
         2.0 * kPi * a * b / sin_phi *
             (std::ellint_2(k, phi) * sin_phi * sin_phi +
              std::ellint_1(k, phi) * std::cos(phi) * std::cos(phi));
}

LevelSetSurface surface_by_name(const std::string& name) {
  LevelSetSurface s;
  s.name = name;
  if (name == "sphere") {
    s.phi = [](const Eigen::Vector3d& x) { return centered(x).squaredNorm() - 0.25; };
    s.grad = [](const Eigen::Vector3d& x) { return Eigen::Vector3d(2.0 * centered(x)); };
    s.analytic_area = kPi; // 4 pi r^2 with r = 1/2
  } else if (name == "ellipsoid") {
    s.phi = [](const Eigen::Vector3d& x) {
      const Eigen::Vector3d c = centered(x);
      return c[0] * c[0] + 3.0 * c[1] * c[1] + 6.0 * c[2] * c[2] - 0.25;
    };
    s.grad = [](const Eigen::Vector3d& x) {
      const Eigen::Vector3d c = centered(x);
      return Eigen::Vector3d(2.0 * c[0], 6.0 * c[1], 12.0 * c[2]);
    };
    s.analytic_area = ellipsoid_area(0.5, 0.5 / std::sqrt(3.0), 0.5 / std::sqrt(6.0));
  } else if (name == "peanut") {
    s.phi = [](const Eigen::Vector3d& x) {
      const Eigen::Vector3d c = centered(x);
      const double A = (4.0 * c[0] - 1.0) * (4.0 * c[0] - 1.0) + 8.0 * c[1] * c[1] +
                       8.0 * c[2] * c[2];
      const double B = (4.0 * c[0] + 1.0) * (4.0 * c[0] + 1.0) + 8.0 * c[1] * c[1] +
                       8.0 * c[2] * c[2];
      return A * B - 1.2;
    };
    s.grad = [](const Eigen::Vector3d& x) {
      const Eigen::Vector3d c = centered(x);
      const double A = (4.0 * c[0] - 1.0) * (4.0 * c[0] - 1.0) + 8.0 * c[1] * c[1] +
                       8.0 * c[2] * c[2];
      const double B = (4.0 * c[0] + 1.0) * (4.0 * c[0] + 1.0) + 8.0 * c[1] * c[1] +
                       8.0 * c[2] * c[2];
      const Eigen::Vector3d gA(8.0 * (4.0 * c[0] - 1.0), 16.0 * c[1], 16.0 * c[2]);
      const Eigen::Vector3d gB(8.0 * (4.0 * c[0] + 1.0), 16.0 * c[1], 16.0 * c[2]);
      return Eigen::Vector3d(B * gA + A * gB);
    };
  } else if (name == "torus") {
    s.phi = [](const Eigen::Vector3d& x) {
      const Eigen::Vector3d c = centered(x);
      const double rho = std::sqrt(c[0] * c[0] + c[1] * c[1]);
      return (0.3 - rho) * (0.3 - rho) + c[2] * c[2] - 0.04;
    };
    s.grad = [](const Eigen::Vector3d& x) {
      const Eigen::Vector3d c = centered(x);
      const double rho = std::max(std::sqrt(c[0] * c[0] + c[1] * c[1]), 1e-14);
      const double t = -2.0 * (0.3 - rho) / rho;
      return Eigen::Vector3d(t * c[0], t * c[1], 2.0 * c[2]);
    };
    s.analytic_area = 4.0 * kPi * kPi * 0.3 * 0.2;
  } else if (name == "opener") {
    s.phi = [](const Eigen::Vector3d& x) {
      const Eigen::Vector3d c = centered(x);
      const double g =
          3.0 * c[0] * c[0] * (1.0 - 5.0 * c[0] * c[0]) - 5.0 * c[1] * c[1];
      return g * g + 5.0 * c[2] * c[2] - 1.0 / 60.0;
    };
    s.grad = [](const Eigen::Vector3d& x) {
      const Eigen::Vector3d c = centered(x);
      const double g =
          3.0 * c[0] * c[0] * (1.0 - 5.0 * c[0] * c[0]) - 5.0 * c[1] * c[1];
      return Eigen::Vector3d(2.0 * g * (6.0 * c[0] - 60.0 * c[0] * c[0] * c[0]),
                             -20.0 * g * c[1], 10.0 * c[2]);
    };
  } else {
    throw make_error("unknown surface '", name, "'");
  }
  return s;
}

namespace {

struct Candidate {
  Eigen::Vector3d point;
  Eigen::Vector3d normal;
};

// Newton projection along grad phi; empty on non-convergence.
std::optional<Candidate> project_to_surface(const LevelSetSurface& s, Eigen::Vector3d x) {
  for (int it = 0; it < 50; ++it) {
    const double value = s.phi(x);
    const Eigen::Vector3d g = s.grad(x);
    const double gn2 = g.squaredNorm();
    if (gn2 < 1e-16) return std::nullopt;
    if (std::abs(value) <= 1e-13) {
      return Candidate{x, g / std::sqrt(gn2)};
    }
    x -= value / gn2 * g;
  }
  return std::nullopt;
}

std::vector<Candidate> surface_candidates(const LevelSetSurface& s, int target,
                                          std::uint64_t seed) {
  const int res = std::max(24, static_cast<int>(std::ceil(std::sqrt(6.0 * target))));
  const Eigen::Vector3d extent = s.box_hi - s.box_lo;
  const double cell = extent.maxCoeff() / res;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.4, 0.4);

  std::vector<Candidate> candidates;
  for (int iz = 0; iz < res; ++iz) {
    for (int iy = 0; iy < res; ++iy) {
      for (int ix = 0; ix < res; ++ix) {
        Eigen::Vector3d x = s.box_lo + cell * Eigen::Vector3d(ix + 0.5 + jitter(rng),
                                                              iy + 0.5 + jitter(rng),
                                                              iz + 0.5 + jitter(rng));
        if ((x.array() < s.box_lo.array()).any() || (x.array() > s.box_hi.array()).any())
          continue;
        const double value = s.phi(x);
        const double slope = s.grad(x).norm();
        if (std::abs(value) > 0.9 * cell * std::max(slope, 1e-8)) continue;
        if (auto c = project_to_surface(s, x)) {
          if ((c->point.array() >= s.box_lo.array()).all() &&
              (c->point.array() <= s.box_hi.array()).all()) {
            candidates.push_back(*c);
          }
        }
      }
    }
  }
  return candidates;
}

// Farthest-point thinning under an arbitrary metric; deterministic ties.
template <typename Dist>
std::vector<int> farthest_point_sample(int count, int available, const Dist& dist) {
  std::vector<int> selected;
  selected.reserve(count);
  std::vector<double> min_dist(available, std::numeric_limits<double>::max());
  int pick = 0;
  for (int s = 0; s < count; ++s) {
    selected.push_back(pick);
    for (int j = 0; j < available; ++j) {
      min_dist[j] = std::min(min_dist[j], dist(pick, j));
    }
    pick = 0;
    double best = -1.0;
    for (int j = 0; j < available; ++j) {
      if (min_dist[j] > best) {
        best = min_dist[j];
        pick = j;
      }
    }
  }
  return selected;
}

PointCloud finalize_cloud(const LevelSetSurface& s, std::vector<Candidate> nodes,
                          std::optional<double> total_area) {
  PointCloud cloud;
  cloud.label = s.name;
  cloud.points.reserve(nodes.size());
  cloud.normals.reserve(nodes.size());
  for (auto& c : nodes) {
    cloud.points.push_back(c.point);
    cloud.normals.push_back(c.normal);
  }
  const double area = total_area.value_or(s.analytic_area.value_or(1.0));
  cloud.weights = quadrature_weights(cloud, area);
  return cloud;
}

} // namespace

PointCloud sample_surface(const LevelSetSurface& surface, int target_count,
                          std::uint64_t seed, std::optional<double> total_area) {
  if (target_count < 50) {
    throw make_error("surface sampling needs target_count >= 50, got ", target_count);
  }
  auto candidates = surface_candidates(surface, target_count, seed);
  if (static_cast<int>(candidates.size()) < target_count) {
    throw make_error("surface sampling produced only ", candidates.size(),
                     " candidates for target ", target_count, " on '", surface.name, "'");
  }
  const auto dist = [&](int a, int b) {
    return (candidates[a].point - candidates[b].point).norm();
  };
  const auto chosen =
      farthest_point_sample(target_count, static_cast<int>(candidates.size()), dist);
  std::vector<Candidate> nodes;
  nodes.reserve(chosen.size());
  for (int idx : chosen) nodes.push_back(candidates[idx]);
  return finalize_cloud(surface, std::move(nodes), total_area);
}

Eigen::Vector3d rotate_quarter(const Eigen::Vector3d& x, int times) {
  Eigen::Vector3d c = centered(x);
  for (int k = 0; k < ((times % 4) + 4) % 4; ++k) {
    c = Eigen::Vector3d(-c[1], c[0], c[2]);
  }
  return c + Eigen::Vector3d(0.5, 0.5, 0.5);
}

PointCloud sample_surface_symmetric(const LevelSetSurface& surface, int target_count,
                                    std::uint64_t seed, std::optional<double> total_area) {
  if (target_count < 50) {
    throw make_error("surface sampling needs target_count >= 50, got ", target_count);
  }
  const int quarter = std::max(target_count / 4, 13);
  auto all = surface_candidates(surface, target_count, seed);

  const double area = total_area.value_or(surface.analytic_area.value_or(1.0));
  const double spacing = std::sqrt(area / target_count);

  // Keep one fundamental domain, away from the rotation axis so replicated
  // orbits cannot collide.
  std::vector<Candidate> candidates;
  for (const auto& c : all) {
    const Eigen::Vector3d d = centered(c.point);
    const double axis_dist = std::hypot(d[0], d[1]);
    const double angle = std::atan2(d[1], d[0]);
    if (axis_dist >= 0.5 * spacing && angle >= 0.0 && angle < 0.5 * kPi) {
      candidates.push_back(c);
    }
  }
  if (static_cast<int>(candidates.size()) < quarter) {
    throw make_error("symmetric sampler: only ", candidates.size(),
                     " quarter-domain candidates for target ", target_count);
  }

  const auto quotient_dist = [&](int a, int b) {
    double best = std::numeric_limits<double>::max();
    for (int k = 0; k < 4; ++k) {
      best = std::min(best,
                      (candidates[a].point - rotate_quarter(candidates[b].point, k)).norm());
    }
    return best;
  };
  const auto chosen =
      farthest_point_sample(quarter, static_cast<int>(candidates.size()), quotient_dist);

  std::vector<Candidate> nodes;
  nodes.reserve(4 * chosen.size());
  for (int k = 0; k < 4; ++k) {
    for (int idx : chosen) {
      Candidate c;
      c.point = rotate_quarter(candidates[idx].point, k);
      const Eigen::Vector3d n = candidates[idx].normal;
      Eigen::Vector3d rn(n[0], n[1], n[2]);
      for (int r = 0; r < k; ++r) rn = Eigen::Vector3d(-rn[1], rn[0], rn[2]);
      c.normal = rn;
      nodes.push_back(c);
    }
  }
  return finalize_cloud(surface, std::move(nodes), total_area);
}

Eigen::VectorXd evaluate_density(const DensitySpec& spec, const PointCloud& cloud) {
  const int n = cloud.size();
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    for (const auto& comp : spec.components) {
      const double d2 = (comp.center - cloud.points[j]).squaredNorm();
      raw[j] += comp.coeff * 100.0 * std::exp(-d2 / comp.sigma);
    }
  }
  const double mass = raw.dot(cloud.weights);
  if (!(mass > 0.0)) {
    throw make_error("density evaluates to zero mass on cloud '", cloud.label, "'");
  }
  return raw * (spec.mass_target / mass);
}

namespace {

DensitySpec single_gaussian(const Eigen::Vector3d& center, double sigma, double mass) {
  DensitySpec spec;
  spec.components.push_back({center, sigma, 1.0});
  spec.mass_target = mass;
  return spec;
}

} // namespace

DensitySpec rho_mg1_spec() {
  DensitySpec spec;
  const double s = 0.025;
  spec.components = {{{0.5, 0.0, 0.5}, s, 3.0 / 8.0},
                     {{0.5, 1.0, 0.5}, s, 3.0 / 8.0},
                     {{0.0, 0.5, 0.5}, s, 3.0 / 8.0},
                     {{1.0, 0.5, 0.5}, s, 3.0 / 8.0}};
  return spec;
}

DensitySpec rho_mg2_spec() {
  DensitySpec spec;
  const double s = 0.025;
  const double hi = (2.0 + std::sqrt(2.0)) / 4.0;
  const double lo = (2.0 - std::sqrt(2.0)) / 4.0;
  spec.components = {{{0.5, 0.0, 0.5}, s, 3.0 / 16.0}, {{0.5, 1.0, 0.5}, s, 3.0 / 16.0},
                     {{0.0, 0.5, 0.5}, s, 3.0 / 16.0}, {{1.0, 0.5, 0.5}, s, 3.0 / 16.0},
                     {{hi, hi, 0.5}, s, 3.0 / 16.0},   {{hi, lo, 0.5}, s, 3.0 / 16.0},
                     {{lo, hi, 0.5}, s, 3.0 / 16.0},   {{lo, lo, 0.5}, s, 3.0 / 16.0}};
  return spec;
}

std::pair<DensitySpec, DensitySpec> scenario_densities(const std::string& name,
                                                       double beta) {
  DensitySpec rho0, rho1;
  if (name == "sphere") {
    rho0 = single_gaussian({0.5, 0.5, 0.0}, 0.05, 1.0);
    rho1 = single_gaussian({0.5, 0.5, 1.0}, 0.05, beta);
  } else if (name == "ellipsoid") {
    const double z0 = (6.0 + std::sqrt(6.0)) / 12.0;
    const double z1 = (6.0 - std::sqrt(6.0)) / 12.0;
    rho0 = single_gaussian({0.5, 0.5, z0}, 0.025, 1.0);
    rho1 = single_gaussian({0.5, 0.5, z1}, 0.025, beta);
  } else if (name == "peanut") {
    // The two x-extremes of the peanut, 16 x^2 = 1 + sqrt(6/5) at y = z = 0.
    const double x0 = (2.0 + std::sqrt(1.0 + std::sqrt(1.2))) / 4.0;
    const double x1 = (2.0 - std::sqrt(1.0 + std::sqrt(1.2))) / 4.0;
    rho0 = single_gaussian({x0, 0.5, 0.5}, 0.025, 1.0);
    rho1 = single_gaussian({x1, 0.5, 0.5}, 0.025, beta);
  } else if (name == "torus") {
    const double hi = (5.0 + 4.0 * std::sqrt(0.5)) / 10.0;
    const double lo = (5.0 - 4.0 * std::sqrt(0.5)) / 10.0;
    rho0 = single_gaussian({hi, hi, 0.5}, 0.05, 1.0);
    rho1 = single_gaussian({lo, lo, 0.5}, 0.05, beta);
  } else if (name == "opener") {
    const double t = std::sqrt((1.0 + std::sqrt(1.0 + 2.0 * std::sqrt(1.0 / 15.0))) / 10.0);
    rho0 = single_gaussian({(1.0 + t) / 2.0, 0.5, 0.5}, 0.025, 1.0);
    rho1 = single_gaussian({0.5, (1.0 - t) / 2.0, 0.5}, 0.025, beta);
  } else if (name == "sphere-s1") {
    rho0 = single_gaussian({0.5, 0.5, 1.0}, 0.025, 1.0);
    rho1 = rho_mg2_spec();
    rho1.mass_target = beta;
  } else if (name == "sphere-s2") {
    rho0 = rho_mg2_spec();
    rho0.mass_target = 1.0;
    rho1 = single_gaussian({0.5, 0.5, 1.0}, 0.025, beta);
  } else if (name == "airplane") {
    rho0 = single_gaussian({-0.015821, 0.957996, 0.055}, 0.05, 1.0);
    rho1 = single_gaussian({-0.000874, -0.763727, 0.342374}, 0.05, beta);
  } else if (name == "cow") {
    rho0 = single_gaussian({0.0, 0.547798, 0.228164}, 0.05, 1.0);
    rho1.components = {{{0.291818, 0.788408, -0.690195}, 0.025, 0.25},
                       {{0.368236, 0.0306267, -0.614976}, 0.025, 0.25},
                       {{-0.319732, 0.786428, -0.633454}, 0.025, 0.25},
                       {{-0.368236, 0.0306267, -0.614976}, 0.025, 0.25}};
    rho1.mass_target = beta;
  } else {
    throw make_error("no density table for scenario '", name, "'");
  }
  return {rho0, rho1};
}

PointCloud circle_cloud(int n_nodes) {
  if (n_nodes < 8) throw make_error("circle cloud needs at least 8 nodes, got ", n_nodes);
  const double radius = 1.0 / (2.0 * kPi);
  PointCloud cloud;
  cloud.label = "circle";
  cloud.points.reserve(n_nodes);
  cloud.normals.reserve(n_nodes);
  for (int k = 0; k < n_nodes; ++k) {
    const double theta = 2.0 * kPi * k / n_nodes;
    cloud.points.emplace_back(radius * std::cos(theta), radius * std::sin(theta), 0.0);
    cloud.normals.emplace_back(std::cos(theta), std::sin(theta), 0.0);
  }
  cloud.weights = quadrature_weights(cloud, 1.0);
  return cloud;
}

double gauss_1d(double x, double mu, double sigma) {
  return std::exp(-(x - mu) * (x - mu) / (2.0 * sigma)) / std::sqrt(2.0 * kPi * sigma);
}

double poisson_exact_solution(double t, double s) {
  return std::cos(2.0 * kPi * t) * std::cos(2.0 * kPi * s);
}

Poisson1dCase poisson_1d_case(int n) {
  Poisson1dCase out;
  out.cloud = circle_cloud(n);
  out.grid = TimeGrid::uniform(n);
  out.exact.resize(n + 1, n);
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.exact(i, j) = poisson_exact_solution(out.grid.nodes[i],
                                               static_cast<double>(j) / n);
    }
  }
  // d_tt u + Lap u = -8 pi^2 u, so the artifact operator d_tt + Lap - id
  // needs rhs = -(8 pi^2 + 1) u.
  out.rhs = -(8.0 * kPi * kPi + 1.0) * out.exact;
  out.g0 = Eigen::VectorXd::Zero(n);
  out.gT = Eigen::VectorXd::Zero(n);
  return out;
}

double quantile_coupling_w2sq(const Eigen::VectorXd& positions,
                              const Eigen::VectorXd& mass0,
                              const Eigen::VectorXd& mass1) {
  const int n = static_cast<int>(positions.size());
  int i = 0;
  int j = 0;
  double rem0 = mass0[0];
  double rem1 = mass1[0];
  double total = 0.0;
  while (i < n && j < n) {
    if (rem0 <= 0.0) {
      if (++i >= n) break;
      rem0 = mass0[i];
      continue;
    }
    if (rem1 <= 0.0) {
      if (++j >= n) break;
      rem1 = mass1[j];
      continue;
    }
    const double step = std::min(rem0, rem1);
    const double d = positions[i] - positions[j];
    total += step * d * d;
    rem0 -= step;
    rem1 -= step;
  }
  return total;
}

double ot_1d_oracle_cost(int resolution) {
  Eigen::VectorXd pos(resolution), m0(resolution), m1(resolution);
  for (int k = 0; k < resolution; ++k) {
    const double s = (k + 0.5) / resolution;
    pos[k] = s;
    m0[k] = gauss_1d(s, 0.45, 0.05);
    m1[k] = gauss_1d(s, 0.55, 0.05);
  }
  m0 /= m0.sum();
  m1 /= m1.sum();
  return 0.5 * quantile_coupling_w2sq(pos, m0, m1);
}

Ot1dCase ot_1d_case(int n_nodes) {
  Ot1dCase out;
  out.cloud = circle_cloud(n_nodes);
  out.rho0.resize(n_nodes);
  out.rho1.resize(n_nodes);
  for (int k = 0; k < n_nodes; ++k) {
    const double s = static_cast<double>(k) / n_nodes;
    out.rho0[k] = gauss_1d(s, 0.45, 0.05);
    out.rho1[k] = gauss_1d(s, 0.55, 0.05);
  }
  out.rho0 /= out.rho0.dot(out.cloud.weights);
  out.rho1 /= out.rho1.dot(out.cloud.weights);
  out.oracle_cost = ot_1d_oracle_cost();
  return out;
}

} // namespace uot
