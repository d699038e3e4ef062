#include "uot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "uot/error.hpp"

namespace uot {

TangentFrame frame_from_normal(const Eigen::Vector3d& normal, int node_index) {
  const double len = normal.norm();
  if (len < 1e-8) {
    throw make_error("degenerate normal (length ", len, ") at node ", node_index);
  }
  const Eigen::Vector3d n = normal / len;

  // Axis with the smallest |n . e_axis|; ties go to the lower axis index.
  int axis = 0;
  double best = std::abs(n[0]);
  for (int a = 1; a < 3; ++a) {
    const double d = std::abs(n[a]);
    if (d < best) {
      best = d;
      axis = a;
    }
  }
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  e[axis] = 1.0;

  TangentFrame frame;
  frame.normal = n;
  frame.s1 = (e - n.dot(e) * n).normalized();
  frame.s2 = n.cross(frame.s1);
  frame.rotation.row(0) = frame.s1;
  frame.rotation.row(1) = frame.s2;
  frame.rotation.row(2) = n;
  frame.projector = Eigen::Matrix3d::Identity() - n * n.transpose();
  return frame;
}

std::vector<TangentFrame> build_frames(const PointCloud& cloud) {
  std::vector<TangentFrame> frames;
  frames.reserve(cloud.points.size());
  for (int j = 0; j < cloud.size(); ++j) {
    frames.push_back(frame_from_normal(cloud.normals[j], j));
  }
  return frames;
}

namespace {

struct NeighborKey {
  double dist2;
  int index;
  bool operator<(const NeighborKey& o) const {
    if (dist2 != o.dist2) return dist2 < o.dist2;
    return index < o.index;
  }
};

} // namespace

KnnIndex::KnnIndex(const PointCloud& cloud) : cloud_(cloud) {
  const int n = cloud.size();
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::max());
  Eigen::Vector3d hi = Eigen::Vector3d::Constant(std::numeric_limits<double>::lowest());
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  origin_ = lo;
  const Eigen::Vector3d extent = hi - lo;
  const double diag = std::max(extent.norm(), 1e-12);
  // Aim at a handful of points per occupied cell.
  cell_ = std::max(diag / std::max(1.0, std::cbrt(static_cast<double>(n))), 1e-12);
  for (int a = 0; a < 3; ++a) {
    dims_[a] = std::max(1, static_cast<int>(std::floor(extent[a] / cell_)) + 1);
  }
  cells_.assign(static_cast<size_t>(dims_[0]) * dims_[1] * dims_[2], {});
  for (int j = 0; j < n; ++j) {
    cells_[cell_index(cloud.points[j])].push_back(j);
  }
}

int KnnIndex::cell_index(const Eigen::Vector3d& p) const {
  int c[3];
  for (int a = 0; a < 3; ++a) {
    int i = static_cast<int>(std::floor((p[a] - origin_[a]) / cell_));
    c[a] = std::clamp(i, 0, dims_[a] - 1);
  }
  return (c[2] * dims_[1] + c[1]) * dims_[0] + c[0];
}

NeighborSet KnnIndex::query(int center, int n) const {
  const int total = cloud_.size();
  if (n < 1 || n > total) {
    throw make_error("knn: requested ", n, " neighbors from a cloud of ", total, " nodes");
  }
  const Eigen::Vector3d& c = cloud_.points[center];
  int cc[3];
  for (int a = 0; a < 3; ++a) {
    cc[a] = std::clamp(static_cast<int>(std::floor((c[a] - origin_[a]) / cell_)), 0,
                       dims_[a] - 1);
  }

  std::vector<NeighborKey> candidates;
  candidates.reserve(static_cast<size_t>(4) * n);
  const int max_ring = std::max({dims_[0], dims_[1], dims_[2]});

  for (int ring = 0; ring <= max_ring; ++ring) {
    // Gather the shell of cells at Chebyshev distance `ring`.
    for (int dz = -ring; dz <= ring; ++dz) {
      const int z = cc[2] + dz;
      if (z < 0 || z >= dims_[2]) continue;
      for (int dy = -ring; dy <= ring; ++dy) {
        const int y = cc[1] + dy;
        if (y < 0 || y >= dims_[1]) continue;
        for (int dx = -ring; dx <= ring; ++dx) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
          const int x = cc[0] + dx;
          if (x < 0 || x >= dims_[0]) continue;
          for (int j : cells_[(static_cast<size_t>(z) * dims_[1] + y) * dims_[0] + x]) {
            candidates.push_back({(cloud_.points[j] - c).squaredNorm(), j});
          }
        }
      }
    }
    if (static_cast<int>(candidates.size()) >= n) {
      std::nth_element(candidates.begin(), candidates.begin() + (n - 1), candidates.end());
      const double kth = candidates[n - 1].dist2;
      // Points outside the searched Chebyshev ball are at least `ring * cell_`
      // away; a strict bound guarantees no missing neighbor or tie.
      const double safe = static_cast<double>(ring) * cell_;
      if (safe * safe > kth || ring == max_ring) break;
    }
  }

  std::sort(candidates.begin(), candidates.end());

  NeighborSet set;
  set.center = center;
  set.neighbors.reserve(n);
  set.neighbors.push_back(center);
  for (const auto& cand : candidates) {
    if (static_cast<int>(set.neighbors.size()) == n) break;
    if (cand.index == center) continue;
    set.neighbors.push_back(cand.index);
  }
  return set;
}

NeighborSet knn_neighbors(const PointCloud& cloud, int center, int n) {
  return KnnIndex(cloud).query(center, n);
}

Eigen::Vector2d project_to_tangent(const TangentFrame& frame,
                                   const Eigen::Vector3d& neighbor_point,
                                   const Eigen::Vector3d& neighbor_normal,
                                   const Eigen::Vector3d& center_point,
                                   ProjectionMode mode) {
  Eigen::Vector3d rel = neighbor_point - center_point;
  if (mode == ProjectionMode::AlongNeighborNormal) {
    const double denom = neighbor_normal.dot(frame.normal);
    if (std::abs(denom) <= 1e-8) {
      throw make_error("tangent projection: neighbor normal nearly parallel to the ",
                       "tangent plane (|dot| = ", std::abs(denom),
                       "); rebuild the stencil with fewer or closer neighbors");
    }
    const double t = -rel.dot(frame.normal) / denom;
    rel += t * neighbor_normal;
  }
  return {frame.s1.dot(rel), frame.s2.dot(rel)};
}

void project_neighbor_set(const PointCloud& cloud, const TangentFrame& frame,
                          NeighborSet& set, ProjectionMode mode) {
  set.projected.clear();
  set.projected.reserve(set.neighbors.size());
  const Eigen::Vector3d& c = cloud.points[set.center];
  for (int k : set.neighbors) {
    if (k == set.center) {
      set.projected.emplace_back(0.0, 0.0);
    } else {
      set.projected.push_back(
          project_to_tangent(frame, cloud.points[k], cloud.normals[k], c, mode));
    }
  }
}

Eigen::VectorXd quadrature_weights(const PointCloud& cloud, double total_area) {
  if (total_area <= 0.0) {
    throw make_error("quadrature weights: total_area must be positive, got ", total_area);
  }
  return Eigen::VectorXd::Constant(cloud.size(), total_area / cloud.size());
}

PointCloud load_cloud(const std::string& path, double total_area) {
  std::ifstream in(path);
  if (!in) {
    throw make_error("cannot open point-cloud file '", path, "'");
  }
  PointCloud cloud;
  cloud.label = path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Eigen::Vector3d p, n;
    if (!(ls >> p[0] >> p[1] >> p[2] >> n[0] >> n[1] >> n[2])) {
      throw make_error(path, ":", lineno, ": expected six decimals `x y z nx ny nz`");
    }
    const double len = n.norm();
    if (len < 0.9 || len > 1.1) {
      throw make_error(path, ":", lineno, ": normal length ", len,
                       " outside [0.9, 1.1]");
    }
    cloud.points.push_back(p);
    cloud.normals.push_back(n / len);
  }
  if (cloud.points.empty()) {
    throw make_error(path, ": no nodes found");
  }
  cloud.weights = quadrature_weights(cloud, total_area);
  return cloud;
}

} // namespace uot
