#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace uot {

/// Surface sample sites with unit normals and per-node quadrature weights.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> normals;
  Eigen::VectorXd weights;
  std::string label;

  int size() const { return static_cast<int>(points.size()); }
};

/// Local orthonormal frame at a node: rows of `rotation` are (s1, s2, n),
/// `projector` is P = I - n n^T.
struct TangentFrame {
  Eigen::Vector3d s1;
  Eigen::Vector3d s2;
  Eigen::Vector3d normal;
  Eigen::Matrix3d rotation;
  Eigen::Matrix3d projector;
};

/// A node's stencil: center index, neighbor indices (center first) and the
/// neighbors' 2D coordinates in the center's tangent frame.
struct NeighborSet {
  int center = -1;
  std::vector<int> neighbors;
  std::vector<Eigen::Vector2d> projected;
};

enum class ProjectionMode {
  AlongNeighborNormal, // line through the neighbor along its own normal
  Orthogonal           // drop the normal component (noisy-normal fallback)
};

/// One frame per node. s1 is the normalized tangential projection of the
/// Cartesian axis with the smallest |dot| with the normal (ties broken by
/// lower axis index), s2 = n x s1. Throws on a degenerate normal.
std::vector<TangentFrame> build_frames(const PointCloud& cloud);

TangentFrame frame_from_normal(const Eigen::Vector3d& normal, int node_index);

/// Grid-accelerated k-nearest-neighbor search. Results are bit-identical to
/// an exhaustive sort by (squared distance, node index).
class KnnIndex {
public:
  explicit KnnIndex(const PointCloud& cloud);

  /// The n nodes nearest to `center`, center first.
  NeighborSet query(int center, int n) const;

private:
  const PointCloud& cloud_;
  Eigen::Vector3d origin_;
  double cell_ = 1.0;
  int dims_[3] = {1, 1, 1};
  std::vector<std::vector<int>> cells_;

  int cell_index(const Eigen::Vector3d& p) const;
};

/// Convenience wrapper over KnnIndex for one-off queries.
NeighborSet knn_neighbors(const PointCloud& cloud, int center, int n);

/// 2D coordinates, in the frame (s1, s2), of the intersection of the line
/// {neighbor_point + t * neighbor_normal} with the center's tangent plane.
/// Orthogonal mode ignores the neighbor normal. Throws when the neighbor
/// normal is nearly parallel to the tangent plane.
Eigen::Vector2d project_to_tangent(const TangentFrame& frame,
                                   const Eigen::Vector3d& neighbor_point,
                                   const Eigen::Vector3d& neighbor_normal,
                                   const Eigen::Vector3d& center_point,
                                   ProjectionMode mode = ProjectionMode::AlongNeighborNormal);

/// Fills set.projected for every neighbor of set.center.
void project_neighbor_set(const PointCloud& cloud, const TangentFrame& frame,
                          NeighborSet& set, ProjectionMode mode);

/// Uniform weights total_area / N_n.
Eigen::VectorXd quadrature_weights(const PointCloud& cloud, double total_area);

/// Plain-text loader: one node per line, `x y z nx ny nz`, '#' comments.
/// Normals with length in [0.9, 1.1] are renormalized, others rejected.
PointCloud load_cloud(const std::string& path, double total_area = 1.0);

} // namespace uot
