#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "uot/error.hpp"
#include "uot/geometry.hpp"

using namespace uot;

namespace {

PointCloud random_sphere_cloud(int n, unsigned seed, double radius = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  PointCloud cloud;
  cloud.label = "random-sphere";
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d v(gauss(rng), gauss(rng), gauss(rng));
    v.normalize();
    cloud.points.push_back(radius * v);
    cloud.normals.push_back(v);
  }
  cloud.weights = quadrature_weights(cloud, 4.0 * M_PI * radius * radius);
  return cloud;
}

// Exhaustive oracle: sort all nodes by (squared distance, index), center first.
std::vector<int> brute_force_knn(const PointCloud& cloud, int center, int n) {
  struct Key {
    double d2;
    int idx;
  };
  std::vector<Key> keys;
  for (int j = 0; j < cloud.size(); ++j) {
    if (j == center) continue;
    keys.push_back({(cloud.points[j] - cloud.points[center]).squaredNorm(), j});
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    return a.idx < b.idx;
  });
  std::vector<int> out = {center};
  for (int k = 0; k + 1 < n; ++k) out.push_back(keys[k].idx);
  return out;
}

} // namespace

TEST_CASE("frames: axis-aligned normals") {
  const auto f = frame_from_normal({0.0, 0.0, 1.0}, 0);
  CHECK(f.s1.isApprox(Eigen::Vector3d(1, 0, 0), 1e-15));
  CHECK(f.s2.isApprox(Eigen::Vector3d(0, 1, 0), 1e-15));

  const auto g = frame_from_normal({1.0, 0.0, 0.0}, 0);
  CHECK(g.s1.isApprox(Eigen::Vector3d(0, 1, 0), 1e-15));
  CHECK(g.s2.isApprox(Eigen::Vector3d(0, 0, 1), 1e-15));
}

TEST_CASE("frames: oblique normal orthogonality") {
  const Eigen::Vector3d n = Eigen::Vector3d(1, 1, 1).normalized();
  const auto f = frame_from_normal(n, 0);
  CHECK((f.rotation * f.rotation.transpose() - Eigen::Matrix3d::Identity()).norm() <=
        1e-14);
  CHECK((f.projector * n).norm() <= 1e-14);
}

TEST_CASE("frames: invariants on random normals") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::Vector3d n(gauss(rng), gauss(rng), gauss(rng));
    n.normalize();
    const auto f = frame_from_normal(n, trial);
    CHECK((f.rotation * f.rotation.transpose() - Eigen::Matrix3d::Identity()).norm() <=
          1e-12);
    CHECK((f.rotation.transpose() * f.rotation - Eigen::Matrix3d::Identity()).norm() <=
          1e-12);
    CHECK((f.projector * n).norm() <= 1e-12);
    CHECK((f.projector - f.projector.transpose()).norm() <= 1e-12);
    CHECK((f.projector * f.projector - f.projector).norm() <= 1e-12);
    // P = R^T diag(1,1,0) R
    Eigen::Matrix3d d = Eigen::Matrix3d::Zero();
    d(0, 0) = d(1, 1) = 1.0;
    CHECK((f.projector - f.rotation.transpose() * d * f.rotation).norm() <= 1e-12);
  }
}

TEST_CASE("frames: degenerate normal is rejected") {
  PointCloud cloud;
  cloud.points = {{0, 0, 0}};
  cloud.normals = {{0, 0, 1e-9}};
  cloud.weights = Eigen::VectorXd::Ones(1);
  CHECK_THROWS_WITH_AS(build_frames(cloud), doctest::Contains("node 0"), Error);
}

TEST_CASE("knn: plane grid axis neighbors") {
  PointCloud cloud;
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) {
      cloud.points.emplace_back(x, y, 0.0);
      cloud.normals.emplace_back(0.0, 0.0, 1.0);
    }
  }
  cloud.weights = quadrature_weights(cloud, 25.0);
  const int center = 2 * 5 + 2;
  const auto set = knn_neighbors(cloud, center, 5);
  CHECK(set.neighbors[0] == center);
  std::vector<int> rest(set.neighbors.begin() + 1, set.neighbors.end());
  std::sort(rest.begin(), rest.end());
  CHECK(rest == std::vector<int>{7, 11, 13, 17});
}

TEST_CASE("knn: n = 1 returns the center alone") {
  const auto cloud = random_sphere_cloud(30, 3);
  const auto set = knn_neighbors(cloud, 11, 1);
  CHECK(set.neighbors == std::vector<int>{11});
}

TEST_CASE("knn: matches the exhaustive sort oracle") {
  const auto cloud = random_sphere_cloud(100, 5);
  const KnnIndex index(cloud);
  for (int center = 0; center < cloud.size(); ++center) {
    CHECK(index.query(center, 7).neighbors == brute_force_knn(cloud, center, 7));
  }
}

TEST_CASE("knn: bit-identical to brute force on large clouds") {
  for (int size : {557, 2000}) {
    const auto cloud = random_sphere_cloud(size, 11 + size);
    const KnnIndex index(cloud);
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> pick(0, size - 1);
    for (int trial = 0; trial < 150; ++trial) {
      const int center = pick(rng);
      CHECK(index.query(center, 12).neighbors == brute_force_knn(cloud, center, 12));
    }
  }
}

TEST_CASE("knn: ties break by node index") {
  PointCloud cloud;
  // Four points at identical distance from the center plus a duplicate pair.
  cloud.points = {{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {1, 0, 0}};
  for (size_t i = 0; i < cloud.points.size(); ++i) cloud.normals.emplace_back(0, 0, 1);
  cloud.weights = quadrature_weights(cloud, 1.0);
  const auto set = knn_neighbors(cloud, 0, 4);
  CHECK(set.neighbors == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("projection: points on the tangent plane are fixed") {
  const auto f = frame_from_normal({0.0, 0.0, 1.0}, 0);
  const Eigen::Vector3d center(0.2, -0.3, 0.5);
  const Eigen::Vector3d neighbor = center + 0.4 * f.s1 - 0.7 * f.s2;
  const auto uv = project_to_tangent(f, neighbor, {0.0, 0.0, 1.0}, center);
  CHECK(uv[0] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(uv[1] == doctest::Approx(-0.7).epsilon(1e-14));
}

TEST_CASE("projection: unit-sphere neighbor lands at tan(theta)") {
  // Center at the north pole of the unit sphere; neighbor at colatitude theta
  // with radial normal projects to radius tan(theta).
  const auto f = frame_from_normal({0.0, 0.0, 1.0}, 0);
  const Eigen::Vector3d center(0.0, 0.0, 1.0);
  for (double theta : {0.1, 0.4, 0.9}) {
    const Eigen::Vector3d neighbor(std::sin(theta), 0.0, std::cos(theta));
    const auto uv = project_to_tangent(f, neighbor, neighbor.normalized(), center);
    CHECK(uv.norm() == doctest::Approx(std::tan(theta)).epsilon(1e-12));
  }
}

TEST_CASE("projection: neighbor at the center maps to the origin") {
  const auto f = frame_from_normal(Eigen::Vector3d(1, 2, 2).normalized(), 0);
  const Eigen::Vector3d center(0.5, 0.5, 0.5);
  const auto uv = project_to_tangent(f, center, f.normal, center);
  CHECK(uv.norm() <= 1e-15);
}

TEST_CASE("projection: near-parallel normal is an error") {
  const auto f = frame_from_normal({0.0, 0.0, 1.0}, 0);
  CHECK_THROWS_AS(project_to_tangent(f, {1.0, 0.0, 0.5}, {1.0, 0.0, 0.0}, {0, 0, 0}),
                  Error);
}

TEST_CASE("projection: orthogonal fallback ignores the neighbor normal") {
  const auto f = frame_from_normal({0.0, 0.0, 1.0}, 0);
  const auto uv = project_to_tangent(f, {0.3, 0.4, 2.0}, {1.0, 0.0, 0.0}, {0, 0, 0},
                                     ProjectionMode::Orthogonal);
  CHECK(uv[0] == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(uv[1] == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("quadrature: uniform weights") {
  const auto sphere = random_sphere_cloud(100, 23, 0.5);
  const auto w = quadrature_weights(sphere, M_PI);
  CHECK(w.size() == 100);
  CHECK(w.minCoeff() == doctest::Approx(M_PI / 100).epsilon(1e-15));
  CHECK(w.maxCoeff() == doctest::Approx(M_PI / 100).epsilon(1e-15));
  CHECK(w.sum() == doctest::Approx(M_PI).epsilon(1e-14));

  PointCloud circle;
  for (int k = 0; k < 64; ++k) {
    const double th = 2.0 * M_PI * k / 64;
    circle.points.emplace_back(std::cos(th), std::sin(th), 0.0);
    circle.normals.emplace_back(std::cos(th), std::sin(th), 0.0);
  }
  const auto cw = quadrature_weights(circle, 1.0);
  CHECK(cw.minCoeff() == doctest::Approx(1.0 / 64).epsilon(1e-15));
  CHECK(cw.sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("loader: parses, renormalizes and rejects") {
  const std::string path = "test_cloud_tmp.txt";
  {
    std::ofstream out(path);
    out << "# comment line\n";
    out << "0 0 0  0 0 1.05\n";
    out << "1 0 0  0 1 0\n";
    out << "\n";
  }
  const auto cloud = load_cloud(path, 2.0);
  CHECK(cloud.size() == 2);
  CHECK(cloud.normals[0].norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cloud.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));

  {
    std::ofstream out(path);
    out << "0 0 0  0 0 0.5\n";
  }
  CHECK_THROWS_WITH_AS(load_cloud(path), doctest::Contains("normal length"), Error);

  {
    std::ofstream out(path);
    out << "0 0 0  0 0\n";
  }
  CHECK_THROWS_WITH_AS(load_cloud(path), doctest::Contains(":1:"), Error);
  std::remove(path.c_str());
}
