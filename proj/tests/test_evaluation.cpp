#include "oracles.hpp"
#include "scene_fixture.hpp"
#include "test_util.hpp"

#include "photomesh/evaluation.hpp"

#include <random>

using namespace photomesh;

namespace {

PointSet random_set(std::mt19937_64 &rng, int n, double spread) {
  std::normal_distribution<double> g(0, spread);
  PointSet s(n);
  for (Vec3 &p : s)
    p = Vec3(g(rng), g(rng), g(rng));
  return s;
}

TriangleMesh translated(const TriangleMesh &m, const Vec3 &d) {
  TriangleMesh out = m;
  out.vertices.rowwise() += d.transpose();
  return out;
}

std::vector<Camera> ring(int n, int size) {
  OrbitRig rig;
  rig.azimuths = n;
  rig.elevations_deg = {15.0};
  rig.width = rig.height = size;
  return make_orbit_cameras(rig);
}

} // namespace

TEST_SUITE("evaluation") {

TEST_CASE("point_set_error: examples") {
  const PointSet a{Vec3(0, 0, 0)};
  const PointSet b{Vec3(1, 0, 0), Vec3(0, 2, 0)};
  CHECK(point_set_error(a, b) == 1.0);
  CHECK(point_set_error(b, a) == 1.5); // asymmetric
  CHECK(point_set_error(b, b) == 0.0);
  CHECK_ERROR_CODE(point_set_error({}, b), ErrorCode::EmptySet);
  CHECK_ERROR_CODE(point_set_error(a, {}), ErrorCode::EmptySet);
}

TEST_CASE("point_set_error matches brute force exactly") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> n(1, 100);
  for (int trial = 0; trial < 200; ++trial) {
    const double spread = trial % 3 == 0 ? 1e-3 : (trial % 3 == 1 ? 1.0 : 50.0);
    const PointSet s1 = random_set(rng, n(rng), spread), s2 = random_set(rng, n(rng), spread);
    CHECK(point_set_error(s1, s2) == oracle::eta(s1, s2));
    CHECK(point_set_error(s1, s1) == 0.0);
  }
  // Duplicates and collinear points.
  PointSet line;
  for (int i = 0; i < 50; ++i)
    line.emplace_back(i * 0.1, 0, 0);
  PointSet dup(20, Vec3(2.05, 0, 0));
  CHECK(point_set_error(dup, line) == oracle::eta(dup, line));
}

TEST_CASE("sample_mesh_surface: inside the triangle, seeded") {
  TriangleMesh tri;
  tri.vertices.resize(3, 3);
  tri.vertices << 0, 0, 0, 2, 0, 0, 0, 1, 1;
  tri.faces.resize(1, 3);
  tri.faces << 0, 1, 2;
  const PointSet s = sample_mesh_surface(tri, 2000, 1);
  const Vec3 n = (tri.vertex(1) - tri.vertex(0)).cross(tri.vertex(2) - tri.vertex(0)).normalized();
  for (const Vec3 &p : s) {
    CHECK(std::abs(n.dot(p)) < 1e-12);
    Eigen::Matrix<double, 3, 2> e;
    e << tri.vertex(1) - tri.vertex(0), tri.vertex(2) - tri.vertex(0);
    const Vec2 uv = e.colPivHouseholderQr().solve(p - tri.vertex(0));
    CHECK(uv.minCoeff() >= -1e-12);
    CHECK(uv.sum() <= 1 + 1e-12);
  }
  CHECK(sample_mesh_surface(tri, 50, 7) == sample_mesh_surface(tri, 50, 7));
  CHECK(sample_mesh_surface(tri, 50, 7) != sample_mesh_surface(tri, 50, 8));

  TriangleMesh flat = tri;
  flat.vertices.row(2) << 1, 0, 0;
  CHECK_ERROR_CODE(sample_mesh_surface(flat, 10, 1), ErrorCode::DegenerateMesh);
  CHECK_ERROR_CODE(sample_mesh_surface(TriangleMesh{}, 10, 1), ErrorCode::EmptySet);
}

TEST_CASE("sample_mesh_surface: area proportionality and centroid at 3 sigma") {
  // Two disjoint right triangles with areas 1 and 3 (legs sqrt 2 and sqrt 6).
  TriangleMesh two;
  two.vertices.resize(6, 3);
  const double a = std::sqrt(2.0), b = std::sqrt(6.0);
  two.vertices << 0, 0, 0, a, 0, 0, 0, a, 0, 10, 0, 0, 10 + b, 0, 0, 10, b, 0;
  two.faces.resize(2, 3);
  two.faces << 0, 1, 2, 3, 4, 5;
  const int n = 10000;
  int second = 0;
  for (const Vec3 &p : sample_mesh_surface(two, n, 3))
    second += p.x() >= 5;
  const double sd = std::sqrt(n * 0.75 * 0.25);
  CHECK(std::abs(second - 0.75 * n) < 3 * sd);

  TriangleMesh square;
  square.vertices.resize(4, 3);
  square.vertices << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0;
  square.faces.resize(2, 3);
  square.faces << 0, 1, 2, 0, 2, 3;
  Vec3 mean = Vec3::Zero();
  const PointSet s = sample_mesh_surface(square, n, 4);
  for (const Vec3 &p : s)
    mean += p;
  mean /= n;
  const double se = std::sqrt(1.0 / 12 / n); // uniform on [0,1]
  CHECK(std::abs(mean.x() - 0.5) < 3 * se);
  CHECK(std::abs(mean.y() - 0.5) < 3 * se);
}

TEST_CASE("reprojection_error: zero for identical meshes, grows with offset") {
  const TriangleMesh sphere = icosphere(3);
  const auto cams = ring(12, 64);
  const ReprojectionError same = reprojection_error(sphere, sphere, cams, 1);
  CHECK(same.correspondences > 1000);
  CHECK(same.mean_pixels < 1e-9);

  double prev = 0;
  for (double d : {0.01, 0.03, 0.06, 0.1}) {
    const double e = reprojection_error(translated(sphere, Vec3(d, 0.3 * d, 0)), sphere, cams, 1).mean_pixels;
    CHECK(e > prev);
    prev = e;
  }
  CHECK_ERROR_CODE(reprojection_error(sphere, sphere, std::vector<Camera>(cams.begin(), cams.begin() + 2), 2),
                   ErrorCode::InvalidConfig);
}

TEST_CASE("depth_error: zero, axial offset, no overlap") {
  const TriangleMesh sphere = icosphere(3);
  const auto cams = ring(6, 64);
  CHECK(depth_error(sphere, sphere, cams).mean == 0.0);

  // A fronto-parallel plane pushed along camera 0's optical axis.
  TriangleMesh plane;
  plane.vertices.resize(4, 3);
  plane.vertices << -0.5, -0.5, 0, 0.5, -0.5, 0, 0.5, 0.5, 0, -0.5, 0.5, 0;
  plane.faces.resize(2, 3);
  plane.faces << 0, 1, 2, 0, 2, 3;
  const Camera c = look_at(Vec3(0, 0, 3), Vec3::Zero(), Vec3::UnitY(), 60, 60, 32, 32, 64, 64);
  const Vec3 axis = c.R.row(2).transpose();
  const DepthError e = depth_error(translated(plane, 0.05 * axis), plane, {c});
  CHECK(e.mean == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(e.per_camera[0] == doctest::Approx(0.05).epsilon(1e-9));

  const Camera away = look_at(Vec3(0, 0, 3), Vec3(0, 0, 6), Vec3::UnitY(), 60, 60, 32, 32, 64, 64);
  CHECK_ERROR_CODE(depth_error(plane, plane, {away}), ErrorCode::NoOverlap);
}

TEST_CASE("NearestNeighborGrid answers single queries exactly") {
  std::mt19937_64 rng(5);
  const PointSet pts = random_set(rng, 300, 2.0);
  const NearestNeighborGrid grid(pts);
  for (const Vec3 &q : random_set(rng, 200, 3.0)) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3 &p : pts)
      best = std::min(best, (p - q).squaredNorm());
    CHECK(grid.nearest_distance(q) == std::sqrt(best));
  }
}

} // TEST_SUITE
