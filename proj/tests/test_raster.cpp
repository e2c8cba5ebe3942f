#include "oracles.hpp"
#include "test_util.hpp"

#include "photomesh/image.hpp"
#include "photomesh/raster.hpp"
#include "photomesh/synthetic.hpp"

#include <algorithm>
#include <numbers>
#include <random>

using namespace photomesh;

namespace {

TriangleMesh quad(const Vec3 &center, double hx, double hy, int first_index = 0) {
  TriangleMesh m;
  m.vertices.resize(4, 3);
  m.vertices << center.x() - hx, center.y() - hy, center.z(), center.x() + hx,
      center.y() - hy, center.z(), center.x() + hx, center.y() + hy, center.z(),
      center.x() - hx, center.y() + hy, center.z();
  m.faces.resize(2, 3);
  m.faces << 0, 1, 2, 0, 2, 3;
  m.faces.array() += first_index;
  return m;
}

TriangleMesh concat(const TriangleMesh &a, const TriangleMesh &b) {
  TriangleMesh m;
  m.vertices.resize(a.num_vertices() + b.num_vertices(), 3);
  m.vertices << a.vertices, b.vertices;
  m.faces.resize(a.num_faces() + b.num_faces(), 3);
  Faces shifted = b.faces;
  shifted.array() += a.num_vertices();
  m.faces << a.faces, shifted;
  return m;
}

TriangleMesh cube() {
  TriangleMesh m;
  m.vertices.resize(8, 3);
  for (int i = 0; i < 8; ++i)
    m.vertices.row(i) << (i & 1 ? 0.5 : -0.5), (i & 2 ? 0.5 : -0.5), (i & 4 ? 0.5 : -0.5);
  m.faces.resize(12, 3);
  m.faces << 0, 1, 3, 0, 3, 2, 4, 6, 7, 4, 7, 5, 0, 4, 5, 0, 5, 1, 2, 3, 7, 2, 7, 6, 0, 2, 6,
      0, 6, 4, 1, 5, 7, 1, 7, 3;
  return m;
}

// Segment p -> c blocked by a face of `occluder`.
bool shadowed(const Vec3 &p, const Vec3 &c, const TriangleMesh &occluder) {
  const Ray ray{p, (c - p).normalized()};
  for (int f = 0; f < occluder.num_faces(); ++f) {
    const auto hit = ray_triangle_intersect(ray, occluder.triangle(f));
    if (hit && hit->distance > 1e-6 && hit->distance < (c - p).norm())
      return true;
  }
  return false;
}

} // namespace

TEST_SUITE("rasterizer") {

TEST_CASE("single triangle: face, barycentrics, plane depth") {
  const Camera cam = oracle::forward_camera(64, 64, 50);
  TriangleMesh m;
  m.vertices.resize(3, 3);
  m.vertices << -2, -2, 2, 2, -2, 2, 0, 2, 2;
  m.faces.resize(1, 3);
  m.faces << 0, 1, 2;
  const RasterMaps r = rasterize(m, cam);
  const size_t c = r.index(32, 32);
  CHECK(r.face[c] == 0);
  CHECK(r.bary[c].sum() == doctest::Approx(1.0));
  CHECK(r.bary[c].minCoeff() >= 0.0);
  CHECK(r.depth[c] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.skipped_faces == 0);
}

TEST_CASE("empty mesh leaves every pixel empty") {
  const Camera cam = oracle::forward_camera(16, 12, 10);
  const RasterMaps r = rasterize(TriangleMesh{}, cam);
  for (size_t i = 0; i < r.face.size(); ++i) {
    CHECK(r.face[i] == -1);
    CHECK(std::isinf(r.depth[i]));
  }
  CHECK_FALSE(sample_depth(r, Vec2(8, 6)).has_value());
}

TEST_CASE("stacked planes: near small face over far large face, oracle agreement") {
  const Camera cam = oracle::forward_camera(64, 64, 40);
  const TriangleMesh m = concat(quad(Vec3(0, 0, 4), 2, 2), quad(Vec3(0.1, 0, 2), 0.4, 0.3));
  const RasterMaps r = rasterize(m, cam);
  CHECK(r.face[r.index(33, 32)] >= 2);                            // under the near quad
  CHECK(r.face[r.index(14, 32)] >= 0);                             // far quad only
  CHECK(r.face[r.index(14, 32)] <= 1);
  CHECK(r.depth[r.index(33, 32)] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.depth[r.index(14, 32)] == doctest::Approx(4.0).epsilon(1e-12));

  const oracle::CastMaps o = oracle::ray_cast(m, cam);
  const std::vector<bool> edges = oracle::edge_zone(m, cam);
  for (size_t i = 0; i < r.face.size(); ++i) {
    if (edges[i])
      continue;
    CHECK(r.face[i] == o.face[i]);
    if (o.face[i] >= 0)
      CHECK(std::abs(r.depth[i] - o.depth[i]) < 1e-9);
  }
}

TEST_CASE("raster invariants on random soups") {
  std::mt19937_64 rng(17);
  const Camera cam = oracle::forward_camera(48, 40, 30);
  for (int trial = 0; trial < 10; ++trial) {
    const TriangleMesh m = oracle::random_soup(rng, 40);
    const RasterMaps r = rasterize(m, cam);
    for (int y = 0; y < cam.height; ++y)
      for (int x = 0; x < cam.width; ++x) {
        const size_t i = r.index(x, y);
        if (r.face[i] < 0)
          continue;
        CHECK(r.depth[i] > 0);
        CHECK(BarycentricSample{r.face[i], r.bary[i]}.valid(1e-9));
        const Vec3 p = m.triangle(r.face[i]) * r.bary[i];
        CHECK((project(p, cam).pixel - Vec2(x + 0.5, y + 0.5)).norm() < 0.5);
        CHECK(std::abs(cam.to_camera(p).z() - r.depth[i]) < 1e-9);
        // z-buffer: no covering face is nearer.
        const Ray ray = unproject(Vec2(x + 0.5, y + 0.5), cam);
        for (int f = 0; f < m.num_faces(); ++f)
          if (const auto hit = ray_triangle_intersect(ray, m.triangle(f)))
            CHECK(cam.to_camera(ray.at(hit->distance)).z() >= r.depth[i] - 1e-9);
      }
  }
}

TEST_CASE("top-left rule: shared edges through pixel centers are filled once") {
  // f = 8 and c = 0 keep every projected coordinate exact in binary.
  Camera cam = oracle::forward_camera(16, 16, 8);
  cam.cx = cam.cy = 0;
  // Quad corners at pixel coordinates (2.5, 2.5) .. (10.5, 10.5) on z = 1.
  const TriangleMesh m = quad(Vec3(6.5 / 8, 6.5 / 8, 1), 4.0 / 8, 4.0 / 8);
  TriangleMesh t0 = m, t1 = m;
  t0.faces = m.faces.topRows(1);
  t1.faces = m.faces.bottomRows(1);
  const RasterMaps a = rasterize(t0, cam), b = rasterize(t1, cam), both = rasterize(m, cam);
  int overlap = 0, covered = 0;
  for (size_t i = 0; i < a.face.size(); ++i) {
    overlap += a.face[i] >= 0 && b.face[i] >= 0;
    covered += both.face[i] >= 0;
    CHECK((both.face[i] >= 0) == (a.face[i] >= 0 || b.face[i] >= 0));
  }
  CHECK(overlap == 0);
  CHECK(covered == 64); // centers 2.5 .. 9.5 on both axes: top/left edges owned
  CHECK(both.covered(2, 2));
  CHECK_FALSE(both.covered(10, 5));
  CHECK_FALSE(both.covered(5, 10));

  // A fan of 8 triangles around a pixel center covers each pixel once.
  TriangleMesh fan;
  fan.vertices.resize(9, 3);
  fan.vertices.row(0) << 8.5 / 8, 8.5 / 8, 1;
  for (int k = 0; k < 8; ++k) {
    const double ang = k * std::numbers::pi / 4;
    fan.vertices.row(k + 1) << (8.5 + 6 * std::round(std::cos(ang) * 2) / 2) / 8,
        (8.5 + 6 * std::round(std::sin(ang) * 2) / 2) / 8, 1;
  }
  fan.faces.resize(8, 3);
  for (int k = 0; k < 8; ++k)
    fan.faces.row(k) << 0, k + 1, (k + 1) % 8 + 1;
  std::vector<int> count(16 * 16, 0);
  for (int k = 0; k < 8; ++k) {
    TriangleMesh one = fan;
    one.faces = fan.faces.row(k);
    const RasterMaps r = rasterize(one, cam);
    for (size_t i = 0; i < count.size(); ++i)
      count[i] += r.face[i] >= 0;
  }
  CHECK(*std::max_element(count.begin(), count.end()) == 1);
  CHECK(count[8 * 16 + 8] == 1); // the shared center vertex pixel
}

TEST_CASE("equal depths keep the lower face index") {
  const Camera cam = oracle::forward_camera(32, 32, 20);
  const TriangleMesh a = quad(Vec3(0, 0, 3), 1, 1);
  const TriangleMesh m = concat(a, a); // faces 2,3 duplicate 0,1
  const RasterMaps r = rasterize(m, cam);
  for (int f : r.face)
    CHECK(f <= 1);
}

TEST_CASE("faces behind the near plane are skipped and counted") {
  const Camera cam = oracle::forward_camera(32, 32, 20);
  TriangleMesh m;
  m.vertices.resize(3, 3);
  m.vertices << -1, -1, 2, 1, -1, 2, 0, 1, -1;
  m.faces.resize(1, 3);
  m.faces << 0, 1, 2;
  const RasterMaps r = rasterize(m, cam);
  CHECK(r.skipped_faces == 1);
  for (int f : r.face)
    CHECK(f == -1);
}

TEST_CASE("visible_samples: icosphere front hemisphere seen from two nearby views") {
  const TriangleMesh sphere = icosphere(3);
  OrbitRig rig;
  rig.azimuths = 24;
  rig.elevations_deg = {0.0};
  rig.width = rig.height = 64;
  const auto cams = make_orbit_cameras(rig);
  const Camera &a = cams[0], &b = cams[1];
  const Camera v = virtual_camera(a, b);
  SampleStats stats;
  const auto all = visible_samples(sphere, v, {a, b}, false, &stats);
  REQUIRE(!all.empty());
  CHECK(stats.candidates == static_cast<int>(all.size()));
  int checked = 0;
  for (const SurfaceSample &s : all) {
    CHECK((project(s.point, v).pixel - s.source_pixel).norm() < 0.5);
    // Clearly front-facing for both views (away from the silhouette).
    const Vec3 n = s.point.normalized();
    if (n.dot((a.center() - s.point).normalized()) > 0.3 &&
        n.dot((b.center() - s.point).normalized()) > 0.3) {
      CHECK(s.visible[0]);
      CHECK(s.visible[1]);
      ++checked;
    }
  }
  CHECK(checked > 500);
  const auto kept = visible_samples(sphere, v, {a, b}, true);
  for (const SurfaceSample &s : kept)
    CHECK((s.visible[0] && s.visible[1]));
}

TEST_CASE("visible_samples: a cube from opposite sides shares nothing") {
  const Camera a = look_at(Vec3(0, 0, 4), Vec3::Zero(), Vec3(0, 1, 0), 60, 60, 32, 32, 64, 64);
  const Camera b = look_at(Vec3(0, 0, -4), Vec3::Zero(), Vec3(0, 1, 0), 60, 60, 32, 32, 64, 64);
  CHECK(visible_samples(cube(), a, {a, b}, true).empty());
  CHECK(visible_samples(cube(), b, {a, b}, true).empty());
  // The sampling view itself sees every one of its samples.
  for (const auto &s : visible_samples(cube(), a, {a}, false))
    CHECK(s.visible[0]);
}

TEST_CASE("visible_samples: occluder hides the far plane from one view only") {
  const TriangleMesh far = quad(Vec3(0, 0, 0), 1, 1);
  const TriangleMesh occ = quad(Vec3(-1, 0, 2.5), 0.3, 0.3);
  const TriangleMesh m = concat(far, occ);
  const Camera a = look_at(Vec3(-2, 0, 5), Vec3::Zero(), Vec3(0, 1, 0), 160, 160, 64, 64, 128, 128);
  const Camera b = look_at(Vec3(2, 0, 5), Vec3::Zero(), Vec3(0, 1, 0), 160, 160, 64, 64, 128, 128);
  const std::vector<bool> occ_edges = oracle::edge_zone(m, a, 2.0);
  int hidden = 0, open = 0;
  for (const SurfaceSample &s : visible_samples(m, b, {a, b}, false)) {
    if (s.sample.face >= 2)
      continue; // occluder samples
    CHECK(s.visible[1]);
    const Vec2 xa = project(s.point, a).pixel;
    if (!a.in_bounds(xa))
      continue;
    const size_t i = static_cast<size_t>(std::floor(xa.y())) * 128 + static_cast<size_t>(std::floor(xa.x()));
    if (occ_edges[i])
      continue;
    const bool blocked = shadowed(s.point, a.center(), occ);
    CHECK(s.visible[0] == !blocked);
    hidden += blocked;
    open += !blocked;
  }
  CHECK(hidden > 10);
  CHECK(open > 100);
}

TEST_CASE("sample_depth interpolates covered taps") {
  const Camera cam = oracle::forward_camera(16, 16, 10);
  const RasterMaps r = rasterize(quad(Vec3(0, 0, 2), 3, 3), cam);
  const auto d = sample_depth(r, Vec2(8.2, 7.9));
  REQUIRE(d);
  CHECK(*d == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(sample_depth(r, Vec2(-3, 4)).has_value());
}

TEST_CASE("debug dump writes two pngs") {
  const auto dir = scratch_dir("raster");
  const Camera cam = oracle::forward_camera(16, 16, 10);
  const RasterMaps r = rasterize(quad(Vec3(0, 0, 2), 1, 1), cam);
  write_raster_debug(r, dir / "face.png", dir / "depth.png");
  CHECK(read_png(dir / "face.png").width() == 16);
  CHECK(read_png(dir / "depth.png").height() == 16);
}

} // TEST_SUITE
