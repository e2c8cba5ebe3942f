#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Deliberately naive.

#include "photomesh/evaluation.hpp"
#include "photomesh/geometry.hpp"
#include "photomesh/raster.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using namespace photomesh;

// Closed-form Rodrigues rotation.
inline Mat3 rodrigues(const Vec3 &w) {
  const double th = w.norm();
  if (th < 1e-300)
    return Mat3::Identity();
  const Mat3 k = hat(Vec3(w / th));
  return Mat3::Identity() + std::sin(th) * k + (1.0 - std::cos(th)) * k * k;
}

// O(n^2) mean nearest-neighbor distance.
inline double eta(const PointSet &a, const PointSet &b) {
  double sum = 0.0;
  for (const Vec3 &p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3 &q : b)
      best = std::min(best, (p - q).squaredNorm());
    sum += std::sqrt(best);
  }
  return sum / static_cast<double>(a.size());
}

struct CastMaps {
  std::vector<int> face;
  std::vector<double> depth;
};

// Per-pixel ray cast through every face; nearest hit wins, lower index on ties.
inline CastMaps ray_cast(const TriangleMesh &mesh, const Camera &cam) {
  CastMaps out;
  out.face.assign(static_cast<size_t>(cam.width) * cam.height, -1);
  out.depth.assign(out.face.size(), std::numeric_limits<double>::infinity());
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) {
      const Ray ray = unproject(Vec2(x + 0.5, y + 0.5), cam);
      const size_t i = static_cast<size_t>(y) * cam.width + x;
      for (int f = 0; f < mesh.num_faces(); ++f) {
        const Mat3 tri = mesh.triangle(f);
        bool in_front = true;
        for (int k = 0; k < 3; ++k)
          in_front = in_front && cam.to_camera(Vec3(tri.col(k))).z() > kDepthEps;
        if (!in_front)
          continue;
        const auto hit = ray_triangle_intersect(ray, tri);
        if (!hit)
          continue;
        const double z = cam.to_camera(ray.at(hit->distance)).z();
        if (z < out.depth[i]) {
          out.depth[i] = z;
          out.face[i] = f;
        }
      }
    }
  return out;
}

inline double segment_distance(const Vec2 &p, const Vec2 &a, const Vec2 &b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  const double u = len2 > 0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + u * d)).norm();
}

// Pixels whose center lies within `radius` px of any projected edge.
inline std::vector<bool> edge_zone(const TriangleMesh &mesh, const Camera &cam,
                                   double radius = 1.0) {
  std::vector<bool> near(static_cast<size_t>(cam.width) * cam.height, false);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Mat3 tri = mesh.triangle(f);
    Vec2 p[3];
    bool ok = true;
    for (int k = 0; k < 3; ++k) {
      if (!(cam.to_camera(Vec3(tri.col(k))).z() > kDepthEps)) {
        ok = false;
        break;
      }
      p[k] = project(Vec3(tri.col(k)), cam).pixel;
    }
    if (!ok)
      continue;
    for (int e = 0; e < 3; ++e) {
      const Vec2 &a = p[e], &b = p[(e + 1) % 3];
      const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - radius - 1)));
      const int x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + radius)));
      const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - radius - 1)));
      const int y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + radius)));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
          if (segment_distance(Vec2(x + 0.5, y + 0.5), a, b) <= radius)
            near[static_cast<size_t>(y) * cam.width + x] = true;
    }
  }
  return near;
}

// Triangle soup in front of a camera at the origin looking down +z.
inline TriangleMesh random_soup(std::mt19937_64 &rng, int faces) {
  std::uniform_real_distribution<double> xy(-1.2, 1.2), z(2.0, 5.0), off(-0.5, 0.5);
  TriangleMesh m;
  m.vertices.resize(3 * faces, 3);
  m.faces.resize(faces, 3);
  for (int f = 0; f < faces; ++f) {
    const Vec3 c(xy(rng), xy(rng), z(rng));
    for (int k = 0; k < 3; ++k) {
      m.vertices.row(3 * f + k) = (c + Vec3(off(rng), off(rng), off(rng))).transpose();
      m.faces(f, k) = 3 * f + k;
    }
  }
  return m;
}

inline Camera forward_camera(int w, int h, double f) {
  Camera c;
  c.fx = c.fy = f;
  c.cx = w / 2.0;
  c.cy = h / 2.0;
  c.width = w;
  c.height = h;
  return c;
}

} // namespace oracle
