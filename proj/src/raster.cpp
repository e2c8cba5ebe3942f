#include "photomesh/raster.hpp"

#include "photomesh/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace photomesh {

namespace {

double edge(const Vec2 &a, const Vec2 &b, const Vec2 &p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

// Edge a->b of a positively oriented triangle owns its boundary pixels when
// it is a top or left edge in y-down image coordinates.
bool owns_boundary(const Vec2 &a, const Vec2 &b) {
  const Vec2 d = b - a;
  return d.y() < 0.0 || (d.y() == 0.0 && d.x() > 0.0);
}

bool inside(double w, bool owns) { return w > 0.0 || (w == 0.0 && owns); }

} // namespace

RasterMaps rasterize(const TriangleMesh &mesh, const Camera &cam) {
  RasterMaps maps(cam.width, cam.height);
  for (int j = 0; j < mesh.num_faces(); ++j) {
    std::array<Vec2, 3> s;
    Vec3 inv_z;
    bool behind = false;
    for (int k = 0; k < 3; ++k) {
      const Vec3 q = cam.to_camera(mesh.vertex(mesh.faces(j, k)));
      if (!(q.z() > kDepthEps)) {
        behind = true;
        break;
      }
      inv_z[k] = 1.0 / q.z();
      s[k] = {cam.fx * q.x() * inv_z[k] + cam.cx,
              cam.fy * q.y() * inv_z[k] + cam.cy};
    }
    if (behind) {
      ++maps.skipped_faces;
      continue;
    }

    double area = edge(s[0], s[1], s[2]);
    if (!(std::abs(area) > 1e-14))
      continue;
    // Orient positively; keep track of which slot maps to which vertex.
    std::array<int, 3> slot{0, 1, 2};
    if (area < 0.0) {
      std::swap(s[1], s[2]);
      std::swap(slot[1], slot[2]);
      std::swap(inv_z[1], inv_z[2]);
      area = -area;
    }
    const bool own0 = owns_boundary(s[1], s[2]);
    const bool own1 = owns_boundary(s[2], s[0]);
    const bool own2 = owns_boundary(s[0], s[1]);

    const double min_x = std::min({s[0].x(), s[1].x(), s[2].x()});
    const double max_x = std::max({s[0].x(), s[1].x(), s[2].x()});
    const double min_y = std::min({s[0].y(), s[1].y(), s[2].y()});
    const double max_y = std::max({s[0].y(), s[1].y(), s[2].y()});
    const int x0 = std::max(0, static_cast<int>(std::ceil(min_x - 0.5)));
    const int x1 = std::min(cam.width - 1, static_cast<int>(std::floor(max_x - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(min_y - 0.5)));
    const int y1 = std::min(cam.height - 1, static_cast<int>(std::floor(max_y - 0.5)));

    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Vec2 p(x + 0.5, y + 0.5);
        const double w0 = edge(s[1], s[2], p);
        const double w1 = edge(s[2], s[0], p);
        const double w2 = edge(s[0], s[1], p);
        if (!inside(w0, own0) || !inside(w1, own1) || !inside(w2, own2))
          continue;
        const Vec3 lambda = Vec3(w0, w1, w2) / area;
        const Vec3 persp = lambda.cwiseProduct(inv_z);
        const double sum = persp.sum();
        const double z = 1.0 / sum;
        const size_t i = maps.index(x, y);
        if (z < maps.depth[i]) {
          maps.depth[i] = z;
          maps.face[i] = j;
          Vec3 alpha;
          for (int k = 0; k < 3; ++k)
            alpha[slot[k]] = persp[k] / sum;
          maps.bary[i] = alpha;
        }
      }
    }
  }
  return maps;
}

std::optional<double> sample_depth(const RasterMaps &maps, const Vec2 &x) {
  if (!(x.x() >= 0.0 && x.y() >= 0.0 && x.x() <= maps.width &&
        x.y() <= maps.height))
    return std::nullopt;
  const double u = x.x() - 0.5, v = x.y() - 0.5;
  const int i0 = static_cast<int>(std::floor(u));
  const int j0 = static_cast<int>(std::floor(v));
  const double fu = u - i0, fv = v - j0;
  double acc = 0.0, wsum = 0.0;
  for (int dj = 0; dj < 2; ++dj) {
    for (int di = 0; di < 2; ++di) {
      const int i = i0 + di, j = j0 + dj;
      if (i < 0 || j < 0 || i >= maps.width || j >= maps.height)
        continue;
      const double d = maps.depth[maps.index(i, j)];
      if (!std::isfinite(d))
        continue;
      const double w = (di ? fu : 1.0 - fu) * (dj ? fv : 1.0 - fv);
      acc += w * d;
      wsum += w;
    }
  }
  if (wsum <= 0.0)
    return std::nullopt;
  return acc / wsum;
}

bool visible_in_view(const SurfaceSample &s, const Camera &view,
                     const RasterMaps &view_maps, double tolerance) {
  const Vec3 q = view.to_camera(s.point);
  if (!(q.z() > kDepthEps))
    return false;
  const Vec2 x(view.fx * q.x() / q.z() + view.cx,
               view.fy * q.y() / q.z() + view.cy);
  if (!view.in_bounds(x))
    return false;
  const int px = std::min(static_cast<int>(x.x()), view_maps.width - 1);
  const int py = std::min(static_cast<int>(x.y()), view_maps.height - 1);
  if (view_maps.face[view_maps.index(px, py)] == s.sample.face)
    return true;
  const auto d = sample_depth(view_maps, x);
  // One-sided: bilinear depth across convex creases sits behind the true
  // surface, and a point in front of the raster cannot be occluded.
  return d && q.z() - *d < tolerance;
}

std::vector<SurfaceSample>
visible_samples(const TriangleMesh &mesh, const RasterMaps &sampler_maps,
                const std::vector<Camera> &views,
                const std::vector<const RasterMaps *> &view_maps,
                bool require_all, SampleStats *stats) {
  SampleStats local;
  std::vector<SurfaceSample> out;
  for (int y = 0; y < sampler_maps.height; ++y) {
    for (int x = 0; x < sampler_maps.width; ++x) {
      const size_t i = sampler_maps.index(x, y);
      const int f = sampler_maps.face[i];
      if (f < 0)
        continue;
      ++local.candidates;
      SurfaceSample s;
      s.sample = {f, sampler_maps.bary[i]};
      s.point = mesh.triangle(f) * s.sample.alpha;
      s.source_pixel = {x + 0.5, y + 0.5};
      s.visible.resize(views.size());
      bool all = true, oob = false;
      for (size_t v = 0; v < views.size(); ++v) {
        const Vec3 q = views[v].to_camera(s.point);
        const bool in_front = q.z() > kDepthEps;
        if (!in_front || !views[v].in_bounds({views[v].fx * q.x() / q.z() + views[v].cx,
                                               views[v].fy * q.y() / q.z() + views[v].cy}))
          oob = true;
        s.visible[v] = visible_in_view(s, views[v], *view_maps[v]);
        all = all && s.visible[v];
      }
      if (!all) {
        if (oob)
          ++local.out_of_bounds;
        else
          ++local.occluded;
        if (require_all)
          continue;
      }
      out.push_back(std::move(s));
    }
  }
  if (stats)
    *stats = local;
  return out;
}

std::vector<SurfaceSample> visible_samples(const TriangleMesh &mesh,
                                           const Camera &sampler,
                                           const std::vector<Camera> &views,
                                           bool require_all,
                                           SampleStats *stats) {
  const RasterMaps sampler_maps = rasterize(mesh, sampler);
  std::vector<RasterMaps> maps;
  maps.reserve(views.size());
  for (const Camera &v : views)
    maps.push_back(rasterize(mesh, v));
  std::vector<const RasterMaps *> ptrs;
  for (const RasterMaps &m : maps)
    ptrs.push_back(&m);
  return visible_samples(mesh, sampler_maps, views, ptrs, require_all, stats);
}

void write_raster_debug(const RasterMaps &maps,
                        const std::filesystem::path &face_png,
                        const std::filesystem::path &depth_png) {
  Image faces(maps.width, maps.height), depth(maps.width, maps.height);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double d : maps.depth)
    if (std::isfinite(d)) {
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  const double range = hi > lo ? hi - lo : 1.0;
  for (int y = 0; y < maps.height; ++y) {
    for (int x = 0; x < maps.width; ++x) {
      const size_t i = maps.index(x, y);
      if (maps.face[i] < 0)
        continue;
      uint32_t h = static_cast<uint32_t>(maps.face[i]) * 2654435761u;
      faces.set_pixel(x, y,
                      Vec3((h >> 24) & 255, (h >> 16) & 255, (h >> 8) & 255) /
                          255.0);
      const double g = 1.0 - 0.8 * (maps.depth[i] - lo) / range;
      depth.set_pixel(x, y, Vec3::Constant(g));
    }
  }
  write_png(faces, face_png);
  write_png(depth, depth_png);
}

} // namespace photomesh
