#include "photomesh/evaluation.hpp"

#include "photomesh/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace photomesh {

NearestNeighborGrid::NearestNeighborGrid(const PointSet &points)
    : points_(points) {
  if (points.empty())
    throw Error(ErrorCode::EmptySet, "nearest-neighbor set is empty");
  Vec3 lo = points.front(), hi = points.front();
  for (const Vec3 &p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  origin_ = lo;
  const Vec3 extent = (hi - lo).cwiseMax(1e-9);
  // About two points per cell on a surface-like set.
  const double volume = extent.prod();
  cell_ = std::max(std::cbrt(2.0 * volume / points.size()),
                   extent.maxCoeff() / 256.0);
  for (int k = 0; k < 3; ++k)
    dims_[k] = std::max(1, static_cast<int>(std::floor(extent[k] / cell_)) + 1);

  const size_t cells = static_cast<size_t>(dims_.x()) * dims_.y() * dims_.z();
  starts_.assign(cells + 1, 0);
  std::vector<int> key(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector3i c = cell_of(points[i]);
    key[i] = static_cast<int>(cell_key(c.x(), c.y(), c.z()));
    ++starts_[key[i] + 1];
  }
  for (size_t c = 0; c < cells; ++c)
    starts_[c + 1] += starts_[c];
  order_.resize(points.size());
  std::vector<int> fill(starts_.begin(), starts_.end() - 1);
  for (size_t i = 0; i < points.size(); ++i)
    order_[fill[key[i]]++] = static_cast<int>(i);
}

long long NearestNeighborGrid::cell_key(int x, int y, int z) const {
  return (static_cast<long long>(z) * dims_.y() + y) * dims_.x() + x;
}

Eigen::Vector3i NearestNeighborGrid::cell_of(const Vec3 &p) const {
  Eigen::Vector3i c;
  for (int k = 0; k < 3; ++k)
    c[k] = std::clamp(static_cast<int>(std::floor((p[k] - origin_[k]) / cell_)),
                      0, dims_[k] - 1);
  return c;
}

double NearestNeighborGrid::nearest_distance(const Vec3 &q) const {
  const Eigen::Vector3i c = cell_of(q);
  double best2 = std::numeric_limits<double>::infinity();
  const int max_ring = dims_.maxCoeff();
  for (int ring = 0; ring <= max_ring; ++ring) {
    for (int z = c.z() - ring; z <= c.z() + ring; ++z) {
      if (z < 0 || z >= dims_.z())
        continue;
      for (int y = c.y() - ring; y <= c.y() + ring; ++y) {
        if (y < 0 || y >= dims_.y())
          continue;
        for (int x = c.x() - ring; x <= c.x() + ring; ++x) {
          if (x < 0 || x >= dims_.x())
            continue;
          const int shell = std::max({std::abs(x - c.x()), std::abs(y - c.y()),
                                      std::abs(z - c.z())});
          if (shell != ring)
            continue;
          const long long k = cell_key(x, y, z);
          for (int i = starts_[k]; i < starts_[k + 1]; ++i)
            best2 = std::min(best2, (points_[order_[i]] - q).squaredNorm());
        }
      }
    }
    // Unvisited cells are at least `ring` cells from c along some axis. When
    // q lies outside the grid, c is its clamped cell and the bound still holds.
    if (best2 <= (ring * cell_) * (ring * cell_))
      break;
  }
  return std::sqrt(best2);
}

double point_set_error(const PointSet &s1, const PointSet &s2) {
  if (s1.empty() || s2.empty())
    throw Error(ErrorCode::EmptySet, "point_set_error needs non-empty sets");
  const NearestNeighborGrid grid(s2);
  double sum = 0.0;
  for (const Vec3 &p : s1)
    sum += grid.nearest_distance(p);
  return sum / static_cast<double>(s1.size());
}

PointSet sample_mesh_surface(const TriangleMesh &mesh, int n, std::uint64_t seed) {
  if (mesh.empty() || n < 1)
    throw Error(ErrorCode::EmptySet, "sampling needs faces and n >= 1");
  std::vector<double> cumulative(mesh.num_faces());
  double total = 0.0;
  for (int j = 0; j < mesh.num_faces(); ++j) {
    const Mat3 v = mesh.triangle(j);
    total += 0.5 * (v.col(1) - v.col(0)).cross(v.col(2) - v.col(0)).norm();
    cumulative[j] = total;
  }
  if (!(total > kAreaEps))
    throw Error(ErrorCode::DegenerateMesh, "total surface area ~ 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointSet out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double pick = unit(rng) * total;
    const int face = static_cast<int>(
        std::min<std::ptrdiff_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
                                     cumulative.begin(),
                                 mesh.num_faces() - 1));
    const double r1 = std::sqrt(unit(rng)), r2 = unit(rng);
    const Vec3 alpha(1.0 - r1, r1 * (1.0 - r2), r1 * r2);
    out.push_back(mesh.triangle(face) * alpha);
  }
  return out;
}

ReprojectionError reprojection_error(const TriangleMesh &mesh,
                                     const TriangleMesh &reference,
                                     const std::vector<Camera> &cameras,
                                     int frame_distance, int stride) {
  const int f_count = static_cast<int>(cameras.size());
  if (frame_distance < 1 || f_count < frame_distance + 1)
    throw Error(ErrorCode::InvalidConfig, "need at least d+1 cameras");
  stride = std::max(stride, 1);

  std::vector<RasterMaps> ref_maps, est_maps;
  for (const Camera &c : cameras) {
    ref_maps.push_back(rasterize(reference, c));
    est_maps.push_back(rasterize(mesh, c));
  }

  ReprojectionError out;
  double sum = 0.0;
  for (int f = 0; f + frame_distance < f_count; ++f) {
    const int g = f + frame_distance;
    const Camera &src = cameras[f], &dst = cameras[g];
    const RasterMaps &ref = ref_maps[f], &est = est_maps[f];
    for (int y = 0; y < src.height; y += stride)
      for (int x = 0; x < src.width; x += stride) {
        const size_t i = ref.index(x, y);
        if (ref.face[i] < 0 || est.face[i] < 0)
          continue;
        SurfaceSample truth;
        truth.sample = {ref.face[i], ref.bary[i]};
        truth.point = reference.triangle(ref.face[i]) * ref.bary[i];
        if (!visible_in_view(truth, dst, ref_maps[g]))
          continue;
        const Vec3 lifted = mesh.triangle(est.face[i]) * est.bary[i];
        if (!(dst.to_camera(lifted).z() > kDepthEps))
          continue;
        sum += (project(lifted, dst).pixel - project(truth.point, dst).pixel).norm();
        ++out.correspondences;
      }
  }
  if (out.correspondences == 0)
    throw Error(ErrorCode::NoVisibleSamples, "no transferable pixel at distance " +
                                                 std::to_string(frame_distance));
  out.mean_pixels = sum / static_cast<double>(out.correspondences);
  return out;
}

DepthError depth_error(const TriangleMesh &mesh, const TriangleMesh &reference,
                       const std::vector<Camera> &cameras) {
  DepthError out;
  double sum = 0.0;
  long long count = 0;
  for (const Camera &c : cameras) {
    const RasterMaps a = rasterize(mesh, c), b = rasterize(reference, c);
    double cam_sum = 0.0;
    long long cam_count = 0;
    for (size_t i = 0; i < a.face.size(); ++i) {
      if (a.face[i] < 0 || b.face[i] < 0)
        continue;
      cam_sum += std::abs(a.depth[i] - b.depth[i]);
      ++cam_count;
    }
    out.per_camera.push_back(cam_count ? cam_sum / cam_count
                                       : std::numeric_limits<double>::quiet_NaN());
    sum += cam_sum;
    count += cam_count;
  }
  if (count == 0)
    throw Error(ErrorCode::NoOverlap, "no pixel covered by both meshes");
  out.mean = sum / static_cast<double>(count);
  return out;
}

} // namespace photomesh
