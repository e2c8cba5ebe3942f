#pragma once

#include "photomesh/geometry.hpp"

#include <cstdint>
#include <vector>

namespace photomesh {

using PointSet = std::vector<Vec3>;

/// Exact nearest-neighbor queries over a uniform grid.
class NearestNeighborGrid {
public:
  explicit NearestNeighborGrid(const PointSet &points);

  /// Distance from q to the closest stored point.
  double nearest_distance(const Vec3 &q) const;

private:
  long long cell_key(int x, int y, int z) const;
  Eigen::Vector3i cell_of(const Vec3 &p) const;

  const PointSet &points_;
  Vec3 origin_;
  double cell_ = 1.0;
  Eigen::Vector3i dims_;
  std::vector<int> starts_; // CSR offsets per cell
  std::vector<int> order_;
};

/// Mean over S1 of the distance to the nearest point of S2 (directional).
double point_set_error(const PointSet &s1, const PointSet &s2);

/// Area-weighted face choice, uniform barycentrics via the square-root map.
PointSet sample_mesh_surface(const TriangleMesh &mesh, int n, std::uint64_t seed);

struct ReprojectionError {
  double mean_pixels = 0.0;
  long long correspondences = 0;
};

/// Correspondence-transfer error at frame distance d: pixels of frame f
/// covered by `reference` and visible in f+d are lifted to 3D through `mesh`
/// and projected into f+d; the error is the distance to where the reference
/// surface lands. Pixels are visited with the given stride.
ReprojectionError reprojection_error(const TriangleMesh &mesh,
                                     const TriangleMesh &reference,
                                     const std::vector<Camera> &cameras,
                                     int frame_distance, int stride = 1);

struct DepthError {
  double mean = 0.0;               // over all overlapping pixels
  std::vector<double> per_camera;  // NaN where a camera has no overlap
};

/// Mean |depth difference| over pixels covered by both meshes.
DepthError depth_error(const TriangleMesh &mesh, const TriangleMesh &reference,
                       const std::vector<Camera> &cameras);

} // namespace photomesh
