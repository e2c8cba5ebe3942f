#pragma once

#include "photomesh/core.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace photomesh {

/// Indexed triangle mesh with optional per-vertex RGB colors in [0,1].
struct TriangleMesh {
  Points vertices;
  Faces faces;
  Points colors; // empty or vertices.rows() x 3

  int num_vertices() const { return static_cast<int>(vertices.rows()); }
  int num_faces() const { return static_cast<int>(faces.rows()); }
  bool has_colors() const {
    return colors.rows() == vertices.rows() && colors.rows() > 0;
  }
  bool empty() const { return faces.rows() == 0; }

  Vec3 vertex(int i) const { return vertices.row(i).transpose(); }

  /// Vertices of face j as the columns of a 3x3 matrix.
  Mat3 triangle(int j) const {
    Mat3 v;
    for (int k = 0; k < 3; ++k)
      v.col(k) = vertices.row(faces(j, k)).transpose();
    return v;
  }

  /// Throws InvalidMesh on out-of-range or repeated face indices.
  void validate() const;
};

/// Translates the bounding-box center to the origin and scales so the
/// farthest vertex lies on the unit sphere.
void normalize_to_unit_sphere(TriangleMesh &mesh);

/// Pinhole camera with world-to-camera extrinsics x_cam = R x + t.
/// Image origin is top-left, pixel centers sit at integer + 0.5.
template <typename Scalar> struct PinholeCamera {
  Scalar fx = 1, fy = 1, cx = 0, cy = 0;
  Matrix3<Scalar> R = Matrix3<Scalar>::Identity();
  Vector3<Scalar> t = Vector3<Scalar>::Zero();
  int width = 1, height = 1;

  Vector3<Scalar> center() const { return -R.transpose() * t; }
  Vector3<Scalar> to_camera(const Vector3<Scalar> &p) const {
    return R * p + t;
  }
  Matrix3<Scalar> intrinsic_matrix() const {
    Matrix3<Scalar> k;
    k << fx, Scalar(0), cx, Scalar(0), fy, cy, Scalar(0), Scalar(0), Scalar(1);
    return k;
  }
  bool same_intrinsics(const PinholeCamera &o, Scalar tol = Scalar(1e-9)) const {
    using std::abs;
    return width == o.width && height == o.height && abs(fx - o.fx) <= tol &&
           abs(fy - o.fy) <= tol && abs(cx - o.cx) <= tol &&
           abs(cy - o.cy) <= tol;
  }
  bool in_bounds(const Vector2<Scalar> &x) const {
    return x.x() >= Scalar(0) && x.y() >= Scalar(0) &&
           x.x() <= Scalar(width) && x.y() <= Scalar(height);
  }
};

using Camera = PinholeCamera<double>;

/// Throws InvalidCamera unless R is a rotation, focal lengths are positive
/// and the principal point lies inside the image.
void validate(const Camera &cam);

/// Builds a camera at `eye` looking at `target`; `up` is the world up.
Camera look_at(const Vec3 &eye, const Vec3 &target, const Vec3 &up, double fx,
               double fy, double cx, double cy, int width, int height);

template <typename Scalar> struct Projection {
  Vector2<Scalar> pixel;
  Scalar depth;
};

template <typename Scalar>
Projection<Scalar> project(const Vector3<Scalar> &p,
                           const PinholeCamera<Scalar> &cam) {
  const Vector3<Scalar> q = cam.to_camera(p);
  if (!(q.z() > Scalar(kDepthEps)))
    throw Error(ErrorCode::PointBehindCamera, "camera-space depth <= 1e-6");
  return {{cam.fx * q.x() / q.z() + cam.cx, cam.fy * q.y() / q.z() + cam.cy},
          q.z()};
}

/// d pixel / d world point.
template <typename Scalar>
Matrix23<Scalar> project_jacobian(const Vector3<Scalar> &p,
                                  const PinholeCamera<Scalar> &cam) {
  const Vector3<Scalar> q = cam.to_camera(p);
  if (!(q.z() > Scalar(kDepthEps)))
    throw Error(ErrorCode::PointBehindCamera, "camera-space depth <= 1e-6");
  const Scalar iz = Scalar(1) / q.z();
  Matrix23<Scalar> dq;
  dq << cam.fx * iz, Scalar(0), -cam.fx * q.x() * iz * iz, Scalar(0),
      cam.fy * iz, -cam.fy * q.y() * iz * iz;
  return dq * cam.R;
}

struct Ray {
  Vec3 origin;
  Vec3 direction; // unit length

  Vec3 at(double s) const { return origin + s * direction; }
};

Ray unproject(const Vec2 &pixel, const Camera &cam);

struct BarycentricSample {
  int face = -1;
  Vec3 alpha = Vec3::Zero();

  bool valid(double tol = 1e-9) const {
    return face >= 0 && alpha.minCoeff() >= 0.0 &&
           std::abs(alpha.sum() - 1.0) <= tol;
  }
};

struct RayHit {
  double distance;
  Vec3 alpha;
};

/// Moller-Trumbore. Back faces are accepted; misses, near-parallel rays
/// (|det| < 1e-12), degenerate triangles and hits behind the origin return
/// nothing.
std::optional<RayHit> ray_triangle_intersect(const Ray &ray,
                                             const Mat3 &triangle);

/// d hit point / d [v0; v1; v2] when the point is defined by intersecting a
/// fixed ray with the moving triangle. Columns are grouped per vertex.
Mat39 intersection_jacobian(const Ray &ray, const Mat3 &triangle,
                            const RayHit &hit);

/// d (V alpha) / d [v0; v1; v2]: the blocks alpha_k * I.
inline Mat39 barycentric_jacobian(const Vec3 &alpha) {
  Mat39 j;
  for (int k = 0; k < 3; ++k)
    j.block<3, 3>(0, 3 * k) = alpha[k] * Mat3::Identity();
  return j;
}

std::vector<Vec3> sample_triangle_points(const TriangleMesh &mesh, int face,
                                         std::span<const Vec3> alphas);

} // namespace photomesh
