#include "photomesh/geometry.hpp"

#include <Eigen/LU>

#include <algorithm>

namespace photomesh {

const char *to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::PointBehindCamera: return "PointBehindCamera";
  case ErrorCode::FaceOutOfRange: return "FaceOutOfRange";
  case ErrorCode::InvalidMesh: return "InvalidMesh";
  case ErrorCode::InvalidCamera: return "InvalidCamera";
  case ErrorCode::IntrinsicsMismatch: return "IntrinsicsMismatch";
  case ErrorCode::DimensionMismatch: return "DimensionMismatch";
  case ErrorCode::TopologyMismatch: return "TopologyMismatch";
  case ErrorCode::InsufficientData: return "InsufficientData";
  case ErrorCode::NoVisibleSamples: return "NoVisibleSamples";
  case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
  case ErrorCode::EmptySet: return "EmptySet";
  case ErrorCode::DegenerateMesh: return "DegenerateMesh";
  case ErrorCode::NoOverlap: return "NoOverlap";
  case ErrorCode::InvalidConfig: return "InvalidConfig";
  case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

void TriangleMesh::validate() const {
  const int n = num_vertices();
  for (int j = 0; j < num_faces(); ++j) {
    const int a = faces(j, 0), b = faces(j, 1), c = faces(j, 2);
    if (a < 0 || b < 0 || c < 0 || a >= n || b >= n || c >= n)
      throw Error(ErrorCode::InvalidMesh,
                  "face " + std::to_string(j) + " index out of range");
    if (a == b || b == c || a == c)
      throw Error(ErrorCode::InvalidMesh,
                  "face " + std::to_string(j) + " repeats a vertex");
  }
  if (colors.rows() != 0 && colors.rows() != vertices.rows())
    throw Error(ErrorCode::InvalidMesh, "color count != vertex count");
  if (!vertices.allFinite())
    throw Error(ErrorCode::InvalidMesh, "non-finite vertex");
}

void normalize_to_unit_sphere(TriangleMesh &mesh) {
  if (mesh.vertices.rows() == 0)
    return;
  const Eigen::RowVector3d lo = mesh.vertices.colwise().minCoeff();
  const Eigen::RowVector3d hi = mesh.vertices.colwise().maxCoeff();
  mesh.vertices.rowwise() -= 0.5 * (lo + hi);
  const double r = mesh.vertices.rowwise().norm().maxCoeff();
  if (r > 0.0)
    mesh.vertices /= r;
}

void validate(const Camera &cam) {
  const Mat3 rtr = cam.R.transpose() * cam.R;
  if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(cam.R.determinant() - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidCamera, "R is not a rotation");
  if (!(cam.fx > 0.0 && cam.fy > 0.0))
    throw Error(ErrorCode::InvalidCamera, "focal lengths must be positive");
  if (cam.width <= 0 || cam.height <= 0)
    throw Error(ErrorCode::InvalidCamera, "empty image size");
  if (cam.cx < 0.0 || cam.cy < 0.0 || cam.cx > cam.width ||
      cam.cy > cam.height)
    throw Error(ErrorCode::InvalidCamera, "principal point outside image");
  if (!cam.t.allFinite())
    throw Error(ErrorCode::InvalidCamera, "non-finite translation");
}

Camera look_at(const Vec3 &eye, const Vec3 &target, const Vec3 &up, double fx,
               double fy, double cx, double cy, int width, int height) {
  const Vec3 forward = (target - eye).normalized();
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right);
  Camera cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = cx;
  cam.cy = cy;
  cam.width = width;
  cam.height = height;
  cam.R.row(0) = right.transpose();
  cam.R.row(1) = down.transpose();
  cam.R.row(2) = forward.transpose();
  cam.t = -cam.R * eye;
  return cam;
}

Ray unproject(const Vec2 &pixel, const Camera &cam) {
  const Vec3 d_cam((pixel.x() - cam.cx) / cam.fx, (pixel.y() - cam.cy) / cam.fy,
                   1.0);
  return {cam.center(), (cam.R.transpose() * d_cam).normalized()};
}

std::optional<RayHit> ray_triangle_intersect(const Ray &ray,
                                             const Mat3 &triangle) {
  const Vec3 v0 = triangle.col(0);
  const Vec3 e1 = triangle.col(1) - v0;
  const Vec3 e2 = triangle.col(2) - v0;
  if (0.5 * e1.cross(e2).norm() <= kAreaEps)
    return std::nullopt;

  const Vec3 pvec = ray.direction.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-12)
    return std::nullopt;
  const double inv = 1.0 / det;

  constexpr double slack = 1e-12;
  const Vec3 tvec = ray.origin - v0;
  double u = tvec.dot(pvec) * inv;
  if (u < -slack || u > 1.0 + slack)
    return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  double w = ray.direction.dot(qvec) * inv;
  if (w < -slack || u + w > 1.0 + slack)
    return std::nullopt;
  const double dist = e2.dot(qvec) * inv;
  if (dist < 0.0)
    return std::nullopt;

  u = std::max(u, 0.0);
  w = std::max(w, 0.0);
  Vec3 alpha(std::max(1.0 - u - w, 0.0), u, w);
  alpha /= alpha.sum();
  return RayHit{dist, alpha};
}

Mat39 intersection_jacobian(const Ray &ray, const Mat3 &triangle,
                            const RayHit &hit) {
  // [-d, e1, e2] [s, u, w]^T = o - v0. Perturbing the vertices gives
  // ds = -r . sum_k alpha_k dv_k with r the first row of the inverse.
  Mat3 a;
  a.col(0) = -ray.direction;
  a.col(1) = triangle.col(1) - triangle.col(0);
  a.col(2) = triangle.col(2) - triangle.col(0);
  const Eigen::RowVector3d r = a.inverse().row(0);
  Mat39 j;
  for (int k = 0; k < 3; ++k)
    j.block<3, 3>(0, 3 * k) = -hit.alpha[k] * (ray.direction * r);
  return j;
}

std::vector<Vec3> sample_triangle_points(const TriangleMesh &mesh, int face,
                                         std::span<const Vec3> alphas) {
  if (face < 0 || face >= mesh.num_faces())
    throw Error(ErrorCode::FaceOutOfRange,
                "face " + std::to_string(face) + " of " +
                    std::to_string(mesh.num_faces()));
  const Mat3 v = mesh.triangle(face);
  std::vector<Vec3> out;
  out.reserve(alphas.size());
  for (const Vec3 &a : alphas)
    out.push_back(v * a);
  return out;
}

} // namespace photomesh
