#include "photomesh/transforms.hpp"

namespace photomesh {

Points apply_similarity(const Points &vertices, const Similarity &theta) {
  const Mat3 m = std::exp(theta.s) * so3_exp(theta.omega);
  Points out(vertices.rows(), 3);
  for (Eigen::Index i = 0; i < vertices.rows(); ++i)
    out.row(i) = (m * vertices.row(i).transpose() + theta.t).transpose();
  return out;
}

Camera virtual_camera(const Camera &a, const Camera &b) {
  if (!a.same_intrinsics(b))
    throw Error(ErrorCode::IntrinsicsMismatch,
                "virtual camera needs identical intrinsics");
  const Eigen::Quaterniond qa(a.R), qb(b.R);
  const Eigen::Quaterniond q = slerp(qa, qb, 0.5);
  const Vec3 c = 0.5 * (a.center() + b.center());
  Camera v = a;
  v.R = q.toRotationMatrix();
  v.t = -v.R * c;
  return v;
}

} // namespace photomesh
