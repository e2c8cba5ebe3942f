#pragma once

#include "photomesh/geometry.hpp"

#include <array>
#include <cmath>

namespace photomesh {

inline constexpr int kDefaultTaylorOrder = 20;

/// Truncated exponential series sum_{k=0..order} hat(w)^k / k!.
template <typename Scalar>
Matrix3<Scalar> so3_exp(const Vector3<Scalar> &w,
                        int order = kDefaultTaylorOrder) {
  const Matrix3<Scalar> a = hat(w);
  Matrix3<Scalar> term = Matrix3<Scalar>::Identity();
  Matrix3<Scalar> r = term;
  for (int k = 1; k <= order; ++k) {
    term = (term * a) / Scalar(k);
    r += term;
  }
  return r;
}

/// Partial derivatives dR/dw_i of the truncated series, differentiated term
/// by term: d(A^k) = d(A^{k-1}) A + A^{k-1} G_i.
template <typename Scalar>
std::array<Matrix3<Scalar>, 3>
so3_exp_jacobian(const Vector3<Scalar> &w, int order = kDefaultTaylorOrder) {
  const Matrix3<Scalar> a = hat(w);
  std::array<Matrix3<Scalar>, 3> gen;
  for (int i = 0; i < 3; ++i)
    gen[i] = hat<Scalar>(Vector3<Scalar>::Unit(i));

  Matrix3<Scalar> term = Matrix3<Scalar>::Identity();
  std::array<Matrix3<Scalar>, 3> dterm, out;
  for (int i = 0; i < 3; ++i) {
    dterm[i].setZero();
    out[i].setZero();
  }
  for (int k = 1; k <= order; ++k) {
    for (int i = 0; i < 3; ++i) {
      dterm[i] = (dterm[i] * a + term * gen[i]) / Scalar(k);
      out[i] += dterm[i];
    }
    term = (term * a) / Scalar(k);
  }
  return out;
}

/// theta = [s; omega; t]: v -> exp(s) R(omega) v + t.
template <typename Scalar> struct SimilarityParams {
  Scalar s = Scalar(0);
  Vector3<Scalar> omega = Vector3<Scalar>::Zero();
  Vector3<Scalar> t = Vector3<Scalar>::Zero();

  Eigen::Matrix<Scalar, 7, 1> to_vector() const {
    Eigen::Matrix<Scalar, 7, 1> v;
    v << s, omega, t;
    return v;
  }
  static SimilarityParams from_vector(const Eigen::Matrix<Scalar, 7, 1> &v) {
    return {v[0], v.template segment<3>(1), v.template segment<3>(4)};
  }
  bool all_finite() const {
    return std::isfinite(s) && omega.allFinite() && t.allFinite();
  }
};

using Similarity = SimilarityParams<double>;

template <typename Scalar>
Vector3<Scalar> apply_similarity(const Vector3<Scalar> &v,
                                 const SimilarityParams<Scalar> &theta) {
  using std::exp;
  return exp(theta.s) * (so3_exp(theta.omega) * v) + theta.t;
}

/// Applies theta to every row of `vertices`.
Points apply_similarity(const Points &vertices, const Similarity &theta);

/// Columns [d/ds, d/domega (3), d/dt (3)].
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 7>
similarity_jacobian(const Vector3<Scalar> &v,
                    const SimilarityParams<Scalar> &theta) {
  using std::exp;
  const Scalar scale = exp(theta.s);
  const auto dr = so3_exp_jacobian(theta.omega);
  Eigen::Matrix<Scalar, 3, 7> j;
  j.col(0) = scale * (so3_exp(theta.omega) * v);
  for (int i = 0; i < 3; ++i)
    j.col(1 + i) = scale * (dr[i] * v);
  j.template block<3, 3>(0, 4).setIdentity();
  return j;
}

/// Unit-quaternion Slerp on the short arc; falls back to normalized lerp when
/// the inputs are within 1e-9 of parallel.
template <typename Scalar>
Eigen::Quaternion<Scalar> slerp(Eigen::Quaternion<Scalar> a,
                                Eigen::Quaternion<Scalar> b, Scalar u) {
  Scalar dot = a.coeffs().dot(b.coeffs());
  if (dot < Scalar(0)) {
    b.coeffs() = -b.coeffs();
    dot = -dot;
  }
  Eigen::Quaternion<Scalar> out;
  if (dot > Scalar(1) - Scalar(1e-9)) {
    out.coeffs() = (Scalar(1) - u) * a.coeffs() + u * b.coeffs();
  } else {
    using std::acos;
    using std::sin;
    const Scalar angle = acos(dot);
    const Scalar inv = Scalar(1) / sin(angle);
    out.coeffs() = sin((Scalar(1) - u) * angle) * inv * a.coeffs() +
                   sin(u * angle) * inv * b.coeffs();
  }
  out.normalize();
  return out;
}

/// Bisecting viewpoint: Slerp of the two rotations at 0.5 and the midpoint
/// of the camera centers. Intrinsics are taken from `a`.
Camera virtual_camera(const Camera &a, const Camera &b);

} // namespace photomesh
