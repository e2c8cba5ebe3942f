#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>

namespace photomesh {

template <typename Scalar> using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Matrix23 = Eigen::Matrix<Scalar, 2, 3>;

using Vec2 = Vector2<double>;
using Vec3 = Vector3<double>;
using Mat3 = Matrix3<double>;
using Mat23 = Matrix23<double>;
using Mat39 = Eigen::Matrix<double, 3, 9>;
using Mat37 = Eigen::Matrix<double, 3, 7>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Vec3i = Eigen::Vector3i;

/// Row-major N x 3 arrays for vertex and color storage.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Faces = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

inline constexpr double kDepthEps = 1e-6;
inline constexpr double kAreaEps = 1e-12;

enum class ErrorCode {
  PointBehindCamera,
  FaceOutOfRange,
  InvalidMesh,
  InvalidCamera,
  IntrinsicsMismatch,
  DimensionMismatch,
  TopologyMismatch,
  InsufficientData,
  NoVisibleSamples,
  NonFiniteLoss,
  EmptySet,
  DegenerateMesh,
  NoOverlap,
  InvalidConfig,
  Io,
};

const char *to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

template <typename Scalar>
Matrix3<Scalar> hat(const Vector3<Scalar> &w) {
  Matrix3<Scalar> m;
  m << Scalar(0), -w.z(), w.y(), w.z(), Scalar(0), -w.x(), -w.y(), w.x(),
      Scalar(0);
  return m;
}

} // namespace photomesh
