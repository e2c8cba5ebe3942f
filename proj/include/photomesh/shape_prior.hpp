#pragma once

#include "photomesh/geometry.hpp"
#include "photomesh/transforms.hpp"

#include <vector>

namespace photomesh {

/// Full optimization variable: latent code plus similarity parameters.
struct ShapeState {
  VecX code;
  Similarity transform;

  int size() const { return static_cast<int>(code.size()) + 7; }
  VecX to_vector() const;
  static ShapeState from_vector(const VecX &z, int code_size);
  bool all_finite() const { return code.allFinite() && transform.all_finite(); }
};

/// Differentiable decoder from a latent code to canonical-frame vertices on
/// a fixed topology. Vertex arrays are flattened as [x0 y0 z0 x1 ...].
class ShapeModel {
public:
  virtual ~ShapeModel() = default;

  virtual int code_size() const = 0;
  virtual int num_vertices() const = 0;
  virtual const Faces &faces() const = 0;
  virtual Points decode(const VecX &code) const = 0;
  /// d flattened vertices / d code, 3N x K.
  virtual MatX decode_jacobian(const VecX &code) const = 0;
  /// grad^T (d vertices / d code) for a per-vertex gradient.
  virtual VecX decode_vjp(const VecX &code, const Points &vertex_grad) const = 0;
};

/// Linear blendshape model: vertices = template + basis * code.
class LinearShapePrior : public ShapeModel {
public:
  LinearShapePrior() = default;
  LinearShapePrior(TriangleMesh mean, MatX basis, VecX singular_values);

  int code_size() const override { return static_cast<int>(basis_.cols()); }
  int num_vertices() const override { return mean_.num_vertices(); }
  const Faces &faces() const override { return mean_.faces; }
  Points decode(const VecX &code) const override;
  MatX decode_jacobian(const VecX &) const override { return basis_; }
  VecX decode_vjp(const VecX &code, const Points &vertex_grad) const override;

  const TriangleMesh &mean_mesh() const { return mean_; }
  const MatX &basis() const { return basis_; }
  const VecX &singular_values() const { return singular_values_; }

private:
  TriangleMesh mean_;
  MatX basis_; // 3N x K, orthonormal columns when produced by fit_prior
  VecX singular_values_;
};

/// Mesh in the world frame: similarity transform of the decoded vertices.
TriangleMesh generate(const ShapeModel &model, const ShapeState &state);

/// d flattened world vertices / d [code; s; omega; t], 3N x (K + 7).
MatX generate_jacobian(const ShapeModel &model, const ShapeState &state);

/// Pulls a per-vertex world-space gradient back to the state vector without
/// forming the full Jacobian.
VecX backpropagate(const ShapeModel &model, const ShapeState &state,
                   const Points &vertex_grad);

/// PCA over same-topology unit-sphere-normalized meshes: mean template plus
/// the top `k` principal directions from a thin SVD.
LinearShapePrior fit_prior(const std::vector<TriangleMesh> &meshes, int k);

/// Least-squares code of `mesh` in the prior's span (canonical frame).
VecX encode(const LinearShapePrior &prior, const TriangleMesh &mesh);

} // namespace photomesh
