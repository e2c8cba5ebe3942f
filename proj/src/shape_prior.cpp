#include "photomesh/shape_prior.hpp"

#include <Eigen/SVD>

namespace photomesh {

namespace {

Eigen::Map<const VecX> flat(const Points &p) {
  return {p.data(), p.size()};
}

void require_code(const ShapeModel &model, const VecX &code) {
  if (code.size() != model.code_size())
    throw Error(ErrorCode::DimensionMismatch,
                "code has " + std::to_string(code.size()) + " entries, model " +
                    std::to_string(model.code_size()));
}

void require_topology(const TriangleMesh &a, const TriangleMesh &b) {
  if (a.num_vertices() != b.num_vertices() || a.faces != b.faces)
    throw Error(ErrorCode::TopologyMismatch, "meshes differ in topology");
}

} // namespace

VecX ShapeState::to_vector() const {
  VecX z(size());
  z << code, transform.to_vector();
  return z;
}

ShapeState ShapeState::from_vector(const VecX &z, int code_size) {
  if (z.size() != code_size + 7)
    throw Error(ErrorCode::DimensionMismatch, "state vector size");
  return {z.head(code_size),
          Similarity::from_vector(z.tail<7>())};
}

LinearShapePrior::LinearShapePrior(TriangleMesh mean, MatX basis,
                                   VecX singular_values)
    : mean_(std::move(mean)), basis_(std::move(basis)),
      singular_values_(std::move(singular_values)) {
  if (basis_.rows() != 3 * mean_.num_vertices())
    throw Error(ErrorCode::DimensionMismatch, "basis rows != 3N");
}

Points LinearShapePrior::decode(const VecX &code) const {
  require_code(*this, code);
  Points out = mean_.vertices;
  Eigen::Map<VecX>(out.data(), out.size()) += basis_ * code;
  return out;
}

VecX LinearShapePrior::decode_vjp(const VecX &code,
                                  const Points &vertex_grad) const {
  require_code(*this, code);
  return basis_.transpose() * flat(vertex_grad);
}

TriangleMesh generate(const ShapeModel &model, const ShapeState &state) {
  TriangleMesh mesh;
  mesh.vertices = apply_similarity(model.decode(state.code), state.transform);
  mesh.faces = model.faces();
  return mesh;
}

MatX generate_jacobian(const ShapeModel &model, const ShapeState &state) {
  const int n = model.num_vertices();
  const int k = model.code_size();
  const Points canon = model.decode(state.code);
  const MatX dcode = model.decode_jacobian(state.code);
  const Mat3 m = std::exp(state.transform.s) * so3_exp(state.transform.omega);

  MatX j(3 * n, k + 7);
  for (int i = 0; i < n; ++i) {
    j.block(3 * i, 0, 3, k) = m * dcode.middleRows(3 * i, 3);
    j.block<3, 7>(3 * i, k) =
        similarity_jacobian<double>(canon.row(i).transpose(), state.transform);
  }
  return j;
}

VecX backpropagate(const ShapeModel &model, const ShapeState &state,
                   const Points &vertex_grad) {
  const int k = model.code_size();
  const Points canon = model.decode(state.code);
  const double scale = std::exp(state.transform.s);
  const Mat3 r = so3_exp(state.transform.omega);
  const auto dr = so3_exp_jacobian(state.transform.omega);

  // Canonical-frame gradient g' = exp(s) R^T g per vertex.
  Points canon_grad = (vertex_grad * r) * scale;
  VecX out(k + 7);
  out.head(k) = model.decode_vjp(state.code, canon_grad);

  // sum_i g_i . (exp(s) A v_i) = exp(s) tr(A^T G^T V) with G, V stacked rows.
  const Mat3 gv = vertex_grad.transpose() * canon;
  out[k] = scale * (r.cwiseProduct(gv)).sum();
  for (int a = 0; a < 3; ++a)
    out[k + 1 + a] = scale * (dr[a].cwiseProduct(gv)).sum();
  out.tail<3>() = vertex_grad.colwise().sum().transpose();
  return out;
}

LinearShapePrior fit_prior(const std::vector<TriangleMesh> &meshes, int k) {
  if (k < 1 || static_cast<int>(meshes.size()) < k + 1)
    throw Error(ErrorCode::InsufficientData,
                "need at least K+1 meshes for K = " + std::to_string(k));
  const TriangleMesh &first = meshes.front();
  for (const TriangleMesh &m : meshes) {
    require_topology(first, m);
    if (m.vertices.rowwise().norm().maxCoeff() > 1.0 + 1e-6)
      throw Error(ErrorCode::InvalidMesh, "training mesh not unit-normalized");
  }
  const int n = first.num_vertices();
  if (k > 3 * n)
    throw Error(ErrorCode::InsufficientData, "K exceeds 3N");

  MatX x(meshes.size(), 3 * n);
  for (size_t i = 0; i < meshes.size(); ++i)
    x.row(i) = flat(meshes[i].vertices).transpose();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  Eigen::BDCSVD<MatX> svd(x, Eigen::ComputeThinV);
  MatX basis = svd.matrixV().leftCols(k);
  for (int c = 0; c < k; ++c) {
    Eigen::Index arg;
    basis.col(c).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, c) < 0.0)
      basis.col(c) = -basis.col(c);
  }

  TriangleMesh tmpl;
  tmpl.faces = first.faces;
  tmpl.vertices = Eigen::Map<const Points>(mean.data(), n, 3);
  return LinearShapePrior(std::move(tmpl), std::move(basis),
                          svd.singularValues().head(k));
}

VecX encode(const LinearShapePrior &prior, const TriangleMesh &mesh) {
  require_topology(prior.mean_mesh(), mesh);
  const Points diff = mesh.vertices - prior.mean_mesh().vertices;
  return prior.basis().transpose() * flat(diff);
}

} // namespace photomesh
