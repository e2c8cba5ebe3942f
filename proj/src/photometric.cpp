#include "photomesh/photometric.hpp"

#include "photomesh/transforms.hpp"

#include <Eigen/LU>

#include <cmath>

namespace photomesh {

std::vector<Camera> FrameSet::cameras() const {
  std::vector<Camera> out;
  out.reserve(frames.size());
  for (const Frame &f : frames)
    out.push_back(f.camera);
  return out;
}

void FrameSet::validate() const {
  if (frames.size() < 2)
    throw Error(ErrorCode::InvalidConfig, "frame set needs at least 2 frames");
  const Camera &c0 = frames.front().camera;
  for (const Frame &f : frames) {
    photomesh::validate(f.camera);
    if (!f.camera.same_intrinsics(c0))
      throw Error(ErrorCode::IntrinsicsMismatch, "frames differ in intrinsics");
    if (f.image.width() != c0.width || f.image.height() != c0.height)
      throw Error(ErrorCode::InvalidConfig, "image size != camera size");
  }
}

Camera sampling_camera(const Camera &a, const Camera &b,
                       const PhotometricOptions &options) {
  Camera cam;
  switch (options.sampling) {
  case SamplingView::Virtual: cam = virtual_camera(a, b); break;
  case SamplingView::ViewA: cam = a; break;
  case SamplingView::ViewB: cam = b; break;
  }
  if (options.sampler_scale != 1.0) {
    const double k = options.sampler_scale;
    cam.fx *= k;
    cam.fy *= k;
    cam.cx *= k;
    cam.cy *= k;
    cam.width = std::max(1, static_cast<int>(std::lround(cam.width * k)));
    cam.height = std::max(1, static_cast<int>(std::lround(cam.height * k)));
  }
  return cam;
}

namespace {

Vec3 sign_of(const Vec3 &r) {
  return r.unaryExpr([](double v) { return double((v > 0.0) - (v < 0.0)); });
}

} // namespace

Vec3 record_point(const SampleRecord &r, const TriangleMesh &mesh,
                  PointModel model) {
  const Mat3 tri = mesh.triangle(r.sample.face);
  if (model == PointModel::Barycentric)
    return tri * r.sample.alpha;
  Mat3 a;
  a.col(0) = -r.ray.direction;
  a.col(1) = tri.col(1) - tri.col(0);
  a.col(2) = tri.col(2) - tri.col(0);
  const Vec3 y = a.partialPivLu().solve(r.ray.origin - tri.col(0));
  return r.ray.at(y[0]);
}

Mat39 record_point_jacobian(const SampleRecord &r, const TriangleMesh &mesh,
                            PointModel model) {
  if (model == PointModel::Barycentric)
    return barycentric_jacobian(r.sample.alpha);
  const Mat3 tri = mesh.triangle(r.sample.face);
  return intersection_jacobian(r.ray, tri, RayHit{0.0, r.sample.alpha});
}

Eigen::Matrix<double, 2, 9> record_pixel_jacobian(const SampleRecord &r,
                                                  const Camera &view,
                                                  const TriangleMesh &mesh,
                                                  PointModel model) {
  const Vec3 p = record_point(r, mesh, model);
  return project_jacobian(p, view) * record_point_jacobian(r, mesh, model);
}

PairResult evaluate_pair(const Image &ia, const Image &ib, const Camera &ca,
                         const Camera &cb, const TriangleMesh &mesh,
                         const PhotometricOptions &options, bool with_gradient,
                         PairRasters rasters) {
  const Camera sampler = sampling_camera(ca, cb, options);
  RasterMaps own_a, own_b;
  if (!rasters.a) {
    own_a = rasterize(mesh, ca);
    rasters.a = &own_a;
  }
  if (!rasters.b) {
    own_b = rasterize(mesh, cb);
    rasters.b = &own_b;
  }
  RasterMaps sampler_maps;
  if (options.sampler_scale == 1.0 && options.sampling == SamplingView::ViewA)
    sampler_maps = *rasters.a;
  else if (options.sampler_scale == 1.0 &&
           options.sampling == SamplingView::ViewB)
    sampler_maps = *rasters.b;
  else
    sampler_maps = rasterize(mesh, sampler);

  SampleStats stats;
  const std::vector<SurfaceSample> samples =
      visible_samples(mesh, sampler_maps, {ca, cb}, {rasters.a, rasters.b},
                      /*require_all=*/true, &stats);

  PairResult out;
  out.candidates = stats.candidates;
  out.out_of_bounds = stats.out_of_bounds;
  out.occluded = stats.occluded;
  out.samples = static_cast<int>(samples.size());
  if (with_gradient)
    out.vertex_grad = Points::Zero(mesh.num_vertices(), 3);
  if (samples.empty())
    return out;

  out.records.reserve(samples.size());
  double sum = 0.0;
  ImageGradient ga, gb;
  for (const SurfaceSample &s : samples) {
    SampleRecord r;
    r.sample = s.sample;
    r.ray = unproject(s.source_pixel, sampler);
    r.point = s.point;
    r.xa = project(s.point, ca).pixel;
    r.xb = project(s.point, cb).pixel;
    r.residual = sample_bilinear(ia, r.xa, ga) - sample_bilinear(ib, r.xb, gb);
    r.sign = sign_of(r.residual);
    sum += r.residual.cwiseAbs().sum();

    if (with_gradient) {
      const Vec3 gp = project_jacobian(s.point, ca).transpose() * (ga * r.sign) -
                      project_jacobian(s.point, cb).transpose() * (gb * r.sign);
      const Eigen::Matrix<double, 9, 1> gv =
          record_point_jacobian(r, mesh, options.point_model).transpose() * gp;
      for (int k = 0; k < 3; ++k)
        out.vertex_grad.row(mesh.faces(s.sample.face, k)) +=
            gv.segment<3>(3 * k).transpose();
    }
    out.records.push_back(r);
  }
  const double n = static_cast<double>(samples.size());
  out.loss = sum / n;
  if (with_gradient)
    out.vertex_grad /= n;
  return out;
}

PairResult photometric_loss(const Image &ia, const Image &ib, const Camera &ca,
                            const Camera &cb, const TriangleMesh &mesh,
                            const PhotometricOptions &options) {
  PairResult r = evaluate_pair(ia, ib, ca, cb, mesh, options, false);
  if (r.samples == 0)
    throw Error(ErrorCode::NoVisibleSamples,
                "no sample visible in both views (" +
                    std::to_string(r.candidates) + " candidates)");
  return r;
}

PairResult photometric_gradient(const Image &ia, const Image &ib,
                                const Camera &ca, const Camera &cb,
                                const TriangleMesh &mesh,
                                const PhotometricOptions &options) {
  PairResult r = evaluate_pair(ia, ib, ca, cb, mesh, options, true);
  if (r.samples == 0)
    throw Error(ErrorCode::NoVisibleSamples,
                "no sample visible in both views (" +
                    std::to_string(r.candidates) + " candidates)");
  return r;
}

double frozen_loss(const Image &ia, const Image &ib, const Camera &ca,
                   const Camera &cb, const TriangleMesh &mesh,
                   const std::vector<SampleRecord> &records, PointModel model) {
  if (records.empty())
    return 0.0;
  double sum = 0.0;
  for (const SampleRecord &r : records) {
    const Vec3 p = record_point(r, mesh, model);
    const Vec3 res = sample_bilinear(ia, project(p, ca).pixel) -
                     sample_bilinear(ib, project(p, cb).pixel);
    sum += r.sign.dot(res);
  }
  return sum / static_cast<double>(records.size());
}

RegularizerResult regularizer(const ShapeState &state, const VecX &initial_code,
                              double lambda_code, double lambda_scale) {
  if (initial_code.size() != state.code.size())
    throw Error(ErrorCode::DimensionMismatch, "initial code size");
  RegularizerResult out;
  const VecX diff = state.code - initial_code;
  out.code_term = diff.squaredNorm();
  out.scale_term = -state.transform.s;
  out.value = lambda_code * out.code_term + lambda_scale * out.scale_term;
  out.gradient = VecX::Zero(state.size());
  out.gradient.head(diff.size()) = 2.0 * lambda_code * diff;
  out.gradient[diff.size()] = -lambda_scale;
  return out;
}

} // namespace photomesh
