#pragma once

#include "photomesh/image.hpp"
#include "photomesh/raster.hpp"
#include "photomesh/shape_prior.hpp"

#include <vector>

namespace photomesh {

struct Frame {
  Image image;
  Camera camera;
};

/// Ordered (image, camera) sequence. At least two frames of equal size that
/// share intrinsics.
struct FrameSet {
  std::vector<Frame> frames;

  int size() const { return static_cast<int>(frames.size()); }
  std::vector<Camera> cameras() const;
  void validate() const;
};

/// Camera from which surface points are sampled for a pair (a, b).
enum class SamplingView { Virtual, ViewA, ViewB };

/// How a sample point depends on the mesh within one step. `Barycentric`
/// keeps (face, alpha) fixed so p = V alpha. `RayCast` keeps the sampling
/// pixel fixed so p slides along its ray as the face moves.
enum class PointModel { Barycentric, RayCast };

struct PhotometricOptions {
  SamplingView sampling = SamplingView::Virtual;
  PointModel point_model = PointModel::Barycentric;
  double visibility_tolerance = kVisibilityTolerance;
  /// Sampler resolution relative to the input frames.
  double sampler_scale = 1.0;
};

/// One photometric correspondence, with everything needed to re-evaluate it
/// under frozen sampling.
struct SampleRecord {
  BarycentricSample sample;
  Ray ray;        // sampling ray through the source pixel center
  Vec3 point;     // surface point at evaluation time
  Vec2 xa, xb;    // projections into the two views
  Vec3 residual;  // I_a(xa) - I_b(xb)
  Vec3 sign;      // l1 subgradient, 0 where the residual is 0
};

struct PairResult {
  double loss = 0.0; // mean over samples of the per-sample channel l1 sum
  int samples = 0;
  int candidates = 0;
  int out_of_bounds = 0;
  int occluded = 0;
  Points vertex_grad; // N x 3; empty unless gradients were requested
  std::vector<SampleRecord> records;
};

/// Precomputed rasters that can be shared between pairs of one iteration.
struct PairRasters {
  const RasterMaps *a = nullptr;
  const RasterMaps *b = nullptr;
};

/// Camera used to sample a pair, honoring options.sampling and
/// options.sampler_scale.
Camera sampling_camera(const Camera &a, const Camera &b,
                       const PhotometricOptions &options);

/// Pairwise l1 photometric loss; throws NoVisibleSamples when no sample is
/// visible in both views.
PairResult photometric_loss(const Image &ia, const Image &ib, const Camera &ca,
                            const Camera &cb, const TriangleMesh &mesh,
                            const PhotometricOptions &options = {});

/// Loss plus d loss / d vertices.
PairResult photometric_gradient(const Image &ia, const Image &ib,
                                const Camera &ca, const Camera &cb,
                                const TriangleMesh &mesh,
                                const PhotometricOptions &options = {});

/// Shared worker; returns an empty result instead of throwing when nothing
/// is visible.
PairResult evaluate_pair(const Image &ia, const Image &ib, const Camera &ca,
                         const Camera &cb, const TriangleMesh &mesh,
                         const PhotometricOptions &options, bool with_gradient,
                         PairRasters rasters = {});

/// Sample point under `model` for the current mesh.
Vec3 record_point(const SampleRecord &r, const TriangleMesh &mesh,
                  PointModel model);

/// d point / d face vertices under `model`.
Mat39 record_point_jacobian(const SampleRecord &r, const TriangleMesh &mesh,
                            PointModel model);

/// d (pixel in `view`) / d face vertices for one sample.
Eigen::Matrix<double, 2, 9> record_pixel_jacobian(const SampleRecord &r,
                                                  const Camera &view,
                                                  const TriangleMesh &mesh,
                                                  PointModel model);

/// Frozen-sampling loss: records, faces and l1 signs held fixed, points
/// recomputed from `mesh`. Its exact gradient is what evaluate_pair returns.
double frozen_loss(const Image &ia, const Image &ib, const Camera &ca,
                   const Camera &cb, const TriangleMesh &mesh,
                   const std::vector<SampleRecord> &records, PointModel model);

struct RegularizerResult {
  double value = 0.0;  // lambda_code * code_term + lambda_scale * scale_term
  double code_term = 0.0;
  double scale_term = 0.0;
  VecX gradient;       // d value / d [code; s; omega; t]
};

RegularizerResult regularizer(const ShapeState &state, const VecX &initial_code,
                              double lambda_code, double lambda_scale);

} // namespace photomesh
