#pragma once

#include "photomesh/geometry.hpp"

#include <filesystem>
#include <limits>
#include <optional>
#include <vector>

namespace photomesh {

/// Per-pixel face index, camera-space depth and perspective-correct
/// barycentrics. Empty pixels carry face -1 and depth +inf.
struct RasterMaps {
  int width = 0;
  int height = 0;
  std::vector<int> face;
  std::vector<double> depth;
  std::vector<Vec3> bary;
  int skipped_faces = 0; // faces with a vertex at or behind the near plane

  RasterMaps() = default;
  RasterMaps(int w, int h)
      : width(w), height(h), face(static_cast<size_t>(w) * h, -1),
        depth(static_cast<size_t>(w) * h,
              std::numeric_limits<double>::infinity()),
        bary(static_cast<size_t>(w) * h, Vec3::Zero()) {}

  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
  bool covered(int x, int y) const { return face[index(x, y)] >= 0; }
};

/// Z-buffered edge-function rasterization with a top-left fill rule.
/// Equal depths keep the lower face index.
RasterMaps rasterize(const TriangleMesh &mesh, const Camera &cam);

/// Bilinear depth lookup over the finite taps around `x`; nullopt when none
/// of the four taps is covered or x is outside the image.
std::optional<double> sample_depth(const RasterMaps &maps, const Vec2 &x);

inline constexpr double kVisibilityTolerance = 1e-3;

struct SurfaceSample {
  BarycentricSample sample;
  Vec3 point;
  Vec2 source_pixel; // pixel center in the sampling camera
  std::vector<bool> visible;
};

struct SampleStats {
  int candidates = 0;
  int out_of_bounds = 0; // behind a view or projecting outside it
  int occluded = 0;
};

/// A sample counts as visible in a view when it projects inside the image
/// and either the view's face map shows the same face at that pixel or the
/// sample lies less than `tolerance` behind the interpolated raster depth.
bool visible_in_view(const SurfaceSample &s, const Camera &view,
                     const RasterMaps &view_maps,
                     double tolerance = kVisibilityTolerance);

/// One sample per covered pixel of `sampler`, with visibility flags for each
/// of `views`. With `require_all` only samples visible everywhere are kept.
std::vector<SurfaceSample>
visible_samples(const TriangleMesh &mesh, const Camera &sampler,
                const std::vector<Camera> &views, bool require_all = true,
                SampleStats *stats = nullptr);

/// Same, reusing precomputed rasters of the sampler and of every view.
std::vector<SurfaceSample>
visible_samples(const TriangleMesh &mesh, const RasterMaps &sampler_maps,
                const std::vector<Camera> &views,
                const std::vector<const RasterMaps *> &view_maps,
                bool require_all = true, SampleStats *stats = nullptr);

/// Debug dump: face ids as hashed colors, depth as normalized grayscale.
void write_raster_debug(const RasterMaps &maps,
                        const std::filesystem::path &face_png,
                        const std::filesystem::path &depth_png);

} // namespace photomesh
