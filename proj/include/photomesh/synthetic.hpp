#pragma once

#include "photomesh/photometric.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace photomesh {

/// Unit icosphere, `subdivisions` rounds of 4-way splitting.
TriangleMesh icosphere(int subdivisions);

/// Procedural stand-in for one object category: deformed icospheres (axis
/// scaling, tapering, low-frequency bumps) sharing one topology, each
/// normalized to the unit sphere.
struct ShapeFamily {
  int subdivisions = 3;

  TriangleMesh base() const { return icosphere(subdivisions); }
  TriangleMesh sample(std::uint64_t seed) const;
  std::vector<TriangleMesh> sample_many(int count, std::uint64_t seed) const;
};

enum class TextureKind { Constant, Checker, Smooth };

TextureKind parse_texture(const std::string &name);
std::string to_string(TextureKind kind);

struct TextureSpec {
  TextureKind kind = TextureKind::Checker;
  int checker_longitude = 8;
  int checker_latitude = 4;
  /// Amplitude of per-vertex uniform noise added on top of the pattern.
  double noise = 0.0;
  std::uint64_t seed = 0;
};

/// Per-vertex colors attached to vertex identity, computed from the
/// direction of each vertex of `reference` (typically the prior template).
Points vertex_colors(const TriangleMesh &reference, const TextureSpec &spec);

struct OrbitRig {
  int azimuths = 24;
  std::vector<double> elevations_deg{-10.0, 0.0, 20.0};
  double radius = 3.0;
  int width = 224;
  int height = 224;
  double fov_deg = 50.0; // horizontal field of view of the object cameras

  double focal() const;
  int frame_count() const {
    return azimuths * static_cast<int>(elevations_deg.size());
  }
  void validate() const;
};

/// Cameras on the orbit sphere looking at the origin with world up +y.
/// Ordered elevation-major, then azimuth.
std::vector<Camera> make_orbit_cameras(const OrbitRig &rig);

/// Equirectangular environment image, width = 2 * height.
struct Panorama {
  Image image;

  void validate() const;
};

/// Multi-octave value-noise colors over a sky/ground gradient.
Panorama make_panorama(int width, int height, std::uint64_t seed);

/// World direction -> continuous panorama pixel coordinates.
/// Longitude atan2(x, z) maps to u, latitude asin(y) (up) maps to v.
Vec2 panorama_coordinates(const Panorama &pano, const Vec3 &direction);

/// Bilinear lookup that wraps horizontally.
Vec3 sample_panorama(const Panorama &pano, const Vec2 &uv);

/// Perspective crop with the camera's rotation, a square-pixel pinhole of
/// the given horizontal field of view, and the camera's image size.
Image crop_panorama(const Panorama &pano, const Camera &camera, double fov_deg);

/// Rasterize and shade with interpolated vertex colors over `background`.
Image render(const TriangleMesh &mesh, const Camera &camera,
             const Image &background);

struct NoiseSpec {
  double sigma = 0.0;      // on each of the 7 similarity parameters
  double code_sigma = 0.0; // on the latent code
  std::uint64_t seed = 0;
};

ShapeState perturb_state(const ShapeState &state, const NoiseSpec &noise);

struct SceneSpec {
  OrbitRig rig;
  TextureSpec texture;
  NoiseSpec noise;
  int panorama_height = 512;
  double background_fov_deg = 90.0;
  std::uint64_t seed = 0;
};

struct Scene {
  FrameSet frames;
  TriangleMesh gt_mesh; // with vertex colors
  ShapeState gt_state;
  ShapeState init_state; // gt_state perturbed by spec.noise
};

/// Renders every rig view of generate(prior, gt_state) over per-view crops
/// of one panorama.
Scene make_sequence(const LinearShapePrior &prior, const ShapeState &gt_state,
                    const SceneSpec &spec, const Panorama &pano);

/// Ground-truth code for a scene: a fresh family member projected into the
/// prior's span.
VecX sample_true_code(const LinearShapePrior &prior, const ShapeFamily &family,
                      std::uint64_t seed);

} // namespace photomesh
