#pragma once

// Small synthetic scenes shared by the photometric, optimizer and
// acceptance tests.

#include "photomesh/experiment.hpp"
#include "photomesh/synthetic.hpp"

namespace fixture {

using namespace photomesh;

inline const ShapeFamily &family() {
  static const ShapeFamily f{2};
  return f;
}

// 8-dim prior on the 162-vertex family.
inline const LinearShapePrior &prior() {
  static const LinearShapePrior p = benchmark_prior(family(), 8, 32, 4242);
  return p;
}

struct SceneOptions {
  int azimuths = 12;
  int size = 64;
  TextureKind texture = TextureKind::Checker;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

inline Scene scene(const SceneOptions &o = {}) {
  SceneSpec spec;
  spec.rig.azimuths = o.azimuths;
  spec.rig.elevations_deg = {10.0};
  spec.rig.width = spec.rig.height = o.size;
  spec.texture.kind = o.texture;
  spec.texture.seed = o.seed;
  spec.noise.sigma = o.sigma;
  spec.noise.seed = o.seed * 31 + 7;
  spec.panorama_height = 128;
  spec.seed = o.seed;
  ShapeState gt;
  gt.code = sample_true_code(prior(), family(), o.seed + 900);
  const Panorama pano = make_panorama(2 * spec.panorama_height, spec.panorama_height, o.seed + 101);
  return make_sequence(prior(), gt, spec, pano);
}

} // namespace fixture
