#include "photomesh/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace photomesh {

namespace {

constexpr double kPi = std::numbers::pi;

double deg2rad(double d) { return d * kPi / 180.0; }

} // namespace

TriangleMesh icosphere(int subdivisions) {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, p, 0}, {1, p, 0},  {-1, -p, 0}, {1, -p, 0},
                         {0, -1, p}, {0, 1, p},  {0, -1, -p}, {0, 1, -p},
                         {p, 0, -1}, {p, 0, 1},  {-p, 0, -1}, {-p, 0, 1}};
  for (Vec3 &x : v)
    x.normalize();
  std::vector<Vec3i> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10},
                          {0, 10, 11}, {1, 5, 9}, {5, 11, 4},  {11, 10, 2},
                          {10, 7, 6}, {7, 1, 8},  {3, 9, 4},   {3, 4, 2},
                          {3, 2, 6},  {3, 6, 8},  {3, 8, 9},   {4, 9, 5},
                          {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end())
        return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<Vec3i> next;
    next.reserve(f.size() * 4);
    for (const Vec3i &t : f) {
      const int ab = midpoint(t[0], t[1]);
      const int bc = midpoint(t[1], t[2]);
      const int ca = midpoint(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }

  TriangleMesh mesh;
  mesh.vertices.resize(static_cast<Eigen::Index>(v.size()), 3);
  for (size_t i = 0; i < v.size(); ++i)
    mesh.vertices.row(i) = v[i].transpose();
  mesh.faces.resize(static_cast<Eigen::Index>(f.size()), 3);
  for (size_t j = 0; j < f.size(); ++j)
    mesh.faces.row(j) = f[j].transpose();
  return mesh;
}

TriangleMesh ShapeFamily::sample(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  // Elongated along x, flattened along y: a loose "vehicle" silhouette.
  const Vec3 scale(uniform(1.3, 2.0), uniform(0.55, 0.9), uniform(0.7, 1.1));
  const double taper_y = uniform(-0.3, 0.3);
  const double taper_z = uniform(-0.2, 0.2);
  struct Bump {
    Vec3 dir;
    double freq, phase, amp;
  };
  std::vector<Bump> bumps(3);
  for (Bump &b : bumps) {
    b.dir = Vec3(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)).normalized();
    b.freq = uniform(1.0, 3.0);
    b.phase = uniform(0.0, 2.0 * kPi);
    b.amp = uniform(0.0, 0.08);
  }

  TriangleMesh mesh = base();
  for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i) {
    Vec3 x = mesh.vertices.row(i).transpose();
    double r = 1.0;
    for (const Bump &b : bumps)
      r += b.amp * std::sin(b.freq * b.dir.dot(x) * kPi + b.phase);
    x *= r;
    x = x.cwiseProduct(scale);
    x.y() *= 1.0 + taper_y * x.x() / scale.x();
    x.z() *= 1.0 + taper_z * x.x() / scale.x();
    mesh.vertices.row(i) = x.transpose();
  }
  normalize_to_unit_sphere(mesh);
  return mesh;
}

std::vector<TriangleMesh> ShapeFamily::sample_many(int count,
                                                   std::uint64_t seed) const {
  std::vector<TriangleMesh> out;
  out.reserve(count);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i)
    out.push_back(sample(rng()));
  return out;
}

TextureKind parse_texture(const std::string &name) {
  if (name == "constant")
    return TextureKind::Constant;
  if (name == "checker")
    return TextureKind::Checker;
  if (name == "smooth")
    return TextureKind::Smooth;
  throw Error(ErrorCode::InvalidConfig, "unknown texture '" + name + "'");
}

std::string to_string(TextureKind kind) {
  switch (kind) {
  case TextureKind::Constant: return "constant";
  case TextureKind::Checker: return "checker";
  case TextureKind::Smooth: return "smooth";
  }
  return "unknown";
}

Points vertex_colors(const TriangleMesh &reference, const TextureSpec &spec) {
  const int n = reference.num_vertices();
  Points colors(n, 3);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  const Vec3 warm(0.92, 0.78, 0.22), cool(0.12, 0.22, 0.62);

  for (int i = 0; i < n; ++i) {
    const Vec3 d = reference.vertex(i).normalized();
    const double lon = std::atan2(d.x(), d.z());
    const double lat = std::asin(std::clamp(d.y(), -1.0, 1.0));
    Vec3 c;
    switch (spec.kind) {
    case TextureKind::Constant:
      c = Vec3(0.6, 0.55, 0.5);
      break;
    case TextureKind::Checker: {
      const int cu = static_cast<int>(
          std::floor((lon + kPi) / (2.0 * kPi) * spec.checker_longitude));
      const int cv = static_cast<int>(
          std::floor((lat + kPi / 2) / kPi * spec.checker_latitude));
      c = ((cu + cv) % 2 == 0) ? warm : cool;
      c *= 0.85 + 0.15 * std::cos(lon + 2.0 * lat);
      break;
    }
    case TextureKind::Smooth:
      c = Vec3(0.5 + 0.4 * std::sin(2.0 * lon) * std::cos(lat),
               0.5 + 0.4 * std::sin(3.0 * lat + 1.0),
               0.5 + 0.4 * std::cos(lon - lat));
      break;
    }
    if (spec.noise > 0.0)
      for (int k = 0; k < 3; ++k)
        c[k] += spec.noise * jitter(rng);
    colors.row(i) = c.cwiseMax(0.0).cwiseMin(1.0).transpose();
  }
  return colors;
}

double OrbitRig::focal() const {
  return 0.5 * width / std::tan(0.5 * deg2rad(fov_deg));
}

void OrbitRig::validate() const {
  if (azimuths < 2)
    throw Error(ErrorCode::InvalidConfig, "rig needs at least 2 azimuths");
  if (elevations_deg.empty())
    throw Error(ErrorCode::InvalidConfig, "rig needs an elevation");
  if (!(radius > 1.0))
    throw Error(ErrorCode::InvalidConfig, "rig radius must exceed 1");
  if (width < 1 || height < 1)
    throw Error(ErrorCode::InvalidConfig, "rig image size");
  if (!(fov_deg > 0.0 && fov_deg < 180.0))
    throw Error(ErrorCode::InvalidConfig, "rig field of view");
  for (double e : elevations_deg)
    if (!(std::abs(e) < 90.0))
      throw Error(ErrorCode::InvalidConfig, "elevation must be within (-90, 90)");
}

std::vector<Camera> make_orbit_cameras(const OrbitRig &rig) {
  rig.validate();
  const double f = rig.focal();
  std::vector<Camera> out;
  out.reserve(rig.frame_count());
  for (double elev : rig.elevations_deg) {
    const double e = deg2rad(elev);
    for (int a = 0; a < rig.azimuths; ++a) {
      const double az = 2.0 * kPi * a / rig.azimuths;
      const Vec3 eye = rig.radius * Vec3(std::cos(e) * std::sin(az), std::sin(e),
                                         std::cos(e) * std::cos(az));
      out.push_back(look_at(eye, Vec3::Zero(), Vec3::UnitY(), f, f,
                            0.5 * rig.width, 0.5 * rig.height, rig.width,
                            rig.height));
    }
  }
  return out;
}

void Panorama::validate() const {
  if (image.empty() || image.width() != 2 * image.height())
    throw Error(ErrorCode::InvalidConfig, "panorama must be 2:1");
}

Panorama make_panorama(int width, int height, std::uint64_t seed) {
  Panorama pano{Image(width, height)};
  pano.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  struct Octave {
    int cells_x, cells_y;
    double amp;
    std::vector<Vec3> lattice;
  };
  std::vector<Octave> octaves;
  for (int o = 0; o < 5; ++o) {
    Octave oc{8 << o, 4 << o, std::pow(0.55, o), {}};
    oc.lattice.resize(static_cast<size_t>(oc.cells_x) * (oc.cells_y + 1));
    for (Vec3 &c : oc.lattice)
      c = Vec3(unit(rng), unit(rng), unit(rng));
    octaves.push_back(std::move(oc));
  }
  auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };

  for (int y = 0; y < height; ++y) {
    const double v = (y + 0.5) / height; // 0 top, 1 bottom
    const Vec3 sky = (1.0 - v) * Vec3(0.55, 0.7, 0.9) + v * Vec3(0.45, 0.38, 0.3);
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) / width;
      Vec3 acc = Vec3::Zero();
      double norm = 0.0;
      for (const Octave &oc : octaves) {
        const double gx = u * oc.cells_x, gy = v * oc.cells_y;
        const int ix = static_cast<int>(std::floor(gx));
        const int iy = std::min(static_cast<int>(std::floor(gy)), oc.cells_y - 1);
        const double fx = smooth(gx - ix), fy = smooth(gy - iy);
        auto at = [&](int i, int j) -> const Vec3 & {
          return oc.lattice[static_cast<size_t>(j) * oc.cells_x +
                            ((i % oc.cells_x) + oc.cells_x) % oc.cells_x];
        };
        const Vec3 top = (1 - fx) * at(ix, iy) + fx * at(ix + 1, iy);
        const Vec3 bot = (1 - fx) * at(ix, iy + 1) + fx * at(ix + 1, iy + 1);
        acc += oc.amp * ((1 - fy) * top + fy * bot);
        norm += oc.amp;
      }
      pano.image.set_pixel(x, y, 0.45 * sky + 0.55 * acc / norm);
    }
  }
  return pano;
}

Vec2 panorama_coordinates(const Panorama &pano, const Vec3 &direction) {
  const Vec3 d = direction.normalized();
  const double lon = std::atan2(d.x(), d.z());
  const double lat = std::asin(std::clamp(d.y(), -1.0, 1.0));
  return {(lon + kPi) / (2.0 * kPi) * pano.image.width(),
          (0.5 * kPi - lat) / kPi * pano.image.height()};
}

Vec3 sample_panorama(const Panorama &pano, const Vec2 &uv) {
  const int w = pano.image.width(), h = pano.image.height();
  const double x = uv.x() - 0.5;
  const double y = std::clamp(uv.y(), 0.5, h - 0.5) - 0.5;
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = std::min(static_cast<int>(std::floor(y)), std::max(h - 2, 0));
  const double fx = x - x0, fy = y - y0;
  const int xa = ((x0 % w) + w) % w, xb = (xa + 1) % w;
  const int y1 = std::min(y0 + 1, h - 1);
  const Vec3 top = (1 - fx) * pano.image.pixel(xa, y0) + fx * pano.image.pixel(xb, y0);
  const Vec3 bot = (1 - fx) * pano.image.pixel(xa, y1) + fx * pano.image.pixel(xb, y1);
  return (1 - fy) * top + fy * bot;
}

Image crop_panorama(const Panorama &pano, const Camera &camera, double fov_deg) {
  if (!(fov_deg > 0.0 && fov_deg < 180.0))
    throw Error(ErrorCode::InvalidConfig, "crop field of view must be in (0, 180)");
  pano.validate();
  const double f = 0.5 * camera.width / std::tan(0.5 * deg2rad(fov_deg));
  const double cx = 0.5 * camera.width, cy = 0.5 * camera.height;
  const Mat3 rt = camera.R.transpose();
  Image out(camera.width, camera.height);
  for (int y = 0; y < camera.height; ++y)
    for (int x = 0; x < camera.width; ++x) {
      const Vec3 d = rt * Vec3((x + 0.5 - cx) / f, (y + 0.5 - cy) / f, 1.0);
      out.set_pixel(x, y, sample_panorama(pano, panorama_coordinates(pano, d)));
    }
  return out;
}

Image render(const TriangleMesh &mesh, const Camera &camera,
             const Image &background) {
  if (background.width() != camera.width || background.height() != camera.height)
    throw Error(ErrorCode::InvalidConfig, "background size != camera size");
  Image out = background;
  if (mesh.empty())
    return out;
  if (!mesh.has_colors())
    throw Error(ErrorCode::InvalidMesh, "render needs vertex colors");
  const RasterMaps maps = rasterize(mesh, camera);
  for (int y = 0; y < camera.height; ++y)
    for (int x = 0; x < camera.width; ++x) {
      const size_t i = maps.index(x, y);
      const int f = maps.face[i];
      if (f < 0)
        continue;
      Vec3 c = Vec3::Zero();
      for (int k = 0; k < 3; ++k)
        c += maps.bary[i][k] * mesh.colors.row(mesh.faces(f, k)).transpose();
      out.set_pixel(x, y, c);
    }
  return out;
}

ShapeState perturb_state(const ShapeState &state, const NoiseSpec &noise) {
  if (noise.sigma < 0.0 || noise.code_sigma < 0.0)
    throw Error(ErrorCode::InvalidConfig, "noise sigma must be >= 0");
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ShapeState out = state;
  Eigen::Matrix<double, 7, 1> theta = state.transform.to_vector();
  for (int i = 0; i < 7; ++i)
    theta[i] += noise.sigma * normal(rng);
  out.transform = Similarity::from_vector(theta);
  for (Eigen::Index i = 0; i < out.code.size(); ++i)
    out.code[i] += noise.code_sigma * normal(rng);
  return out;
}

Scene make_sequence(const LinearShapePrior &prior, const ShapeState &gt_state,
                    const SceneSpec &spec, const Panorama &pano) {
  Scene scene;
  scene.gt_state = gt_state;
  scene.gt_mesh = generate(prior, gt_state);
  scene.gt_mesh.colors = vertex_colors(prior.mean_mesh(), spec.texture);
  for (const Camera &cam : make_orbit_cameras(spec.rig)) {
    const Image bg = crop_panorama(pano, cam, spec.background_fov_deg);
    scene.frames.frames.push_back({render(scene.gt_mesh, cam, bg), cam});
  }
  scene.init_state = perturb_state(gt_state, spec.noise);
  return scene;
}

VecX sample_true_code(const LinearShapePrior &prior, const ShapeFamily &family,
                      std::uint64_t seed) {
  return encode(prior, family.sample(seed));
}

} // namespace photomesh
