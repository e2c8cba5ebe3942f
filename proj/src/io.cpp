#include "photomesh/io.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace photomesh {

namespace fs = std::filesystem;

namespace {

std::ifstream open_in(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path &path) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

template <typename T> T field(const Json &j, const char *key) {
  if (!j.contains(key))
    throw Error(ErrorCode::InvalidConfig, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception &e) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad key '") + key + "': " + e.what());
  }
}

Json vec_to_json(const VecX &v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VecX vec_from_json(const Json &j, const char *key, Eigen::Index expect = -1) {
  const auto v = field<std::vector<double>>(j, key);
  if (expect >= 0 && static_cast<Eigen::Index>(v.size()) != expect)
    throw Error(ErrorCode::InvalidConfig, std::string("wrong length for '") + key + "'");
  return Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

TriangleMesh read_obj(const fs::path &path) {
  std::ifstream in = open_in(path);
  std::vector<Vec3> verts, colors;
  std::vector<Vec3i> faces;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#')
      continue;
    if (tag == "v") {
      std::vector<double> vals;
      double x;
      while (ss >> x)
        vals.push_back(x);
      if (vals.size() != 3 && vals.size() != 6)
        throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) +
                                       ": vertex needs 3 or 6 values");
      verts.emplace_back(vals[0], vals[1], vals[2]);
      if (vals.size() == 6)
        colors.emplace_back(vals[3], vals[4], vals[5]);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ss >> tok) {
        int i = 0;
        try {
          i = std::stoi(tok.substr(0, tok.find('/')));
        } catch (const std::exception &) {
          throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) +
                                         ": bad face index '" + tok + "'");
        }
        idx.push_back(i < 0 ? static_cast<int>(verts.size()) + i : i - 1);
      }
      if (idx.size() != 3)
        throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) +
                                       ": only triangles are supported");
      faces.emplace_back(idx[0], idx[1], idx[2]);
    }
  }
  if (!colors.empty() && colors.size() != verts.size())
    throw Error(ErrorCode::Io, path.string() + ": colors on some vertices only");

  TriangleMesh mesh;
  mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i)
    mesh.vertices.row(i) = verts[i].transpose();
  mesh.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (size_t j = 0; j < faces.size(); ++j)
    mesh.faces.row(j) = faces[j].transpose();
  if (!colors.empty()) {
    mesh.colors.resize(static_cast<Eigen::Index>(colors.size()), 3);
    for (size_t i = 0; i < colors.size(); ++i)
      mesh.colors.row(i) = colors[i].transpose();
  }
  mesh.validate();
  return mesh;
}

void write_obj(const TriangleMesh &mesh, const fs::path &path) {
  std::unique_ptr<FILE, int (*)(FILE *)> f(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!f)
    throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    std::fprintf(f.get(), "v %.17g %.17g %.17g", mesh.vertices(i, 0),
                 mesh.vertices(i, 1), mesh.vertices(i, 2));
    if (mesh.has_colors())
      std::fprintf(f.get(), " %.17g %.17g %.17g", mesh.colors(i, 0),
                   mesh.colors(i, 1), mesh.colors(i, 2));
    std::fputc('\n', f.get());
  }
  for (int j = 0; j < mesh.num_faces(); ++j)
    std::fprintf(f.get(), "f %d %d %d\n", mesh.faces(j, 0) + 1,
                 mesh.faces(j, 1) + 1, mesh.faces(j, 2) + 1);
}

Json camera_to_json(const Camera &cam) {
  std::vector<double> r(9);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      r[3 * i + k] = cam.R(i, k);
  return {{"fx", cam.fx},     {"fy", cam.fy},         {"cx", cam.cx},
          {"cy", cam.cy},     {"R", r},               {"t", {cam.t.x(), cam.t.y(), cam.t.z()}},
          {"width", cam.width}, {"height", cam.height}};
}

Camera camera_from_json(const Json &j) {
  Camera cam;
  cam.fx = field<double>(j, "fx");
  cam.fy = field<double>(j, "fy");
  cam.cx = field<double>(j, "cx");
  cam.cy = field<double>(j, "cy");
  const VecX r = vec_from_json(j, "R", 9);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      cam.R(i, k) = r[3 * i + k];
  cam.t = vec_from_json(j, "t", 3);
  cam.width = field<int>(j, "width");
  cam.height = field<int>(j, "height");
  validate(cam);
  return cam;
}

std::vector<Camera> read_cameras(const fs::path &path) {
  const Json j = read_json(path);
  if (!j.is_array())
    throw Error(ErrorCode::InvalidConfig, path.string() + ": expected a list of cameras");
  std::vector<Camera> out;
  for (const Json &c : j)
    out.push_back(camera_from_json(c));
  return out;
}

void write_cameras(const std::vector<Camera> &cams, const fs::path &path) {
  Json j = Json::array();
  for (const Camera &c : cams)
    j.push_back(camera_to_json(c));
  write_json(j, path);
}

Json state_to_json(const ShapeState &state) {
  const Similarity &t = state.transform;
  return {{"code", vec_to_json(state.code)},
          {"s", t.s},
          {"omega", {t.omega.x(), t.omega.y(), t.omega.z()}},
          {"t", {t.t.x(), t.t.y(), t.t.z()}}};
}

ShapeState state_from_json(const Json &j) {
  ShapeState s;
  s.code = vec_from_json(j, "code");
  s.transform.s = field<double>(j, "s");
  s.transform.omega = vec_from_json(j, "omega", 3);
  s.transform.t = vec_from_json(j, "t", 3);
  return s;
}

Json prior_to_json(const LinearShapePrior &prior) {
  const TriangleMesh &m = prior.mean_mesh();
  const int n = m.num_vertices(), k = prior.code_size();
  std::vector<double> tmpl(m.vertices.data(), m.vertices.data() + m.vertices.size());
  std::vector<int> faces(m.faces.data(), m.faces.data() + m.faces.size());
  std::vector<double> basis;
  basis.reserve(static_cast<size_t>(3) * n * k);
  for (int r = 0; r < 3 * n; ++r)
    for (int c = 0; c < k; ++c)
      basis.push_back(prior.basis()(r, c));
  return {{"K", k},
          {"N", n},
          {"template", tmpl},
          {"faces", faces},
          {"basis", basis},
          {"singular_values", vec_to_json(prior.singular_values())}};
}

LinearShapePrior prior_from_json(const Json &j) {
  const int k = field<int>(j, "K"), n = field<int>(j, "N");
  const auto tmpl = field<std::vector<double>>(j, "template");
  const auto faces = field<std::vector<int>>(j, "faces");
  const auto basis = field<std::vector<double>>(j, "basis");
  if (k < 0 || n < 0 || tmpl.size() != static_cast<size_t>(3) * n ||
      faces.size() % 3 != 0 || basis.size() != static_cast<size_t>(3) * n * k)
    throw Error(ErrorCode::InvalidConfig, "prior arrays do not match K and N");
  TriangleMesh mesh;
  mesh.vertices = Eigen::Map<const Points>(tmpl.data(), n, 3);
  mesh.faces = Eigen::Map<const Faces>(faces.data(), static_cast<Eigen::Index>(faces.size() / 3), 3);
  mesh.validate();
  MatX b = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      basis.data(), 3 * n, k);
  return LinearShapePrior(std::move(mesh), std::move(b), vec_from_json(j, "singular_values", k));
}

Json report_to_json(const LossReport &r) {
  Json pairs = Json::array();
  for (const PairReport &p : r.pairs)
    pairs.push_back({{"a", p.a},
                     {"b", p.b},
                     {"loss", p.loss},
                     {"samples", p.samples},
                     {"out_of_bounds", p.out_of_bounds},
                     {"occluded", p.occluded}});
  return {{"iteration", r.iteration},
          {"total", r.total},
          {"photometric", r.photometric},
          {"code_term", r.code_term},
          {"scale_term", r.scale_term},
          {"lambda_code", r.lambda_code},
          {"lambda_scale", r.lambda_scale},
          {"no_visible_pairs", r.no_visible_pairs},
          {"pairs", pairs}};
}

LossReport report_from_json(const Json &j) {
  LossReport r;
  r.iteration = field<int>(j, "iteration");
  r.total = field<double>(j, "total");
  r.photometric = field<double>(j, "photometric");
  r.code_term = field<double>(j, "code_term");
  r.scale_term = field<double>(j, "scale_term");
  r.lambda_code = field<double>(j, "lambda_code");
  r.lambda_scale = field<double>(j, "lambda_scale");
  r.no_visible_pairs = field<int>(j, "no_visible_pairs");
  for (const Json &p : field<Json>(j, "pairs"))
    r.pairs.push_back({field<int>(p, "a"), field<int>(p, "b"), field<double>(p, "loss"),
                       field<int>(p, "samples"), field<int>(p, "out_of_bounds"),
                       field<int>(p, "occluded")});
  return r;
}

Json scene_spec_to_json(const SceneSpec &s) {
  return {{"rig",
           {{"azimuths", s.rig.azimuths},
            {"elevations_deg", s.rig.elevations_deg},
            {"radius", s.rig.radius},
            {"width", s.rig.width},
            {"height", s.rig.height},
            {"fov_deg", s.rig.fov_deg}}},
          {"texture",
           {{"kind", to_string(s.texture.kind)},
            {"checker_longitude", s.texture.checker_longitude},
            {"checker_latitude", s.texture.checker_latitude},
            {"noise", s.texture.noise},
            {"seed", s.texture.seed}}},
          {"noise",
           {{"sigma", s.noise.sigma}, {"code_sigma", s.noise.code_sigma}, {"seed", s.noise.seed}}},
          {"panorama_height", s.panorama_height},
          {"background_fov_deg", s.background_fov_deg},
          {"seed", s.seed}};
}

SceneSpec scene_spec_from_json(const Json &j) {
  SceneSpec s;
  const Json rig = field<Json>(j, "rig");
  s.rig.azimuths = field<int>(rig, "azimuths");
  s.rig.elevations_deg = field<std::vector<double>>(rig, "elevations_deg");
  s.rig.radius = field<double>(rig, "radius");
  s.rig.width = field<int>(rig, "width");
  s.rig.height = field<int>(rig, "height");
  s.rig.fov_deg = field<double>(rig, "fov_deg");
  const Json tex = field<Json>(j, "texture");
  s.texture.kind = parse_texture(field<std::string>(tex, "kind"));
  s.texture.checker_longitude = field<int>(tex, "checker_longitude");
  s.texture.checker_latitude = field<int>(tex, "checker_latitude");
  s.texture.noise = field<double>(tex, "noise");
  s.texture.seed = field<std::uint64_t>(tex, "seed");
  const Json noise = field<Json>(j, "noise");
  s.noise.sigma = field<double>(noise, "sigma");
  s.noise.code_sigma = field<double>(noise, "code_sigma");
  s.noise.seed = field<std::uint64_t>(noise, "seed");
  s.panorama_height = field<int>(j, "panorama_height");
  s.background_fov_deg = field<double>(j, "background_fov_deg");
  s.seed = field<std::uint64_t>(j, "seed");
  return s;
}

Json read_json(const fs::path &path) {
  std::ifstream in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error &e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
}

void write_json(const Json &j, const fs::path &path) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_scene_bundle(const Scene &scene, const SceneSpec &spec,
                        const fs::path &dir) {
  fs::create_directories(dir);
  for (int i = 0; i < scene.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03d.png", i);
    write_png(scene.frames.frames[i].image, dir / name);
  }
  write_cameras(scene.frames.cameras(), dir / "cameras.json");
  write_obj(scene.gt_mesh, dir / "gt_mesh.obj");
  write_json(state_to_json(scene.gt_state), dir / "gt_state.json");
  write_json(state_to_json(scene.init_state), dir / "init_state.json");
  write_json(scene_spec_to_json(spec), dir / "spec.json");
}

SceneBundle read_scene_bundle(const fs::path &dir) {
  SceneBundle b;
  const std::vector<Camera> cams = read_cameras(dir / "cameras.json");
  for (size_t i = 0; i < cams.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.png", i);
    b.frames.frames.push_back({read_png(dir / name), cams[i]});
  }
  b.gt_mesh = read_obj(dir / "gt_mesh.obj");
  b.gt_state = state_from_json(read_json(dir / "gt_state.json"));
  b.init_state = state_from_json(read_json(dir / "init_state.json"));
  b.spec = scene_spec_from_json(read_json(dir / "spec.json"));
  return b;
}

} // namespace photomesh
