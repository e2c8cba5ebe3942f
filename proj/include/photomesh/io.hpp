#pragma once

#include "photomesh/optimizer.hpp"
#include "photomesh/synthetic.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace photomesh {

using Json = nlohmann::json;

/// Wavefront OBJ with "v x y z [r g b]" and triangular "f" records.
TriangleMesh read_obj(const std::filesystem::path &path);
void write_obj(const TriangleMesh &mesh, const std::filesystem::path &path);

Json camera_to_json(const Camera &cam);
Camera camera_from_json(const Json &j);
std::vector<Camera> read_cameras(const std::filesystem::path &path);
void write_cameras(const std::vector<Camera> &cams,
                   const std::filesystem::path &path);

Json state_to_json(const ShapeState &state);
ShapeState state_from_json(const Json &j);

/// {K, N, template, faces, basis (3N x K row-major), singular_values}.
Json prior_to_json(const LinearShapePrior &prior);
LinearShapePrior prior_from_json(const Json &j);

Json report_to_json(const LossReport &report);
LossReport report_from_json(const Json &j);

Json scene_spec_to_json(const SceneSpec &spec);
SceneSpec scene_spec_from_json(const Json &j);

Json read_json(const std::filesystem::path &path);
void write_json(const Json &j, const std::filesystem::path &path);

/// On-disk scene: frame_%03d.png, cameras.json, gt_mesh.obj, gt_state.json,
/// init_state.json and spec.json.
void write_scene_bundle(const Scene &scene, const SceneSpec &spec,
                        const std::filesystem::path &dir);

struct SceneBundle {
  FrameSet frames;
  TriangleMesh gt_mesh;
  ShapeState gt_state;
  ShapeState init_state;
  SceneSpec spec;
};

SceneBundle read_scene_bundle(const std::filesystem::path &dir);

} // namespace photomesh
