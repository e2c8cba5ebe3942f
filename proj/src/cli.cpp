#include "photomesh/cli.hpp"

#include "photomesh/experiment.hpp"
#include "photomesh/gradient_check.hpp"
#include "photomesh/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace photomesh {

namespace {

void require_file(const fs::path &p, const std::string &what) {
  if (!fs::is_regular_file(p))
    throw Error(ErrorCode::InvalidConfig, "missing " + what + ": " + p.string());
}

void require_dir(const fs::path &p, const std::string &what) {
  if (!fs::is_directory(p))
    throw Error(ErrorCode::InvalidConfig, "missing " + what + ": " + p.string());
}

void add_config_option(CLI::App *app, std::string &path) {
  app->add_option("--config", path, "JSON object of flag values; flags win");
}

std::string config_scalar(const std::string &key, const Json &v) {
  if (v.is_string())
    return v.get<std::string>();
  if (v.is_boolean())
    return v.get<bool>() ? "true" : "false";
  if (v.is_number())
    return v.dump(); // round-trip exact
  throw Error(ErrorCode::InvalidConfig, "config key '" + key + "' must be a scalar or a list");
}

// Keys are long flag names without dashes. A key fills its option only when
// neither the command line nor the environment already did.
void apply_config(CLI::App *app, const std::string &path) {
  if (path.empty())
    return;
  require_file(path, "config file");
  const Json j = read_json(path);
  if (!j.is_object())
    throw Error(ErrorCode::InvalidConfig, path + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    CLI::Option *opt = it.key() == "config" ? nullptr : app->get_option_no_throw("--" + it.key());
    if (!opt)
      throw Error(ErrorCode::InvalidConfig, path + ": unknown key '" + it.key() + "'");
    if (opt->count() > 0)
      continue;
    std::vector<std::string> values;
    if (it->is_array())
      for (const Json &v : *it)
        values.push_back(config_scalar(it.key(), v));
    else
      values.push_back(config_scalar(it.key(), *it));
    try {
      opt->add_result(values);
      opt->run_callback();
    } catch (const CLI::Error &e) {
      throw Error(ErrorCode::InvalidConfig, path + ": key '" + it.key() + "': " + e.what());
    }
  }
}

// Rig, texture and noise flags shared by make-scene and noise-sweep.
void add_scene_options(CLI::App *app, SceneSpec &spec, std::string &texture) {
  app->add_option("--azimuths", spec.rig.azimuths, "Orbit azimuth count")->capture_default_str();
  app->add_option("--elevations", spec.rig.elevations_deg, "Elevations in degrees")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--radius", spec.rig.radius)->capture_default_str();
  app->add_option("--width", spec.rig.width)->capture_default_str();
  app->add_option("--height", spec.rig.height)->capture_default_str();
  app->add_option("--fov", spec.rig.fov_deg, "Horizontal fov of object cameras")
      ->capture_default_str();
  app->add_option("--texture", texture, "checker | smooth | constant")->capture_default_str();
  app->add_option("--checker-longitude", spec.texture.checker_longitude)->capture_default_str();
  app->add_option("--checker-latitude", spec.texture.checker_latitude)->capture_default_str();
  app->add_option("--texture-noise", spec.texture.noise)->capture_default_str();
  app->add_option("--code-sigma", spec.noise.code_sigma, "Noise on the initial code")
      ->capture_default_str();
  app->add_option("--panorama-height", spec.panorama_height)->capture_default_str();
  app->add_option("--background-fov", spec.background_fov_deg)->capture_default_str();
}

struct OptimFlags {
  std::string pairs;
  std::string sampling = "virtual";
  std::string point_model = "barycentric";
};

void add_optim_options(CLI::App *app, OptimConfig &c, OptimFlags &f) {
  f.pairs = std::to_string(c.pairs_per_iteration);
  app->add_option("--iters", c.iterations, "Adam iterations")->capture_default_str();
  app->add_option("--lr", c.learning_rate)->capture_default_str();
  app->add_option("--lambda-code", c.lambda_code)->capture_default_str();
  app->add_option("--lambda-scale", c.lambda_scale)->capture_default_str();
  app->add_option("--pairs", f.pairs, "Pairs per iteration, or 'all'")->capture_default_str();
  app->add_option("--max-gap", c.max_frame_gap, "Largest frame distance of random pairs")
      ->capture_default_str();
  app->add_option("--sampling", f.sampling, "virtual | a | b")->capture_default_str();
  app->add_option("--point-model", f.point_model, "barycentric | ray-cast")
      ->capture_default_str();
  app->add_option("--threads", c.threads, "Worker threads")
      ->envname("PHOTOMESH_THREADS")
      ->capture_default_str();
}

void finish_optim(OptimConfig &c, const OptimFlags &f) {
  if (f.pairs == "all") {
    c.pairs_per_iteration = 0;
  } else {
    try {
      size_t used = 0;
      c.pairs_per_iteration = std::stoi(f.pairs, &used);
      if (used != f.pairs.size())
        throw std::invalid_argument(f.pairs);
    } catch (const std::exception &) {
      throw Error(ErrorCode::InvalidConfig, "--pairs expects a count or 'all'");
    }
  }
  if (f.sampling == "virtual")
    c.photometric.sampling = SamplingView::Virtual;
  else if (f.sampling == "a")
    c.photometric.sampling = SamplingView::ViewA;
  else if (f.sampling == "b")
    c.photometric.sampling = SamplingView::ViewB;
  else
    throw Error(ErrorCode::InvalidConfig, "--sampling expects virtual, a or b");
  if (f.point_model == "barycentric")
    c.photometric.point_model = PointModel::Barycentric;
  else if (f.point_model == "ray-cast")
    c.photometric.point_model = PointModel::RayCast;
  else
    throw Error(ErrorCode::InvalidConfig, "--point-model expects barycentric or ray-cast");
  c.validate();
}

// Family whose topology matches a prior's template.
ShapeFamily family_for(const LinearShapePrior &prior) {
  for (int s = 0; s <= 6; ++s) {
    ShapeFamily f{s};
    if (f.base().num_vertices() == prior.num_vertices())
      return f;
  }
  throw Error(ErrorCode::TopologyMismatch, "prior is not an icosphere-family prior");
}

LinearShapePrior load_prior(const fs::path &p) {
  require_file(p, "prior");
  return prior_from_json(read_json(p));
}

// ---- make-scene

struct MakeSceneArgs {
  fs::path out;
  fs::path prior;
  fs::path panorama;
  int k = 16;
  SceneSpec spec;
  std::string texture = "checker";
  double sigma = 0.0;
};

void cmd_make_scene(MakeSceneArgs a, std::ostream &out) {
  a.spec.texture.kind = parse_texture(a.texture);
  a.spec.rig.validate();
  a.spec.noise.sigma = a.sigma;
  a.spec.noise.seed = a.spec.seed;
  a.spec.texture.seed = a.spec.seed;

  const LinearShapePrior prior =
      a.prior.empty() ? benchmark_prior(ShapeFamily{}, a.k) : load_prior(a.prior);
  ShapeState gt;
  gt.code = sample_true_code(prior, family_for(prior), a.spec.seed);
  Panorama pano;
  if (a.panorama.empty()) {
    pano = make_panorama(2 * a.spec.panorama_height, a.spec.panorama_height, a.spec.seed + 101);
  } else {
    require_file(a.panorama, "panorama");
    pano.image = read_png(a.panorama);
    pano.validate();
    a.spec.panorama_height = pano.image.height();
  }
  const Scene scene = make_sequence(prior, gt, a.spec, pano);
  write_scene_bundle(scene, a.spec, a.out);
  write_json(prior_to_json(prior), a.out / "prior.json");
  out << "wrote " << scene.frames.size() << " frames to " << a.out.string() << '\n';
}

// ---- fit-prior

struct FitPriorArgs {
  fs::path out;
  std::vector<std::string> meshes;
  int k = 16;
  int count = 64;
  int subdivisions = 3;
  std::uint64_t seed = 1000003;
};

void cmd_fit_prior(const FitPriorArgs &a, std::ostream &out) {
  std::vector<TriangleMesh> meshes;
  if (a.meshes.empty()) {
    meshes = ShapeFamily{a.subdivisions}.sample_many(a.count, a.seed);
  } else {
    for (const std::string &m : a.meshes) {
      require_file(m, "mesh");
      meshes.push_back(read_obj(m));
    }
  }
  const LinearShapePrior prior = fit_prior(meshes, a.k);
  write_json(prior_to_json(prior), a.out);
  out << "fitted K=" << prior.code_size() << " on " << meshes.size() << " meshes ("
      << prior.num_vertices() << " vertices)\n";
}

// ---- optimize

struct OptimizeArgs {
  fs::path scene;
  fs::path prior;
  fs::path out;
  OptimConfig config;
  OptimFlags flags;
};

void cmd_optimize(OptimizeArgs a, std::ostream &out) {
  finish_optim(a.config, a.flags);
  require_dir(a.scene, "scene directory");
  require_file(a.scene / "cameras.json", "cameras.json");
  const fs::path prior_path = a.prior.empty() ? a.scene / "prior.json" : a.prior;
  const LinearShapePrior prior = load_prior(prior_path);
  const SceneBundle bundle = read_scene_bundle(a.scene);

  fs::create_directories(a.out);
  std::ofstream trace(a.out / "trace.jsonl");
  if (!trace)
    throw Error(ErrorCode::Io, "cannot write " + (a.out / "trace.jsonl").string());
  const OptimResult result =
      optimize(prior, bundle.frames, bundle.init_state, bundle.init_state.code, a.config,
               [&](const LossReport &r) { trace << report_to_json(r).dump() << '\n'; });
  trace.close();
  if (!trace)
    throw Error(ErrorCode::Io, "failed writing trace.jsonl");

  write_obj(generate(prior, result.state), a.out / "out_mesh.obj");
  write_json(state_to_json(result.state), a.out / "out_state.json");
  if (!result.trace.empty()) {
    const LossReport &first = result.trace.front(), &last = result.trace.back();
    out << "loss " << first.total << " -> " << last.total << " over "
        << result.trace.size() << " iterations\n";
  } else {
    out << "0 iterations; state unchanged\n";
  }
}

// ---- evaluate

struct EvaluateArgs {
  fs::path mesh;
  fs::path gt;
  fs::path cameras;
  fs::path scene;
  fs::path out;
  MetricsConfig metrics;
};

Json metrics_to_json(const Metrics &m, const MetricsConfig &c) {
  Json reproj = Json::object();
  for (const auto &[d, v] : m.reprojection)
    reproj[std::to_string(d)] = std::isfinite(v) ? Json(v) : Json(nullptr);
  return {{"eta_pred_to_gt", m.eta_pred_to_gt},
          {"eta_gt_to_pred", m.eta_gt_to_pred},
          {"reproj", reproj},
          {"depth_error", m.depth_error},
          {"sample_count", c.samples},
          {"seed", c.seed},
          {"eta_scale", 1}};
}

void cmd_evaluate(EvaluateArgs a, std::ostream &out) {
  if (!a.scene.empty()) {
    if (a.gt.empty())
      a.gt = a.scene / "gt_mesh.obj";
    if (a.cameras.empty())
      a.cameras = a.scene / "cameras.json";
  }
  if (a.mesh.empty() || a.gt.empty() || a.cameras.empty())
    throw Error(ErrorCode::InvalidConfig, "need --mesh plus --gt/--cameras or --scene");
  require_file(a.mesh, "mesh");
  require_file(a.gt, "ground-truth mesh");
  require_file(a.cameras, "cameras.json");
  if (a.metrics.samples < 1)
    throw Error(ErrorCode::InvalidConfig, "--samples must be >= 1");

  const Metrics m = evaluate_mesh(read_obj(a.mesh), read_obj(a.gt), read_cameras(a.cameras),
                                  a.metrics);
  const Json j = metrics_to_json(m, a.metrics);
  if (!a.out.empty())
    write_json(j, a.out);
  out << j.dump(2) << '\n';
}

// ---- noise-sweep

struct SweepArgs {
  fs::path out;
  fs::path prior;
  int k = 16;
  std::vector<double> sigmas{0.03, 0.06, 0.12};
  int seeds = 10;
  std::uint64_t seed = 0;
  int workers = 1;
  TrialConfig trial = benchmark_trial_config();
  std::string texture = "checker";
  OptimFlags flags;
};

void cmd_noise_sweep(SweepArgs a, std::ostream &out) {
  finish_optim(a.trial.optim, a.flags);
  a.trial.scene.texture.kind = parse_texture(a.texture);
  a.trial.scene.rig.validate();
  if (a.seeds < 1 || a.sigmas.empty())
    throw Error(ErrorCode::InvalidConfig, "need at least one sigma and one seed");
  if (a.trial.metrics.samples < 1)
    throw Error(ErrorCode::InvalidConfig, "--samples must be >= 1");

  const LinearShapePrior prior =
      a.prior.empty() ? benchmark_prior(ShapeFamily{}, a.k) : load_prior(a.prior);
  const SweepResult sweep = run_sweep(prior, family_for(prior), a.sigmas, a.seeds, a.seed,
                                      a.trial, a.workers);

  fs::create_directories(a.out);
  std::ofstream csv(a.out / "sweep.csv");
  if (!csv)
    throw Error(ErrorCode::Io, "cannot write " + (a.out / "sweep.csv").string());
  csv << "sigma,seed,ok,eta_before,eta_after,eta_gt_to_pred_before,eta_gt_to_pred_after";
  for (int d : a.trial.metrics.frame_distances)
    csv << ",reproj_d" << d << "_before,reproj_d" << d << "_after";
  csv << ",depth_before,depth_after,final_scale,error\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const TrialResult &t : sweep.trials) {
    csv << num(t.sigma) << ',' << t.seed << ',' << (t.ok ? 1 : 0) << ','
        << num(t.before.eta_pred_to_gt) << ',' << num(t.after.eta_pred_to_gt) << ','
        << num(t.before.eta_gt_to_pred) << ',' << num(t.after.eta_gt_to_pred);
    for (int d : a.trial.metrics.frame_distances) {
      const auto b = t.before.reprojection.find(d), f = t.after.reprojection.find(d);
      csv << ',' << num(b == t.before.reprojection.end() ? NAN : b->second) << ','
          << num(f == t.after.reprojection.end() ? NAN : f->second);
    }
    std::string err = t.error;
    std::replace(err.begin(), err.end(), ',', ';');
    csv << ',' << num(t.before.depth_error) << ',' << num(t.after.depth_error) << ','
        << num(t.final_scale) << ',' << err << '\n';
  }

  Json rows = Json::array();
  out << "sigma   runs  fail  improved  eta_before          eta_after\n";
  for (const SweepRow &r : sweep.rows) {
    rows.push_back({{"sigma", r.sigma},
                    {"runs", r.runs},
                    {"failures", r.failures},
                    {"improved", r.improved},
                    {"eta_before_mean", r.eta_before_mean},
                    {"eta_before_std", r.eta_before_std},
                    {"eta_after_mean", r.eta_after_mean},
                    {"eta_after_std", r.eta_after_std}});
    std::snprintf(buf, sizeof buf, "%-7.3f %4d  %4d  %8d  ", r.sigma, r.runs, r.failures,
                  r.improved);
    out << buf;
    std::snprintf(buf, sizeof buf, "%.4f +- %.4f   %.4f +- %.4f\n", r.eta_before_mean,
                  r.eta_before_std, r.eta_after_mean, r.eta_after_std);
    out << buf;
  }
  write_json({{"rows", rows},
              {"seeds", a.seeds},
              {"base_seed", a.seed},
              {"texture", a.texture},
              {"eta_scale", 1}},
             a.out / "summary.json");
}

// ---- check-gradients

int cmd_check_gradients(const GradientCheckOptions &opt, std::ostream &out) {
  bool all = true;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-40s %6s %12s %10s  %s\n", "check", "cases", "max rel err",
                "tolerance", "result");
  out << buf;
  for (const GradientCheckRow &r : run_gradient_checks(opt)) {
    std::snprintf(buf, sizeof buf, "%-40s %6d %12.3e %10.0e  %s\n", r.name.c_str(), r.cases,
                  r.max_relative_error, r.tolerance, r.passed ? "PASS" : "FAIL");
    out << buf;
    all = all && r.passed;
  }
  return all ? kExitOk : kExitFailure;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
  case ErrorCode::NonFiniteLoss:
    return kExitNonFinite;
  case ErrorCode::InvalidConfig:
    return kExitConfig;
  case ErrorCode::Io:
    return kExitIo;
  default:
    return kExitFailure;
  }
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Photometric mesh alignment toolkit", "photomesh"};
  app.require_subcommand(1);
  std::string config_path;

  MakeSceneArgs make;
  auto *make_cmd = app.add_subcommand("make-scene", "Render a synthetic orbit sequence");
  add_config_option(make_cmd, config_path);
  make_cmd->add_option("--out", make.out, "Bundle directory")->required();
  make_cmd->add_option("--prior", make.prior, "Prior JSON (default: fit a fresh one)");
  make_cmd->add_option("--panorama", make.panorama,
                       "Equirectangular 2:1 PNG background (default: procedural)");
  make_cmd->add_option("--k", make.k, "Code size when fitting a fresh prior")
      ->capture_default_str();
  make_cmd->add_option("--seed", make.spec.seed)->capture_default_str();
  make_cmd->add_option("--sigma", make.sigma, "Noise on the similarity parameters")
      ->capture_default_str();
  add_scene_options(make_cmd, make.spec, make.texture);

  FitPriorArgs fit;
  auto *fit_cmd = app.add_subcommand("fit-prior", "Fit a linear shape prior");
  add_config_option(fit_cmd, config_path);
  fit_cmd->add_option("--out", fit.out, "Prior JSON")->required();
  fit_cmd->add_option("meshes", fit.meshes, "OBJ meshes (default: procedural family)");
  fit_cmd->add_option("--k", fit.k)->capture_default_str();
  fit_cmd->add_option("--count", fit.count, "Procedural training meshes")->capture_default_str();
  fit_cmd->add_option("--subdivisions", fit.subdivisions)->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed)->capture_default_str();

  OptimizeArgs opt;
  auto *opt_cmd = app.add_subcommand("optimize", "Align the prior to a scene bundle");
  add_config_option(opt_cmd, config_path);
  opt_cmd->add_option("--scene", opt.scene, "Scene bundle directory")->required();
  opt_cmd->add_option("--prior", opt.prior, "Prior JSON (default: <scene>/prior.json)");
  opt_cmd->add_option("--out", opt.out, "Output directory")->required();
  opt_cmd->add_option("--seed", opt.config.seed)->capture_default_str();
  add_optim_options(opt_cmd, opt.config, opt.flags);

  EvaluateArgs eval;
  auto *eval_cmd = app.add_subcommand("evaluate", "Metrics of a mesh against ground truth");
  add_config_option(eval_cmd, config_path);
  eval_cmd->add_option("--mesh", eval.mesh, "Predicted mesh OBJ")->required();
  eval_cmd->add_option("--gt", eval.gt, "Ground-truth mesh OBJ");
  eval_cmd->add_option("--cameras", eval.cameras, "cameras.json");
  eval_cmd->add_option("--scene", eval.scene, "Take --gt and --cameras from a bundle");
  eval_cmd->add_option("--out", eval.out, "Metrics JSON");
  eval_cmd->add_option("--samples", eval.metrics.samples)->capture_default_str();
  eval_cmd->add_option("--seed", eval.metrics.seed)->capture_default_str();
  eval_cmd->add_option("--distances", eval.metrics.frame_distances)
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd->add_option("--stride", eval.metrics.reprojection_stride)->capture_default_str();

  SweepArgs sweep;
  auto *sweep_cmd = app.add_subcommand("noise-sweep", "Noise robustness experiment");
  add_config_option(sweep_cmd, config_path);
  sweep_cmd->add_option("--out", sweep.out, "Output directory")->required();
  sweep_cmd->add_option("--prior", sweep.prior, "Prior JSON (default: fit a fresh one)");
  sweep_cmd->add_option("--k", sweep.k)->capture_default_str();
  sweep_cmd->add_option("--sigma", sweep.sigmas, "Noise levels")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--seeds", sweep.seeds, "Trials per noise level")->capture_default_str();
  sweep_cmd->add_option("--seed", sweep.seed, "First trial seed")->capture_default_str();
  sweep_cmd->add_option("--workers", sweep.workers, "Trials run in parallel")
      ->capture_default_str();
  sweep_cmd->add_option("--samples", sweep.trial.metrics.samples)->capture_default_str();
  sweep_cmd->add_option("--stride", sweep.trial.metrics.reprojection_stride)
      ->capture_default_str();
  add_scene_options(sweep_cmd, sweep.trial.scene, sweep.texture);
  add_optim_options(sweep_cmd, sweep.trial.optim, sweep.flags);

  GradientCheckOptions grad;
  auto *grad_cmd = app.add_subcommand("check-gradients", "Finite-difference gradient suite");
  add_config_option(grad_cmd, config_path);
  grad_cmd->add_option("--cases", grad.cases)->capture_default_str();
  grad_cmd->add_option("--seed", grad.seed)->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    apply_config(app.get_subcommands().front(), config_path);
    if (*make_cmd)
      cmd_make_scene(make, out);
    else if (*fit_cmd)
      cmd_fit_prior(fit, out);
    else if (*opt_cmd)
      cmd_optimize(opt, out);
    else if (*eval_cmd)
      cmd_evaluate(eval, out);
    else if (*sweep_cmd)
      cmd_noise_sweep(sweep, out);
    else if (*grad_cmd)
      return cmd_check_gradients(grad, out);
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error &e) {
    err << "error (io): " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int run_cli(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

} // namespace photomesh
