#include "photomesh/experiment.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace photomesh {

Metrics evaluate_mesh(const TriangleMesh &mesh, const TriangleMesh &gt,
                      const std::vector<Camera> &cameras,
                      const MetricsConfig &config) {
  Metrics m;
  const PointSet pred = sample_mesh_surface(mesh, config.samples, config.seed);
  const PointSet truth = sample_mesh_surface(gt, config.samples, config.seed);
  m.eta_pred_to_gt = point_set_error(pred, truth);
  m.eta_gt_to_pred = point_set_error(truth, pred);
  for (int d : config.frame_distances) {
    try {
      m.reprojection[d] =
          reprojection_error(mesh, gt, cameras, d, config.reprojection_stride).mean_pixels;
    } catch (const Error &e) {
      // Frames that far apart may share no visible surface.
      if (e.code() != ErrorCode::NoVisibleSamples)
        throw;
      m.reprojection[d] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  m.depth_error = depth_error(mesh, gt, cameras).mean;
  return m;
}

TrialConfig benchmark_trial_config() {
  TrialConfig c;
  c.scene.rig.azimuths = 24;
  c.scene.rig.elevations_deg = {0.0};
  c.scene.rig.width = c.scene.rig.height = 128;
  c.scene.texture.kind = TextureKind::Checker;
  c.scene.panorama_height = 256;
  c.metrics.samples = 5000;
  c.metrics.reprojection_stride = 2;
  return c;
}

TrialResult run_trial(const LinearShapePrior &prior, const ShapeFamily &family,
                      double sigma, std::uint64_t seed, const TrialConfig &config) {
  TrialResult r;
  r.sigma = sigma;
  r.seed = seed;
  try {
    SceneSpec spec = config.scene;
    spec.seed = seed;
    spec.noise.sigma = sigma;
    spec.noise.seed = seed * 7919 + 17;
    spec.texture.seed = seed;

    ShapeState gt;
    gt.code = sample_true_code(prior, family, seed);
    const Panorama pano =
        make_panorama(2 * spec.panorama_height, spec.panorama_height, seed + 101);
    const Scene scene = make_sequence(prior, gt, spec, pano);
    const std::vector<Camera> cams = scene.frames.cameras();

    MetricsConfig mc = config.metrics;
    mc.seed = seed;
    r.before = evaluate_mesh(generate(prior, scene.init_state), scene.gt_mesh, cams, mc);

    OptimConfig oc = config.optim;
    oc.seed = seed;
    const OptimResult opt =
        optimize(prior, scene.frames, scene.init_state, scene.init_state.code, oc);
    r.after = evaluate_mesh(generate(prior, opt.state), scene.gt_mesh, cams, mc);
    r.final_scale = std::exp(opt.state.transform.s);
    r.final_loss = opt.trace.empty() ? 0.0 : opt.trace.back().total;
    r.ok = true;
  } catch (const std::exception &e) {
    r.error = e.what();
  }
  return r;
}

namespace {

void mean_std(const std::vector<double> &v, double &mean, double &sd) {
  mean = sd = 0.0;
  if (v.empty())
    return;
  for (double x : v)
    mean += x;
  mean /= v.size();
  for (double x : v)
    sd += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(sd / (v.size() - 1)) : 0.0;
}

} // namespace

SweepResult run_sweep(const LinearShapePrior &prior, const ShapeFamily &family,
                      const std::vector<double> &sigmas, int seeds,
                      std::uint64_t base_seed, const TrialConfig &config,
                      int workers) {
  SweepResult out;
  const size_t total = sigmas.size() * static_cast<size_t>(std::max(seeds, 0));
  out.trials.resize(total);
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < total; i = next++)
      out.trials[i] = run_trial(prior, family, sigmas[i / seeds],
                                base_seed + i % seeds, config);
  };
  workers = std::clamp(workers, 1, static_cast<int>(std::max<size_t>(total, 1)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back(work);
    for (auto &t : pool)
      t.join();
  }

  for (size_t s = 0; s < sigmas.size(); ++s) {
    SweepRow row;
    row.sigma = sigmas[s];
    std::vector<double> before, after;
    for (int k = 0; k < seeds; ++k) {
      const TrialResult &t = out.trials[s * seeds + k];
      ++row.runs;
      if (!t.ok) {
        ++row.failures;
        continue;
      }
      before.push_back(t.before.eta_pred_to_gt);
      after.push_back(t.after.eta_pred_to_gt);
      if (t.after.eta_pred_to_gt < t.before.eta_pred_to_gt)
        ++row.improved;
    }
    mean_std(before, row.eta_before_mean, row.eta_before_std);
    mean_std(after, row.eta_after_mean, row.eta_after_std);
    out.rows.push_back(row);
  }
  return out;
}

LinearShapePrior benchmark_prior(const ShapeFamily &family, int k,
                                 int training_meshes, std::uint64_t seed) {
  return fit_prior(family.sample_many(training_meshes, seed), k);
}

} // namespace photomesh
