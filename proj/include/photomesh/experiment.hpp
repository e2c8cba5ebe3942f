#pragma once

#include "photomesh/evaluation.hpp"
#include "photomesh/optimizer.hpp"
#include "photomesh/synthetic.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace photomesh {

struct MetricsConfig {
  int samples = 10000;
  std::uint64_t seed = 0;
  std::vector<int> frame_distances{1, 2, 4};
  int reprojection_stride = 1;
};

struct Metrics {
  double eta_pred_to_gt = 0.0;
  double eta_gt_to_pred = 0.0;
  std::map<int, double> reprojection; // frame distance -> mean pixels, NaN if none
  double depth_error = 0.0;
};

Metrics evaluate_mesh(const TriangleMesh &mesh, const TriangleMesh &gt,
                      const std::vector<Camera> &cameras,
                      const MetricsConfig &config);

/// One noise trial: fresh true shape and scene, perturbed similarity, optimize.
struct TrialConfig {
  SceneSpec scene; // noise.sigma and seeds are overwritten per trial
  OptimConfig optim;
  MetricsConfig metrics;
};

/// Defaults of the noise-sweep benchmark: 24x1 orbit at 128x128, checker.
TrialConfig benchmark_trial_config();

struct TrialResult {
  double sigma = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  Metrics before, after;
  double final_scale = 1.0; // exp(s)
  double final_loss = 0.0;
};

TrialResult run_trial(const LinearShapePrior &prior, const ShapeFamily &family,
                      double sigma, std::uint64_t seed, const TrialConfig &config);

struct SweepRow {
  double sigma = 0.0;
  int runs = 0;
  int failures = 0;
  double eta_before_mean = 0.0, eta_before_std = 0.0;
  double eta_after_mean = 0.0, eta_after_std = 0.0;
  int improved = 0; // trials with eta_after < eta_before
};

struct SweepResult {
  std::vector<TrialResult> trials;
  std::vector<SweepRow> rows;
};

/// Seeds are base_seed + i. Trials run on `workers` threads; results are
/// stored by index, so output does not depend on scheduling.
SweepResult run_sweep(const LinearShapePrior &prior, const ShapeFamily &family,
                      const std::vector<double> &sigmas, int seeds,
                      std::uint64_t base_seed, const TrialConfig &config,
                      int workers = 1);

/// Prior used by the benchmark: fitted on family members disjoint from the
/// seeds used for true shapes.
LinearShapePrior benchmark_prior(const ShapeFamily &family, int k,
                                 int training_meshes = 64,
                                 std::uint64_t seed = 1000003);

} // namespace photomesh
