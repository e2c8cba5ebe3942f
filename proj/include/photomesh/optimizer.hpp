#pragma once

#include "photomesh/photometric.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace photomesh {

struct OptimConfig {
  double learning_rate = 0.003;
  int iterations = 100;
  double lambda_code = 0.05;
  double lambda_scale = 0.02;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  /// Frame pairs per iteration; 0 means every unordered pair.
  int pairs_per_iteration = 8;
  /// Largest index distance of a randomly drawn pair; 0 means unbounded.
  int max_frame_gap = 3;
  int threads = 1;
  PhotometricOptions photometric;

  void validate() const;
};

struct PairReport {
  int a = 0, b = 0;
  double loss = 0.0;
  int samples = 0;
  int out_of_bounds = 0;
  int occluded = 0;
};

/// Loss decomposition for one iteration, evaluated at the pre-update state.
struct LossReport {
  int iteration = 0;
  double total = 0.0;
  double photometric = 0.0;
  double code_term = 0.0;   // L_code, unweighted
  double scale_term = 0.0;  // L_scale, unweighted
  double lambda_code = 0.0;
  double lambda_scale = 0.0;
  int no_visible_pairs = 0;
  std::vector<PairReport> pairs;
};

/// Per-coordinate Adam with bias correction.
class Adam {
public:
  Adam(int size, double learning_rate, double beta1, double beta2,
       double epsilon);

  /// Returns x - step(grad).
  VecX step(const VecX &x, const VecX &grad);

private:
  double lr_, beta1_, beta2_, eps_;
  VecX m_, v_;
  int t_ = 0;
};

/// Pairs for one iteration: the cyclic adjacent pair (i, i+1) first, then
/// distinct random pairs within max_frame_gap. Unordered, a < b.
std::vector<std::pair<int, int>> select_pairs(int frame_count, int iteration,
                                              const OptimConfig &config,
                                              std::mt19937_64 &rng);

/// Mean photometric loss and vertex gradient over `pairs` for one mesh.
struct ObjectiveResult {
  double photometric = 0.0;
  Points vertex_grad;
  std::vector<PairReport> pairs;
  int no_visible_pairs = 0;
};

ObjectiveResult photometric_objective(const FrameSet &frames,
                                      const TriangleMesh &mesh,
                                      const std::vector<std::pair<int, int>> &pairs,
                                      const PhotometricOptions &options,
                                      bool with_gradient, int threads = 1);

struct OptimResult {
  ShapeState state;
  std::vector<LossReport> trace;
};

using IterationCallback = std::function<void(const LossReport &)>;

/// Adam over z = [code; s; omega; t] minimizing the mean pairwise
/// photometric loss plus the code trust region and scale penalty. Throws
/// NonFiniteLoss if the loss or gradient stops being finite.
OptimResult optimize(const ShapeModel &model, const FrameSet &frames,
                     const ShapeState &init, const VecX &initial_code,
                     const OptimConfig &config,
                     const IterationCallback &on_iteration = {});

} // namespace photomesh
