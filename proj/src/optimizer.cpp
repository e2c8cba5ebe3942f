#include "photomesh/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <thread>

namespace photomesh {

void OptimConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw Error(ErrorCode::InvalidConfig, "learning_rate must be > 0");
  if (iterations < 0)
    throw Error(ErrorCode::InvalidConfig, "iterations must be >= 0");
  if (lambda_code < 0.0 || lambda_scale < 0.0)
    throw Error(ErrorCode::InvalidConfig, "penalty weights must be >= 0");
  if (pairs_per_iteration < 0 || max_frame_gap < 0)
    throw Error(ErrorCode::InvalidConfig, "pair policy must be >= 0");
  if (threads < 1)
    throw Error(ErrorCode::InvalidConfig, "threads must be >= 1");
  if (!(photometric.sampler_scale > 0.0))
    throw Error(ErrorCode::InvalidConfig, "sampler scale must be > 0");
}

Adam::Adam(int size, double learning_rate, double beta1, double beta2,
           double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon),
      m_(VecX::Zero(size)), v_(VecX::Zero(size)) {}

VecX Adam::step(const VecX &x, const VecX &grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  return x - lr_ * ((m_ / c1).array() /
                    ((v_ / c2).array().sqrt() + eps_)).matrix();
}

std::vector<std::pair<int, int>> select_pairs(int frame_count, int iteration,
                                              const OptimConfig &config,
                                              std::mt19937_64 &rng) {
  std::vector<std::pair<int, int>> out;
  const int f = frame_count;
  if (f < 2)
    return out;
  if (config.pairs_per_iteration == 0) {
    for (int a = 0; a < f; ++a)
      for (int b = a + 1; b < f; ++b)
        out.emplace_back(a, b);
    return out;
  }

  const int gap = config.max_frame_gap == 0 ? f - 1
                                            : std::min(config.max_frame_gap, f - 1);
  // Distinct unordered pairs reachable with cyclic gaps 1..gap.
  std::set<std::pair<int, int>> reachable;
  for (int a = 0; a < f; ++a)
    for (int g = 1; g <= gap; ++g) {
      const int b = (a + g) % f;
      reachable.emplace(std::min(a, b), std::max(a, b));
    }
  const size_t want = std::min<size_t>(config.pairs_per_iteration, reachable.size());

  std::set<std::pair<int, int>> seen;
  auto push = [&](int a, int b) {
    const std::pair<int, int> p(std::min(a, b), std::max(a, b));
    if (seen.insert(p).second)
      out.push_back(p);
  };
  const int i = iteration % f;
  push(i, (i + 1) % f);

  std::uniform_int_distribution<int> pick_frame(0, f - 1);
  std::uniform_int_distribution<int> pick_gap(1, gap);
  while (out.size() < want) {
    const int a = pick_frame(rng);
    push(a, (a + pick_gap(rng)) % f);
  }
  return out;
}

ObjectiveResult photometric_objective(const FrameSet &frames,
                                      const TriangleMesh &mesh,
                                      const std::vector<std::pair<int, int>> &pairs,
                                      const PhotometricOptions &options,
                                      bool with_gradient, int threads) {
  // One raster per frame used this iteration, shared by its pairs.
  std::map<int, RasterMaps> rasters;
  for (const auto &[a, b] : pairs) {
    rasters.try_emplace(a);
    rasters.try_emplace(b);
  }
  std::vector<int> keys;
  for (const auto &kv : rasters)
    keys.push_back(kv.first);

  auto parallel_for = [threads](int n, const auto &body) {
    const int workers = std::min(threads, n);
    if (workers <= 1) {
      for (int i = 0; i < n; ++i)
        body(i);
      return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int i = w; i < n; i += workers)
          body(i);
      });
    for (std::thread &t : pool)
      t.join();
  };

  parallel_for(static_cast<int>(keys.size()), [&](int i) {
    rasters.at(keys[i]) = rasterize(mesh, frames.frames[keys[i]].camera);
  });

  std::vector<PairResult> results(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), [&](int i) {
    const auto [a, b] = pairs[i];
    const Frame &fa = frames.frames[a];
    const Frame &fb = frames.frames[b];
    results[i] = evaluate_pair(fa.image, fb.image, fa.camera, fb.camera, mesh,
                               options, with_gradient,
                               {&rasters.at(a), &rasters.at(b)});
    results[i].records.clear();
  });

  // Fixed-order reduction keeps the result independent of thread count.
  ObjectiveResult out;
  if (with_gradient)
    out.vertex_grad = Points::Zero(mesh.num_vertices(), 3);
  const double weight = pairs.empty() ? 0.0 : 1.0 / pairs.size();
  for (size_t i = 0; i < pairs.size(); ++i) {
    const PairResult &r = results[i];
    out.pairs.push_back({pairs[i].first, pairs[i].second, r.loss, r.samples,
                         r.out_of_bounds, r.occluded});
    if (r.samples == 0) {
      ++out.no_visible_pairs;
      continue;
    }
    out.photometric += weight * r.loss;
    if (with_gradient)
      out.vertex_grad += weight * r.vertex_grad;
  }
  return out;
}

OptimResult optimize(const ShapeModel &model, const FrameSet &frames,
                     const ShapeState &init, const VecX &initial_code,
                     const OptimConfig &config,
                     const IterationCallback &on_iteration) {
  config.validate();
  frames.validate();
  if (init.code.size() != model.code_size())
    throw Error(ErrorCode::DimensionMismatch, "initial state code size");

  OptimResult out;
  out.state = init;
  const int k = model.code_size();
  VecX z = init.to_vector();
  Adam adam(static_cast<int>(z.size()), config.learning_rate, config.beta1,
            config.beta2, config.epsilon);
  std::mt19937_64 rng(config.seed);

  for (int it = 0; it < config.iterations; ++it) {
    const ShapeState state = ShapeState::from_vector(z, k);
    const TriangleMesh mesh = generate(model, state);
    const auto pairs = select_pairs(frames.size(), it, config, rng);
    const ObjectiveResult obj = photometric_objective(
        frames, mesh, pairs, config.photometric, true, config.threads);
    const RegularizerResult reg =
        regularizer(state, initial_code, config.lambda_code, config.lambda_scale);

    LossReport report;
    report.iteration = it;
    report.photometric = obj.photometric;
    report.code_term = reg.code_term;
    report.scale_term = reg.scale_term;
    report.lambda_code = config.lambda_code;
    report.lambda_scale = config.lambda_scale;
    report.total = obj.photometric + reg.value;
    report.no_visible_pairs = obj.no_visible_pairs;
    report.pairs = obj.pairs;

    const VecX grad = backpropagate(model, state, obj.vertex_grad) + reg.gradient;
    if (!std::isfinite(report.total) || !grad.allFinite())
      throw Error(ErrorCode::NonFiniteLoss,
                  "iteration " + std::to_string(it));

    if (on_iteration)
      on_iteration(report);
    out.trace.push_back(std::move(report));
    z = adam.step(z, grad);
  }
  out.state = ShapeState::from_vector(z, k);
  return out;
}

} // namespace photomesh
