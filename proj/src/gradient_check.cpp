#include "photomesh/gradient_check.hpp"

#include "photomesh/photometric.hpp"
#include "photomesh/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace photomesh {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 random_in_ball(Rng &rng, double radius) {
  while (true) {
    const Vec3 v(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    if (v.squaredNorm() <= 1.0)
      return radius * v;
  }
}

Mat3 random_rotation(Rng &rng) {
  return so3_exp(random_in_ball(rng, std::numbers::pi));
}

void record(GradientCheckRow &row, double err) {
  ++row.cases;
  row.max_relative_error = std::max(row.max_relative_error, err);
}

GradientCheckRow finish(GradientCheckRow row) {
  row.passed = row.cases > 0 && row.max_relative_error < row.tolerance;
  return row;
}

template <typename A, typename B> double matrix_relative_error(const A &a, const B &b) {
  return relative_error((a - b).norm(), a.norm(), b.norm());
}

} // namespace

double relative_error(double diff, double a, double b) {
  const double scale = std::max(a, b);
  return scale > 0.0 ? diff / scale : 0.0;
}

GradientCheckRow check_project_jacobian(const GradientCheckOptions &opt) {
  GradientCheckRow row{"project_jacobian", 0, 0.0, 1e-5, false};
  Rng rng(opt.seed);
  const double h = 1e-5;
  for (int c = 0; c < opt.cases; ++c) {
    Camera cam;
    cam.width = 640;
    cam.height = 480;
    cam.fx = uniform(rng, 50, 800);
    cam.fy = uniform(rng, 50, 800);
    cam.cx = uniform(rng, 100, 540);
    cam.cy = uniform(rng, 100, 380);
    cam.R = random_rotation(rng);
    cam.t = random_in_ball(rng, 5.0);
    const double z = uniform(rng, 0.5, 10.0);
    const Vec3 q(uniform(rng, -z, z), uniform(rng, -z, z), z);
    const Vec3 p = cam.R.transpose() * (q - cam.t);

    const Mat23 analytic = project_jacobian(p, cam);
    Mat23 fd;
    for (int k = 0; k < 3; ++k) {
      const Vec3 dp = h * Vec3::Unit(k);
      fd.col(k) = (project(Vec3(p + dp), cam).pixel - project(Vec3(p - dp), cam).pixel) / (2 * h);
    }
    record(row, matrix_relative_error(analytic, fd));
  }
  return finish(row);
}

GradientCheckRow check_so3_exp_jacobian(const GradientCheckOptions &opt) {
  GradientCheckRow row{"so3_exp_jacobian", 0, 0.0, 1e-5, false};
  Rng rng(opt.seed + 1);
  const double h = 1e-6;
  for (int c = 0; c < opt.cases; ++c) {
    const Vec3 w = random_in_ball(rng, std::numbers::pi);
    const auto analytic = so3_exp_jacobian(w);
    Eigen::Matrix<double, 3, 9> a, fd;
    for (int k = 0; k < 3; ++k) {
      const Vec3 dw = h * Vec3::Unit(k);
      a.block<3, 3>(0, 3 * k) = analytic[k];
      fd.block<3, 3>(0, 3 * k) = (so3_exp(Vec3(w + dw)) - so3_exp(Vec3(w - dw))) / (2 * h);
    }
    record(row, matrix_relative_error(a, fd));
  }
  return finish(row);
}

GradientCheckRow check_similarity_jacobian(const GradientCheckOptions &opt) {
  GradientCheckRow row{"similarity_jacobian", 0, 0.0, 1e-5, false};
  Rng rng(opt.seed + 2);
  const double h = 1e-6;
  for (int c = 0; c < opt.cases; ++c) {
    const Vec3 v = random_in_ball(rng, 1.0);
    Similarity theta{uniform(rng, -0.7, 0.7), random_in_ball(rng, std::numbers::pi),
                     random_in_ball(rng, 2.0)};
    const Mat37 analytic = similarity_jacobian(v, theta);
    Mat37 fd;
    const Eigen::Matrix<double, 7, 1> x = theta.to_vector();
    for (int k = 0; k < 7; ++k) {
      Eigen::Matrix<double, 7, 1> dx = Eigen::Matrix<double, 7, 1>::Zero();
      dx[k] = h;
      fd.col(k) = (apply_similarity(v, Similarity::from_vector(x + dx)) -
                   apply_similarity(v, Similarity::from_vector(x - dx))) / (2 * h);
    }
    record(row, matrix_relative_error(analytic, fd));
  }
  return finish(row);
}

namespace {

bool same_cells(const std::vector<SampleRecord> &records, const TriangleMesh &plus,
                const TriangleMesh &minus, const Camera &ca, const Camera &cb,
                PointModel model) {
  auto cell = [](const Vec2 &x) {
    return Eigen::Vector2d((x.array() - 0.5).floor());
  };
  for (const SampleRecord &r : records) {
    const Vec3 p = record_point(r, plus, model), m = record_point(r, minus, model);
    for (const Camera *cam : {&ca, &cb})
      if (cell(project(p, *cam).pixel) != cell(project(m, *cam).pixel))
        return false;
  }
  return true;
}

LinearShapePrior small_prior(int subdivisions, int k, std::uint64_t seed) {
  ShapeFamily family{subdivisions};
  return fit_prior(family.sample_many(k + 12, seed), k);
}

} // namespace

GradientCheckRow check_generate_jacobian(const GradientCheckOptions &opt) {
  GradientCheckRow row{"generate_jacobian", 0, 0.0, 1e-5, false};
  Rng rng(opt.seed + 3);
  const LinearShapePrior prior = small_prior(1, 6, opt.seed);
  const int k = prior.code_size();
  const double h = 1e-6;
  for (int c = 0; c < opt.cases; ++c) {
    ShapeState state;
    state.code = VecX::NullaryExpr(k, [&] { return uniform(rng, -0.3, 0.3); });
    state.transform = {uniform(rng, -0.5, 0.5), random_in_ball(rng, 2.5),
                       random_in_ball(rng, 1.0)};
    const MatX analytic = generate_jacobian(prior, state);
    MatX fd(analytic.rows(), analytic.cols());
    const VecX z = state.to_vector();
    for (int i = 0; i < z.size(); ++i) {
      VecX dz = VecX::Zero(z.size());
      dz[i] = h;
      const Points plus = generate(prior, ShapeState::from_vector(z + dz, k)).vertices;
      const Points minus = generate(prior, ShapeState::from_vector(z - dz, k)).vertices;
      const Points d = (plus - minus) / (2 * h);
      fd.col(i) = Eigen::Map<const VecX>(d.data(), d.size());
    }
    record(row, matrix_relative_error(analytic, fd));
  }
  return finish(row);
}

GradientCheckRow check_sample_gradient(const GradientCheckOptions &opt) {
  GradientCheckRow row{"sample_gradient", 0, 0.0, 1e-6, false};
  Rng rng(opt.seed + 4);
  const double h = 1e-4;
  for (int c = 0; c < opt.cases; ++c) {
    Image img(16, 12);
    for (float &v : img.data())
      v = static_cast<float>(uniform(rng, 0.0, 1.0));
    // Interior point at least 2h away from every cell boundary.
    auto coord = [&](int n) {
      while (true) {
        const double x = uniform(rng, 0.5, n - 0.5);
        const double f = (x - 0.5) - std::floor(x - 0.5);
        if (f > 2 * h && f < 1.0 - 2 * h)
          return x;
      }
    };
    const Vec2 x(coord(img.width()), coord(img.height()));
    const ImageGradient analytic = sample_gradient(img, x);
    ImageGradient fd;
    for (int k = 0; k < 2; ++k) {
      const Vec2 dx = h * Vec2::Unit(k);
      fd.row(k) = ((sample_bilinear(img, Vec2(x + dx)) - sample_bilinear(img, Vec2(x - dx))) /
                   (2 * h)).transpose();
    }
    record(row, matrix_relative_error(analytic, fd));
  }
  return finish(row);
}

GradientCheckRow check_photometric_gradient(const GradientCheckOptions &opt,
                                            bool ray_cast_points) {
  GradientCheckRow row{ray_cast_points ? "photometric_gradient (ray-cast points)"
                                       : "photometric_gradient",
                       0, 0.0, 1e-3, false};
  Rng rng(opt.seed + 5);
  const LinearShapePrior prior = small_prior(2, 6, opt.seed + 7);
  const int k = prior.code_size();

  OrbitRig rig;
  rig.azimuths = 18;
  rig.elevations_deg = {10.0};
  rig.width = rig.height = 64;
  const std::vector<Camera> cams = make_orbit_cameras(rig);

  // Smooth, low-frequency images keep the bilinear interpolant's slope
  // jumps small relative to the slope itself.
  auto smooth_image = [&](double phase) {
    Image img(rig.width, rig.height);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x)
        for (int ch = 0; ch < 3; ++ch)
          img.at(x, y, ch) = static_cast<float>(
              0.5 + 0.3 * std::sin(2 * std::numbers::pi * x / (19.0 + 3 * ch) + phase + ch) *
                        std::cos(2 * std::numbers::pi * y / (23.0 - 2 * ch) - phase));
    return img;
  };

  PhotometricOptions popt;
  popt.point_model = ray_cast_points ? PointModel::RayCast : PointModel::Barycentric;
  for (int c = 0; c < opt.cases; ++c) {
    const int a = static_cast<int>(uniform(rng, 0, cams.size()));
    const int b = (a + 1 + static_cast<int>(uniform(rng, 0, 2))) % static_cast<int>(cams.size());
    const Image ia = smooth_image(uniform(rng, 0, 6.28));
    const Image ib = smooth_image(uniform(rng, 0, 6.28));

    ShapeState state;
    state.code = VecX::NullaryExpr(k, [&] { return uniform(rng, -0.2, 0.2); });
    state.transform = {uniform(rng, -0.15, 0.1), random_in_ball(rng, 0.3),
                       random_in_ball(rng, 0.15)};
    const TriangleMesh mesh = generate(prior, state);
    const PairResult pr = evaluate_pair(ia, ib, cams[a], cams[b], mesh, popt, true);
    if (pr.samples == 0) {
      ++row.skipped;
      --c;
      continue;
    }
    const VecX analytic = backpropagate(prior, state, pr.vertex_grad);

    const VecX z = state.to_vector();
    VecX fd(z.size());
    bool usable = true;
    for (int i = 0; i < z.size() && usable; ++i) {
      // The frozen loss is smooth only inside one bilinear cell per lookup;
      // shrink the stencil until no sample changes cell across it.
      double h = 1e-5;
      while (true) {
        VecX dz = VecX::Zero(z.size());
        dz[i] = h;
        const TriangleMesh plus = generate(prior, ShapeState::from_vector(z + dz, k));
        const TriangleMesh minus = generate(prior, ShapeState::from_vector(z - dz, k));
        if (same_cells(pr.records, plus, minus, cams[a], cams[b], popt.point_model)) {
          const double lp = frozen_loss(ia, ib, cams[a], cams[b], plus, pr.records,
                                        popt.point_model);
          const double lm = frozen_loss(ia, ib, cams[a], cams[b], minus, pr.records,
                                        popt.point_model);
          fd[i] = (lp - lm) / (2 * h);
          break;
        }
        h /= 4;
        if (h < 1e-10) {
          usable = false;
          break;
        }
      }
    }
    if (!usable) {
      ++row.skipped;
      --c;
      continue;
    }
    record(row, matrix_relative_error(analytic, fd));
  }
  return finish(row);
}

std::vector<GradientCheckRow> run_gradient_checks(const GradientCheckOptions &opt) {
  return {check_project_jacobian(opt),   check_so3_exp_jacobian(opt),
          check_similarity_jacobian(opt), check_generate_jacobian(opt),
          check_sample_gradient(opt),    check_photometric_gradient(opt, false),
          check_photometric_gradient(opt, true)};
}

} // namespace photomesh
