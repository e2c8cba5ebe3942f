#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace photomesh {

/// Outcome of one analytic-vs-central-difference comparison family.
struct GradientCheckRow {
  std::string name;
  int cases = 0;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  int skipped = 0; // draws rejected because FD could not avoid a kink
};

struct GradientCheckOptions {
  int cases = 1000;
  std::uint64_t seed = 1;
};

/// Relative error ||a - b|| / max(||a||, ||b||), 0 when both vanish.
double relative_error(double a_minus_b_norm, double a_norm, double b_norm);

GradientCheckRow check_project_jacobian(const GradientCheckOptions &opt);
GradientCheckRow check_so3_exp_jacobian(const GradientCheckOptions &opt);
GradientCheckRow check_similarity_jacobian(const GradientCheckOptions &opt);
GradientCheckRow check_generate_jacobian(const GradientCheckOptions &opt);
GradientCheckRow check_sample_gradient(const GradientCheckOptions &opt);
/// d loss / d [code; s; omega; t] under frozen sampling on smooth images.
GradientCheckRow check_photometric_gradient(const GradientCheckOptions &opt,
                                            bool ray_cast_points = false);

std::vector<GradientCheckRow> run_gradient_checks(const GradientCheckOptions &opt);

} // namespace photomesh
