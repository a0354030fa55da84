#pragma once

#include <functional>
#include <vector>

#include "gasgiant/metric.hpp"

namespace gasgiant {

/// Polytrope profile theta(r) solving theta'' + (N-1)/r theta' + theta^n = 0
/// with theta(0) = 1, theta'(0) = 0, integrated out to the first zero R.
struct PolytropeProfile {
  double n_poly = 0;
  int N = 3;                 // spatial dimension of the radial Laplacian
  double R = 0;              // first zero (surface radius)
  double theta_prime_R = 0;  // theta'(R) < 0
  std::vector<double> r;     // radial grid
  std::vector<double> theta;
  std::vector<double> c;     // sound speed profile, c = theta^{1/2}
  double alpha_fit = 0;      // 2 * slope of log c vs log(R - r)

  double theta_at(double rr) const;  // dense evaluation on [0, R]
};

PolytropeProfile lane_emden(double n_poly, int N = 3, double r_bound = 50.0);

/// Radially symmetric conformally Euclidean metric c(r)^{-2} (dr^2 + r^2 dy^2)
/// on the annular collar [r_inner, R), with c(r) ~ (R - r)^{alpha/2}.
struct RadialConformalSpec {
  std::function<double(double)> c;
  double r_inner = 0;
  double R = 1;
};

/// Result of rewriting the conformal metric in adapted coordinates
/// g = x^{-alpha} (dx^2 + h(x) dy^2) with |dx / x^{alpha/2}|_g == 1.
struct RadialNormalForm {
  double alpha_fit = 0;
  double x_max = 0;
  std::vector<double> x;        // adapted grid, ascending from 0
  std::vector<double> r_of_x;   // inverse chart
  std::vector<double> h_of_x;   // h(x) = x^alpha r^2 / c(r)^2
  double eikonal_residual = 0;  // max |x'(r) x^{-alpha/2} c(r) + 1|
  std::shared_ptr<GasGiantMetric> metric;
};

RadialNormalForm normal_form_radial(const RadialConformalSpec& spec);

}  // namespace gasgiant
