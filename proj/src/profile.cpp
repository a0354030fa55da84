#include "gasgiant/profile.hpp"

#include <cmath>
#include <stdexcept>

#include "gasgiant/ode.hpp"

namespace gasgiant {

namespace {

// Cubic Hermite interpolation on a sorted (possibly non-uniform) table with
// centered-difference tangents.
double interp_cubic(const std::vector<double>& xs, const std::vector<double>& vs,
                    double x) {
  require(xs.size() >= 3 && xs.size() == vs.size(), "interp_cubic: bad table");
  std::size_t i = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
  i = std::clamp<std::size_t>(i, 1, xs.size() - 1) - 1;
  auto slope = [&](std::size_t j) {
    const std::size_t a = (j == 0) ? 0 : j - 1;
    const std::size_t b = (j + 1 >= xs.size()) ? xs.size() - 1 : j + 1;
    return (vs[b] - vs[a]) / (xs[b] - xs[a]);
  };
  const double hseg = xs[i + 1] - xs[i];
  const double t = (x - xs[i]) / hseg;
  const double m0 = slope(i) * hseg, m1 = slope(i + 1) * hseg;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * vs[i] + (t3 - 2 * t2 + t) * m0 +
         (-2 * t3 + 3 * t2) * vs[i + 1] + (t3 - t2) * m1;
}

}  // namespace

double PolytropeProfile::theta_at(double rr) const {
  require(rr >= -1e-9 * R && rr <= R * (1 + 1e-9), "theta_at: radius outside [0, R]");
  rr = std::clamp(rr, 0.0, R);
  if (rr >= r.back()) return std::max(theta.back(), 0.0);
  if (rr <= r.front()) {
    const double a = -1.0 / (2 * N);
    const double b = n_poly / (8.0 * N * (N + 2));
    return 1 + a * rr * rr + b * rr * rr * rr * rr;
  }
  return std::max(interp_cubic(r, theta, rr), 0.0);
}

PolytropeProfile lane_emden(double n_poly, int N, double r_bound) {
  require(n_poly > -1.0, "polytropic index must exceed -1");
  require(N >= 2, "radial dimension must be >= 2");

  PolytropeProfile prof;
  prof.n_poly = n_poly;
  prof.N = N;

  // Series start away from the removable r = 0 singularity:
  // theta = 1 - r^2/(2N) + n r^4 / (8N(N+2)) + O(r^6).
  const double r0 = 1e-3;
  const double a = -1.0 / (2 * N);
  const double b = n_poly / (8.0 * N * (N + 2));
  Eigen::VectorXd y0(2);
  y0 << 1 + a * r0 * r0 + b * r0 * r0 * r0 * r0,
      2 * a * r0 + 4 * b * r0 * r0 * r0;

  OdeRhs rhs = [&](double r, const Eigen::VectorXd& y, Eigen::VectorXd& f) {
    const double th = y(0);
    const double src = (th > 0) ? std::pow(th, n_poly) : 0.0;
    f.resize(2);
    f(0) = y(1);
    f(1) = -(N - 1) / r * y(1) - src;
  };
  OdeOptions opts;
  opts.rtol = 1e-12;
  opts.atol = 1e-14;
  std::vector<OdeEvent> events(1);
  events[0].g = [](double, const Eigen::VectorXd& y) { return y(0); };
  events[0].direction = -1;

  const OdeSolution sol = integrate_dopri5(rhs, r0, r_bound, y0, opts, events);
  if (!sol.event_hit)
    throw std::runtime_error("lane_emden: no surface zero found within bound");
  prof.R = sol.t_event;
  prof.theta_prime_R = sol.y_event(1);
  require(prof.theta_prime_R < 0, "lane_emden: surface slope not negative");

  for (const auto& s : sol.samples) {
    prof.r.push_back(s.t);
    prof.theta.push_back(std::max(s.y(0), 0.0));
    prof.c.push_back(std::sqrt(std::max(s.y(0), 0.0)));
  }

  // Boundary order from log c vs log(R - r) near the surface.
  std::vector<double> d, cv;
  for (int k = 0; k <= 12; ++k) {
    const double dist = 1e-5 * std::pow(10.0, 0.25 * k);  // up to 1e-2
    const double rr = prof.R - dist;
    const double th = sol.at(rr)(0);
    if (th <= 0) continue;
    d.push_back(dist);
    cv.push_back(std::sqrt(th));
  }
  prof.alpha_fit = 2.0 * fit_loglog(d, cv).slope;
  return prof;
}

RadialNormalForm normal_form_radial(const RadialConformalSpec& spec) {
  require(spec.R > spec.r_inner, "collar must be nonempty");
  const auto& c = spec.c;
  for (double dist : {1e-6, 1e-4, 1e-2})
    require(c(spec.R - dist) > 0, "c must be positive inside the collar");

  // Fit the boundary order alpha from c(r) ~ (R - r)^{alpha/2}.
  std::vector<double> d, cv;
  for (int k = 0; k <= 12; ++k) {
    const double dist = 1e-6 * std::pow(10.0, 0.25 * k);
    d.push_back(dist);
    cv.push_back(c(spec.R - dist));
  }
  const double alpha = 2.0 * fit_loglog(d, cv).slope;
  require(alpha > 0 && alpha < 2, "fitted boundary order outside (0, 2)");

  const double p = 1 - alpha / 2;
  auto phi = [&](double r) { return c(r) / std::pow(spec.R - r, alpha / 2); };

  // March s(u), u = (R - r)^{1 - alpha/2}: ds/du = (2/(2-alpha))/phi, a
  // bounded smooth right-hand side even at the degenerate surface.
  const double u_max = std::pow(spec.R - spec.r_inner, p);
  OdeRhs rhs = [&](double u, const Eigen::VectorXd&, Eigen::VectorXd& f) {
    const double r = spec.R - std::pow(u, 1.0 / p);
    f.resize(1);
    f(0) = (2.0 / (2.0 - alpha)) / phi(r);
  };
  OdeOptions opts;
  opts.rtol = 1e-12;
  opts.atol = 1e-14;
  // Start just off u = 0: the fitted alpha carries a tiny bias which makes phi
  // weakly singular at the endpoint, and c itself may lose relative accuracy
  // extremely close to the surface (e.g. interpolated profiles). Starting at
  // depth R - r ~ 1e-7 of the collar and seeding with a rectangle rule leaves
  // an O(u1^2 f') ~ 1e-11 error in s.
  const double u1 = std::pow(1e-7 * (spec.R - spec.r_inner), p);
  Eigen::VectorXd s0(1);
  {
    Eigen::VectorXd f1(1);
    s0.setZero();
    rhs(u1, s0, f1);
    s0(0) = u1 * f1(0);
  }
  const OdeSolution sol = integrate_dopri5(rhs, u1, u_max, s0, opts);

  RadialNormalForm out;
  out.alpha_fit = alpha;

  const int nn = 4000;
  const double phi_R = phi(spec.R - 1e-9 * (spec.R - spec.r_inner));
  out.x.push_back(0.0);
  out.r_of_x.push_back(spec.R);
  out.h_of_x.push_back(spec.R * spec.R * std::pow(phi_R, -4.0 / (2.0 - alpha)));
  for (int i = 1; i <= nn; ++i) {
    // grid graded toward the surface, where the chart compresses
    const double frac = double(i) / nn;
    const double u = u1 + (u_max - u1) * frac * frac;
    const double r = spec.R - std::pow(u, 1.0 / p);
    const double s = sol.at(u)(0);
    const double x = std::pow(p * s, 1.0 / p);
    const double cr = c(r);
    out.x.push_back(x);
    out.r_of_x.push_back(r);
    out.h_of_x.push_back(std::pow(x, alpha) * r * r / (cr * cr));
  }
  out.x_max = out.x.back();

  // Residual of the defining identity |dx / x^{alpha/2}|_g = 1 in integrated
  // form: the g-distance int dr / c between sample radii (independent adaptive
  // quadrature) must equal the chart increment of s = x^{1-alpha/2}/(1-alpha/2).
  std::vector<double> r_tab(out.r_of_x.rbegin(), out.r_of_x.rend());
  std::vector<double> x_tab(out.x.rbegin(), out.x.rend());
  auto s_chart = [&](double r) {
    return std::pow(interp_cubic(r_tab, x_tab, r), p) / p;
  };
  const double r_a = spec.r_inner + 0.05 * (spec.R - spec.r_inner);
  double resid = 0;
  for (int k = 1; k <= 20; ++k) {
    const double r_b =
        r_a + (spec.R - 1e-6 * (spec.R - spec.r_inner) - r_a) * k / 20.0;
    const double ds_quad = integrate_adaptive(
        [&](double r) { return 1.0 / c(r); }, r_a, r_b, 1e-13);
    const double ds_chart = s_chart(r_a) - s_chart(r_b);
    resid = std::max(resid, std::abs(ds_chart - ds_quad) /
                                std::max(1.0, std::abs(ds_quad)));
  }
  out.eikonal_residual = resid;

  const auto xs = out.x;
  const auto hs = out.h_of_x;
  auto family = std::make_shared<ScalarFunctionFamily>(
      [xs, hs](double x, double) { return interp_cubic(xs, hs, x); }, nullptr,
      nullptr, /*y_indep=*/true);
  out.metric = std::make_shared<GasGiantMetric>(alpha, 2, family, out.x_max);
  return out;
}

}  // namespace gasgiant
