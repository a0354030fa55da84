#include "gasgiant/ode.hpp"

#include <cmath>
#include <stdexcept>

#include "gasgiant/common.hpp"

namespace gasgiant {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                 e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640,
                 e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

}  // namespace

Eigen::VectorXd hermite_eval(const OdeSample& a, const OdeSample& b, double t) {
  const double h = b.t - a.t;
  if (h == 0) return a.y;
  const double s = (t - a.t) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * a.y + (h10 * h) * a.f + h01 * b.y + (h11 * h) * b.f;
}

Eigen::VectorXd OdeSolution::at(double t) const {
  require(!samples.empty(), "empty solution");
  const bool fwd = samples.back().t >= samples.front().t;
  std::size_t lo = 0, hi = samples.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (fwd ? (samples[mid].t <= t) : (samples[mid].t >= t))
      lo = mid;
    else
      hi = mid;
  }
  return hermite_eval(samples[lo], samples[hi], t);
}

OdeSolution integrate_dopri5(const OdeRhs& rhs, double t0, double t1,
                             const Eigen::VectorXd& y0, const OdeOptions& opts,
                             const std::vector<OdeEvent>& events) {
  const int dir = (t1 >= t0) ? 1 : -1;
  const double span = std::abs(t1 - t0);
  require(span > 0, "integrate_dopri5: empty interval");
  const double h_max = opts.h_max > 0 ? opts.h_max : span;

  OdeSolution sol;
  Eigen::VectorXd y = y0, f0(y0.size());
  rhs(t0, y, f0);
  double t = t0;
  sol.samples.push_back({t, y, f0});

  std::vector<double> gvals(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) gvals[i] = events[i].g(t, y);

  double h;
  if (opts.h_init > 0) {
    h = opts.h_init;
  } else {
    const double sc = opts.atol + opts.rtol * y.cwiseAbs().maxCoeff();
    const double d0 = y.cwiseAbs().maxCoeff() / sc;
    const double d1 = f0.cwiseAbs().maxCoeff() / sc;
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span
                                 : 0.01 * d0 / d1;
    h = std::min(h, 0.1 * span);
  }
  h = std::min(h, h_max);

  Eigen::VectorXd k2(y.size()), k3(y.size()), k4(y.size()), k5(y.size()),
      k6(y.size()), k7(y.size()), ynew(y.size()), err(y.size());

  while (dir * (t1 - t) > 0) {
    if (sol.n_steps + sol.n_rejected > opts.max_steps)
      throw std::runtime_error("integrate_dopri5: step budget exhausted");
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
      throw std::runtime_error("integrate_dopri5: step size collapsed");
    if (dir * (t + dir * h - t1) > 0) h = std::abs(t1 - t);
    const double hs = dir * h;

    rhs(t + c2 * hs, y + hs * (a21 * f0), k2);
    rhs(t + c3 * hs, y + hs * (a31 * f0 + a32 * k2), k3);
    rhs(t + c4 * hs, y + hs * (a41 * f0 + a42 * k2 + a43 * k3), k4);
    rhs(t + c5 * hs, y + hs * (a51 * f0 + a52 * k2 + a53 * k3 + a54 * k4), k5);
    rhs(t + hs, y + hs * (a61 * f0 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5),
        k6);
    ynew = y + hs * (b1 * f0 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + hs, ynew, k7);
    err = hs * (e1 * f0 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err_norm = 0;
    for (int i = 0; i < y.size(); ++i) {
      const double sc =
          opts.atol + opts.rtol * std::max(std::abs(y(i)), std::abs(ynew(i)));
      const double e = std::abs(err(i)) / sc;
      if (e > err_norm || !std::isfinite(e)) err_norm = e;
    }
    if (!std::isfinite(err_norm) || !ynew.allFinite() || !k7.allFinite()) {
      h *= 0.25;
      ++sol.n_rejected;
      continue;
    }
    if (err_norm > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
      ++sol.n_rejected;
      continue;
    }

    const double t_new = t + hs;
    sol.samples.push_back({t_new, ynew, k7});
    ++sol.n_steps;

    // Event detection on the accepted step.
    bool stopped = false;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const double g0 = gvals[i];
      const double g1 = events[i].g(t_new, ynew);
      gvals[i] = g1;
      const bool crossed =
          (g0 < 0 && g1 >= 0 && events[i].direction >= 0) ||
          (g0 > 0 && g1 <= 0 && events[i].direction <= 0);
      if (!crossed || g0 == 0) continue;
      const OdeSample& sa = sol.samples[sol.samples.size() - 2];
      const OdeSample& sb = sol.samples.back();
      double ta = sa.t, tb = sb.t;
      double ga = g0;
      while (std::abs(tb - ta) > opts.event_ttol) {
        const double tm = 0.5 * (ta + tb);
        const double gm = events[i].g(tm, hermite_eval(sa, sb, tm));
        if ((ga < 0) == (gm < 0)) {
          ta = tm;
          ga = gm;
        } else {
          tb = tm;
        }
      }
      sol.event_hit = true;
      sol.event_index = static_cast<int>(i);
      sol.t_event = 0.5 * (ta + tb);
      sol.y_event = hermite_eval(sa, sb, sol.t_event);
      // Replace the interpolated event state with a properly integrated one:
      // the dense-output error of the last (often large) step would otherwise
      // dominate the accuracy of everything downstream of the event.
      if (std::abs(sol.t_event - sa.t) > 64 * opts.event_ttol) {
        OdeOptions ropts = opts;
        ropts.h_init = 0;
        const OdeSolution fine =
            integrate_dopri5(rhs, sa.t, sol.t_event, sa.y, ropts, {});
        sol.y_event = fine.samples.back().y;
      }
      if (events[i].stop) {
        // Truncate the final sample to the event time.
        Eigen::VectorXd fe(y.size());
        rhs(sol.t_event, sol.y_event, fe);
        sol.samples.back() = {sol.t_event, sol.y_event, fe};
        stopped = true;
      }
      break;
    }
    if (stopped) return sol;

    t = t_new;
    y = ynew;
    f0 = k7;  // FSAL
    h = std::min(h_max, h * std::min(5.0, std::max(0.2, 0.9 * std::pow(
                                                             std::max(err_norm,
                                                                      1e-10),
                                                             -0.2))));
  }
  return sol;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double fm, double whole, double tol,
               int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * tol)
    return left + right + delta / 15;
  return simpson(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol, int max_depth) {
  if (a == b) return 0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return simpson(f, a, fa, b, fb, fm, whole, tol, max_depth);
}

}  // namespace gasgiant
