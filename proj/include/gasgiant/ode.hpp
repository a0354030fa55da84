#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace gasgiant {

/// Right-hand side f(t, y, dydt) of an ODE system.
using OdeRhs =
    std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.0;       // 0 => automatic
  double h_max = 0.0;        // 0 => |t1 - t0|
  long max_steps = 4000000;
  double event_ttol = 1e-12;  // absolute tolerance for event times
};

/// Scalar event g(t, y); a sign change of g over an accepted step is located
/// by bisection on the dense interpolant.
struct OdeEvent {
  std::function<double(double, const Eigen::VectorXd&)> g;
  bool stop = true;
  int direction = 0;  // +1: only -..+ crossings, -1: only +..-, 0: any
};

/// One accepted step endpoint with the derivative there (for dense output).
struct OdeSample {
  double t;
  Eigen::VectorXd y;
  Eigen::VectorXd f;
};

struct OdeSolution {
  std::vector<OdeSample> samples;  // includes the initial point
  bool event_hit = false;
  int event_index = -1;
  double t_event = 0;
  Eigen::VectorXd y_event;
  long n_steps = 0;
  long n_rejected = 0;

  /// Cubic Hermite evaluation at t inside the covered span.
  Eigen::VectorXd at(double t) const;
  double t_begin() const { return samples.front().t; }
  double t_end() const { return samples.back().t; }
};

/// Adaptive Dormand-Prince 5(4). Integrates from t0 to t1 (either direction);
/// stops early at the first triggered stopping event. Throws on step-size
/// collapse, NaN states, or step-budget exhaustion.
OdeSolution integrate_dopri5(const OdeRhs& rhs, double t0, double t1,
                             const Eigen::VectorXd& y0,
                             const OdeOptions& opts = {},
                             const std::vector<OdeEvent>& events = {});

/// Cubic Hermite interpolation between two samples.
Eigen::VectorXd hermite_eval(const OdeSample& a, const OdeSample& b, double t);

/// Adaptive Simpson quadrature of a scalar function.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol = 1e-12, int max_depth = 40);

}  // namespace gasgiant
