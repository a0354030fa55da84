#pragma once

#include <optional>

#include "gasgiant/metric.hpp"
#include "gasgiant/ode.hpp"

namespace gasgiant {

/// Cotangent state in the adapted chart.
struct PhasePoint {
  double x = 0;
  Eigen::VectorXd y;
  double xi = 0;
  Eigen::VectorXd eta;
};

/// H = (1/2) x^alpha (xi^2 + h^{ij} eta_i eta_j).
double hamiltonian(const GasGiantMetric& metric, const PhasePoint& p);

/// Cogeodesic right-hand side (xdot, ydot, xidot, etadot).
PhasePoint hamiltonian_rhs(const GasGiantMetric& metric, const PhasePoint& p);

/// Scale the momentum so that 2H = 1.
PhasePoint make_unit_speed(const GasGiantMetric& metric, double x,
                           const Eigen::VectorXd& y, double xi_dir,
                           const Eigen::VectorXd& eta_dir);

enum class TrajStatus { exited, alive, trapped_suspect, exited_top };

struct ExitRecord {
  double T = 0;              // exit time
  Eigen::VectorXd y_bar;     // limiting boundary point
  Eigen::VectorXd eta_bar;   // limiting tangential covector
  Eigen::VectorXd v_bar;     // h0-dual vector
  double length = 0;         // g-arc length at exit
};

struct GeoOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double x_switch = 0;       // 0 => min(1e-2, x_max / 10)
  double length_budget = 0;  // 0 => 50 * (2 W(x_max) + 1)
  double t_max = 1e6;
  double dominance = 0.3;    // radial share of 2H required to enter the tail
  bool allow_top_exit = false;  // x = x_max exit: status exited_top, no throw
};

/// Integrated bicharacteristic. Interior legs evolve
/// (x, y, xi, eta, s) in time; boundary tails evolve (t, y, eta, s) in the
/// regular variable w = x^{1-a/2}/(1-a/2), through w = 0.
struct Trajectory {
  struct Leg {
    bool tail = false;
    int dir = 0;  // tail legs: +1 ascending from the boundary, -1 descending
    OdeSolution sol;
  };
  TrajStatus status = TrajStatus::alive;
  double H0 = 0.5;
  int dim = 2;
  double alpha = 1;
  std::shared_ptr<const BoundaryFamily> family;  // for tail reconstruction
  std::vector<Leg> legs;
  std::optional<ExitRecord> exit_record;
  double t_end = 0;
  double length = 0;
  std::optional<double> apex_t, apex_x;
  double hamiltonian_drift = 0;  // max |H - H0| over interior leg samples

  PhasePoint state_at(double t) const;
  /// integral of f(x, y) dt over the full life of the trajectory
  double integrate_scalar(
      const std::function<double(double, const Eigen::VectorXd&)>& f,
      double tol = 1e-11) const;
};

double x_of_w(double alpha, double w);
double w_of_x(double alpha, double x);

/// Integrate a unit-speed interior start to the boundary.
Trajectory integrate_to_boundary(const GasGiantMetric& metric,
                                 const PhasePoint& start,
                                 const GeoOptions& opts = {});

/// Launch from the boundary point y1 with tangential covector eta1 (2H = 1),
/// through the apex, back to the boundary.
Trajectory trace_from_boundary(const GasGiantMetric& metric,
                               const Eigen::VectorXd& y1,
                               const Eigen::VectorXd& eta1,
                               const GeoOptions& opts = {});

/// Log-log fits of the exit asymptotics over tau = T - t in [1e-7, 1e-4].
struct ExpansionFit {
  double exponent_x = 0;          // expected 2/(2-a)
  double c_alpha_fit = 0;         // expected (1-a/2)^{2/(2-a)}
  double exponent_y = 0;          // expected (2+a)/(2-a)
  double c_alpha_prime_fit = 0;   // expected (1-a/2)^{2a/(2-a)} (2-a)/(2+a)
  double exponent_xi = 0;         // expected -a/(2-a)
  double xi_prefactor_fit = 0;    // expected (1-a/2)^{-a/(2-a)}
  bool has_y = false;             // false for vertical rays (eta_bar = 0)
};
ExpansionFit expansion_fit(const GasGiantMetric& metric, const Trajectory& traj,
                           const GeoOptions& opts = {});

double expected_c_alpha(double alpha);
double expected_c_alpha_prime(double alpha);

/// Fit |y - y_bar| vs x near the exit; expected exponent (2+a)/2.
double geodesic_shape_exponent(const GasGiantMetric& metric,
                               const Trajectory& traj,
                               const GeoOptions& opts = {});

/// Slope of log T vs log x0 over apex starts x0 = 2^{-k}; expected 1 - a/2.
RateFit exit_time_scaling(const GasGiantMetric& metric,
                          const Eigen::VectorXd& y0,
                          const Eigen::VectorXd& eta_dir, int k_min = 4,
                          int k_max = 16, const GeoOptions& opts = {});

struct ScatteringResult {
  Eigen::VectorXd y_out;
  Eigen::VectorXd eta_out;
  double total_time = 0;
  double length = 0;
  double apex_x = 0;
};
ScatteringResult scattering_relation(const GasGiantMetric& metric,
                                     const Eigen::VectorXd& y_in,
                                     const Eigen::VectorXd& eta_in,
                                     const GeoOptions& opts = {});

struct ConnectionResult {
  double d_g = 0;
  double apex_x = 0;
  double eta1 = 0;  // shooting momentum at y1 (2D)
  Trajectory trajectory;
  int iterations = 0;
};
/// Solve E(y1, eta1) = y2 by bracketed secant shooting (2D collars).
ConnectionResult connect_boundary_points(const GasGiantMetric& metric, double y1,
                                         double y2, const GeoOptions& opts = {});

struct BoundaryDistanceLaw {
  RateFit fit;              // slope expected 1 - a/2
  double alpha_recovered;   // 2 (1 - slope)
  double ratio_min, ratio_max;  // apex height / d_g comparability bounds
};
BoundaryDistanceLaw boundary_distance_exponent(const GasGiantMetric& metric,
                                               double y_center, int k_min = 4,
                                               int k_max = 14,
                                               const GeoOptions& opts = {});

struct BoundaryDistanceFunction {
  double source_x = 0;
  Eigen::VectorXd source_y;
  std::vector<double> z;  // boundary sample grid
  std::vector<double> d;  // d_g(source, z)
};
BoundaryDistanceFunction interior_distance_map(const GasGiantMetric& metric,
                                               double x0, double y0,
                                               const std::vector<double>& z_grid,
                                               int n_sweep = 720,
                                               const GeoOptions& opts = {});

/// Covering-number estimate of dim(boundary, d_g); expected 2(n-1)/(2-a).
double hausdorff_dimension_boundary(const GasGiantMetric& metric,
                                    const GeoOptions& opts = {});

}  // namespace gasgiant
