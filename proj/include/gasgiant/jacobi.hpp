#pragma once

#include "gasgiant/geodesic.hpp"

namespace gasgiant {

/// Rescaled Jacobi data: W1 = J, W2 = x^{-alpha} Jdot (coordinate n-vectors).
struct JacobiState {
  Eigen::VectorXd W1;
  Eigen::VectorXd W2;
};

/// Coefficients of the rescaled first-order system W' = A W,
/// A = [[0, x^a I], [-G, -F]], assembled from the Christoffel table (exactly)
/// and its position derivatives (central differences, x-relative steps).
void jacobi_matrices(const GasGiantMetric& metric, const PhasePoint& base,
                     Eigen::MatrixXd& F, Eigen::MatrixXd& G);

/// Tangent of the rescaled system at a base phase point.
JacobiState jacobi_rhs(const GasGiantMetric& metric, const PhasePoint& base,
                       const JacobiState& state);

/// Coordinate velocity (xdot, ydot) of the base point.
Eigen::VectorXd coordinate_velocity(const GasGiantMetric& metric,
                                    const PhasePoint& base);

/// g-orthonormal basis of the orthocomplement of the velocity, oriented so
/// that [velocity | basis] has positive coordinate determinant.
std::vector<Eigen::VectorXd> normal_basis(const GasGiantMetric& metric,
                                          const PhasePoint& base);

/// Jacobi fields co-integrated with the bicharacteristic from an interior
/// start down to x = x_floor (or until the length budget flags trapping).
struct JacobiRun {
  TrajStatus status = TrajStatus::alive;
  std::vector<double> t;
  std::vector<PhasePoint> base;
  std::vector<std::vector<JacobiState>> fields;  // [sample][field]
  std::vector<double> det_normal;  // normal-frame determinant of the basis
  std::vector<double> w_norm;      // max over fields of |W|_e
  double gronwall_log = 0;         // int ||A||_F dt over the run
  double sup_ratio = 0;            // max_t max_f |W(t)|_e / |W(0)|_e
  double length = 0;
  double x_floor = 0;
  std::optional<ExitRecord> exit_record;  // from the underlying trajectory
};

/// Integrate the given fields (default: the normal basis J = 0,
/// D_t J = normal frame vectors) along the orbit of `start`. Initial data and
/// running fields are re-projected onto the velocity orthocomplement in
/// segments, per the normal-field growth bound.
JacobiRun jacobi_run(const GasGiantMetric& metric, const PhasePoint& start,
                     std::vector<JacobiState> fields = {},
                     const GeoOptions& opts = {}, double x_floor = 1e-6);

/// Linear-interpolated sign-change times of v(t); ignores the leading
/// near-zero plateau (|v| below rel_floor * max |v|).
std::vector<double> scan_sign_changes(const std::vector<double>& t,
                                      const std::vector<double>& v,
                                      double rel_floor = 1e-7);

/// Conjugate times: sign changes of the normal Jacobi determinant.
std::vector<double> conjugate_point_scan(const JacobiRun& run);

/// Symplectic pairing <J1, D_t J2>_g - <J2, D_t J1>_g at a base point.
double symplectic_pairing(const GasGiantMetric& metric, const PhasePoint& base,
                          const JacobiState& a, const JacobiState& b);

struct SimplicityReport {
  bool pass = false;
  int orbits = 0;
  int trapped_count = 0;
  int conjugate_count = 0;
  double max_length = 0;
  double min_injectivity_gap = 0;  // exit-data separation of nearest orbits
  double max_gronwall_ratio = 0;   // sup|W| / (|W(0)| exp(int ||A||)), <= 1
  std::string witness;             // empty when pass
};

/// Sweep a grid x0 (log) x y0 of apex starts; report non-trapping evidence,
/// conjugate-point count, growth-bound checks, and endpoint-map injectivity.
SimplicityReport simplicity_certificate(const GasGiantMetric& metric,
                                        int grid = 64,
                                        const GeoOptions& opts = {});

}  // namespace gasgiant
