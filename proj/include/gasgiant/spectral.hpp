#pragma once

#include "gasgiant/common.hpp"
#include "gasgiant/metric.hpp"

namespace gasgiant {

/// Indicial exponents and self-adjointness classification of the degenerate
/// radial operator L = x^a d2/dx2 - a(n/2-1) x^{a-1} d/dx.
struct IndicialData {
  double alpha = 0;
  int n = 0;
  double gamma_minus = 0;  // 0
  double gamma_plus = 0;   // a(n/2-1)+1
  double mu_minus = 0;     // (n a/2 - 1)/2, the L^2 cutoff weight
  double mu_plus = 0;      // mu_minus + 2 - a
  bool essentially_self_adjoint = false;  // a > 2/n
};
IndicialData indicial_data(double alpha, int n);

/// Self-adjoint extension selector at x = 0 for the data model; only the
/// Dirichlet (Friedrichs) extension a0 = 0 is exercised numerically.
enum class Extension { dirichlet, neumann, robin };

struct TruncatedEigenproblem {
  double alpha = 1;
  int n = 2;
  double mu_mode = 0;  // cross-section mode eigenvalue of the h0-Laplacian
  double eps = 1e-2;   // truncation: domain [eps, 1], Dirichlet both walls
  int grid_n = 800;    // cells; nodes graded x_i = eps + (1-eps)(i/N)^3
  Extension extension = Extension::dirichlet;
  double robin_a = 1, robin_b = 0;
};

/// P1 finite elements for the divergence form
/// L u = x^{n a/2} (x^{a - n a/2} u')' - mu_mode x^a u, which is symmetric in
/// the x^{-n a/2} dx inner product (the volume_weight_exponent density).
/// Stiffness A (with the mu_mode potential) and weighted mass M are
/// tridiagonal over all nodes; eigen-solves use the interior block.
struct RadialOperator {
  TruncatedEigenproblem prob;
  Eigen::VectorXd nodes;           // N+1 graded node coordinates
  Eigen::VectorXd a_diag, a_off;   // a_off(i) couples node i and i+1
  Eigen::VectorXd m_diag, m_off;
};
RadialOperator assemble_radial(const TruncatedEigenproblem& prob);

/// Galerkin image of a full node vector: M_int^{-1} (A u)_int, a grid
/// function approximating -L u at the interior nodes.
Eigen::VectorXd discrete_neg_l(const RadialOperator& op,
                               const Eigen::VectorXd& full_u);

/// Weighted load vector (g, phi_i)_w over interior nodes with the assembly
/// quadrature: the weak-form counterpart for operator identity tests.
Eigen::VectorXd weighted_load(const RadialOperator& op,
                              const std::function<double(double)>& g);

/// max |<Au,v>-<u,Av>| + |<Mu,v>-<u,Mv>| over seeded random compactly
/// supported interior vectors (scale-normalized).
double symmetry_residual(const RadialOperator& op, unsigned seed = 1);

/// k smallest Dirichlet eigenpairs of A v = lambda M v by blocked
/// shift-invert iteration with Rayleigh-Ritz extraction.
struct EigenSolveResult {
  std::vector<double> lambda;   // ascending
  Eigen::MatrixXd vectors;      // interior dofs, one column per pair
};
EigenSolveResult eigenvalues_truncated(const TruncatedEigenproblem& prob,
                                       int k);

/// Same eigenvalues with Richardson extrapolation over grid_n and 2 grid_n
/// (P1 discretization error is O(h^2)); also reports the grid-error estimate.
struct ExtrapolatedEigenvalues {
  std::vector<double> lambda;
  std::vector<double> grid_error;  // |lambda(2N) - lambda(N)| / 3 per j
};
ExtrapolatedEigenvalues eigenvalues_extrapolated(
    const TruncatedEigenproblem& prob, int k);

/// Eigenvalue ladder over eps = 2^-k, k in [k_min, k_max], with the
/// eps -> 0 limit from the two smallest eps (Richardson with the theoretical
/// exponent a(n/2-1)+1) and per-j log-log convergence slopes fitted on the
/// eps range where the truncation effect dominates the grid error.
struct EigenTable {
  struct Row {
    double eps = 0;
    int j = 0;          // 1-based
    double lambda = 0;
  };
  std::vector<Row> rows;
  std::vector<double> lambda_limit;  // per j
  std::vector<double> slopes;        // per j
  double expected_rate = 0;          // a(n/2-1)+1
};
EigenTable truncation_ladder(double alpha, int n, double mu_mode, int j_count,
                             int k_min = 4, int k_max = 14, int grid_n = 600);

/// Fit |phi_j| ~ x^beta on x in [10 eps, 0.1]; expected beta = gamma_plus.
/// Also checks the two-regime bound |phi| <= C x (eps + x)^{a(n/2-1)}
/// (bound_spread = max/median of the pointwise ratio; O(1) when the bound is
/// shape-sharp) and the linear Dirichlet start on [eps, 2 eps].
struct BoundaryProfile {
  double beta = 0;
  double expected_beta = 0;
  double bound_spread = 0;
  double wall_linear_residual = 0;  // relative misfit of a line through 0
};
BoundaryProfile eigenfunction_boundary_profile(
    const TruncatedEigenproblem& prob, int j);

}  // namespace gasgiant
