#include <cmath>

#include "doctest.h"
#include "gasgiant/jacobi.hpp"

using namespace gasgiant;
using Eigen::VectorXd;

namespace {

GasGiantMetric model_metric(double alpha, double x_max = 1.0) {
  return GasGiantMetric(alpha, 2, std::make_shared<FlatFamily>(1), x_max);
}

VectorXd vec1(double v) {
  VectorXd out(1);
  out << v;
  return out;
}

JacobiState make_state(double w1x, double w1y, double w2x, double w2y) {
  JacobiState s;
  s.W1 = Eigen::Vector2d(w1x, w1y);
  s.W2 = Eigen::Vector2d(w2x, w2y);
  return s;
}

}  // namespace

TEST_CASE("rescaled coefficients at a reference point") {
  // alpha = 1, h = 1, x = 1, vertical covector (xi, eta) = (1, 0):
  // velocity (1, 0). The alpha*xdot/x diagonal shift cancels the singular
  // Christoffel parts exactly, so F = 0; the only surviving derivative is
  // d_x Gamma^0_{00} v^0 v^0 = alpha/(2 x^2) v0^2, so G = diag(1/2, 0).
  const GasGiantMetric M = model_metric(1.0, 4.0);
  PhasePoint p{1.0, vec1(0.0), 1.0, vec1(0.0)};
  Eigen::MatrixXd F, G;
  jacobi_matrices(M, p, F, G);
  CHECK(F.norm() < 1e-9);
  CHECK(G(0, 0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(G(0, 1)) < 1e-9);
  CHECK(std::abs(G(1, 0)) < 1e-9);
  CHECK(std::abs(G(1, 1)) < 1e-9);

  const JacobiState d = jacobi_rhs(M, p, make_state(1.0, 0.0, 0.0, 0.0));
  CHECK(d.W1.norm() < 1e-12);
  CHECK(d.W2(0) == doctest::Approx(-0.5).epsilon(1e-6));

  const VectorXd v = coordinate_velocity(M, p);
  CHECK(v(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(v(1) == doctest::Approx(0.0).scale(1).epsilon(1e-14));
}

TEST_CASE("normal basis is g-orthonormal and oriented") {
  const GasGiantMetric M = model_metric(0.8, 2.0);
  PhasePoint p = make_unit_speed(M, 0.3, vec1(0.2), -0.6, vec1(1.0));
  const auto basis = normal_basis(M, p);
  REQUIRE(basis.size() == 1);
  const MetricJet jet = metric_jet(M, p.x, p.y);
  const VectorXd v = coordinate_velocity(M, p);
  CHECK(std::abs(basis[0].dot(jet.g * v)) < 1e-12);
  CHECK(basis[0].dot(jet.g * basis[0]) == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::Matrix2d frame;
  frame.col(0) = v;
  frame.col(1) = basis[0];
  CHECK(frame.determinant() > 0);
}

TEST_CASE("near-flat collar carries affine Jacobi fields") {
  // alpha -> 0 is the Euclidean half-plane; a field with J(0) = 0 and
  // Jdot(0) = e_y must stay within O(alpha) of J(t) = t e_y.
  const double a = 1e-3;
  const GasGiantMetric M = model_metric(a, 5.0);
  const PhasePoint start = make_unit_speed(M, 4.0, vec1(0.0), -1.0, vec1(0.0));
  std::vector<JacobiState> fields{
      make_state(0.0, 0.0, 0.0, std::pow(4.0, -a))};
  const JacobiRun run = jacobi_run(M, start, fields, {}, /*x_floor=*/2.0);
  REQUIRE(run.t.size() > 4);
  CHECK(run.t.back() > 1.5);  // x(t) ~ 4 - t down to x = 2
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    const auto& f = run.fields[i][0];
    CHECK(std::abs(f.W1(0)) < 1e-3);
    CHECK(std::abs(f.W1(1) - run.t[i]) < 1e-3 * (1 + run.t[i]));
  }
}

TEST_CASE("model vertical ray: tangential field is exactly parallel") {
  // alpha = 1, h = 1, vertical descent: the tangential row of F and G
  // vanishes identically, so J = e_y with Jdot = 0 is preserved all the way
  // into the boundary, and D_t J = x^alpha W2 stays zero.
  const GasGiantMetric M = model_metric(1.0, 2.0);
  const PhasePoint start = make_unit_speed(M, 1.0, vec1(0.0), -1.0, vec1(0.0));
  std::vector<JacobiState> fields{make_state(0.0, 1.0, 0.0, 0.0)};
  const JacobiRun run = jacobi_run(M, start, fields, {}, /*x_floor=*/1e-6);
  CHECK(run.status == TrajStatus::exited);
  CHECK(run.base.back().x == doctest::Approx(1e-6).epsilon(1e-3));
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    const auto& f = run.fields[i][0];
    CHECK(std::abs(f.W1(0)) < 1e-8);
    CHECK(f.W1(1) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(f.W2.norm() < 1e-8);
  }
  CHECK(run.sup_ratio <= 1.0 + 1e-8);
}

TEST_CASE("Jacobi fields match finite-difference geodesic variations") {
  // Independent oracle: perturb the initial position of a cycloid orbit by
  // +-delta J0 (same momentum covector) and compare the central difference of
  // the two flows against the co-integrated field. This checks F and G,
  // including all signs, against nothing but the Hamiltonian flow itself.
  const GasGiantMetric M = model_metric(1.0);
  const double x0 = 0.5, y0 = 0.1;
  const PhasePoint start = make_unit_speed(M, x0, vec1(y0), 0.0, vec1(1.0));

  const Eigen::Vector2d J0(0.3, -0.2);
  const double delta = 1e-5;
  auto shifted = [&](double s) {
    PhasePoint p = start;
    p.x += s * J0(0);
    p.y(0) += s * J0(1);
    return p;
  };
  // coordinate Jdot(0) from the velocity field at frozen momentum
  const VectorXd vp = coordinate_velocity(M, shifted(delta));
  const VectorXd vm = coordinate_velocity(M, shifted(-delta));
  const VectorXd Jdot0 = (vp - vm) / (2 * delta);

  std::vector<JacobiState> fields(1);
  fields[0].W1 = J0;
  fields[0].W2 = std::pow(x0, -1.0) * Jdot0;
  const JacobiRun run = jacobi_run(M, start, fields, {}, /*x_floor=*/5e-3);
  CHECK(run.status == TrajStatus::exited);

  const Trajectory plus = integrate_to_boundary(M, shifted(delta));
  const Trajectory minus = integrate_to_boundary(M, shifted(-delta));
  const double t_max = 0.95 * std::min(plus.t_end, minus.t_end);
  int checked = 0;
  for (std::size_t i = 1; i < run.t.size(); i += 3) {
    const double t = run.t[i];
    if (t > t_max) break;
    const PhasePoint pp = plus.state_at(t);
    const PhasePoint pm = minus.state_at(t);
    const Eigen::Vector2d fd((pp.x - pm.x) / (2 * delta),
                             (pp.y(0) - pm.y(0)) / (2 * delta));
    CHECK((run.fields[i][0].W1 - fd).norm() < 1e-4 * (1 + fd.norm()));
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("cycloid orbits carry no conjugate points") {
  const GasGiantMetric M = model_metric(1.0);
  for (double x0 : {0.05, 0.3, 0.8}) {
    const PhasePoint start = make_unit_speed(M, x0, vec1(0.0), 0.0, vec1(1.0));
    const JacobiRun run = jacobi_run(M, start, {}, {}, /*x_floor=*/1e-3);
    CHECK(run.status == TrajStatus::exited);
    CHECK(conjugate_point_scan(run).empty());
    // growth bound: log of the worst amplification is below int ||A||_F dt
    CHECK(std::log(run.sup_ratio) <= run.gronwall_log + 1e-9);
    CHECK(run.gronwall_log > 0);
  }
}

TEST_CASE("sign-change scanner recovers the sphere conjugate time") {
  // J'' + J = 0, J(0) = 0, J'(0) = 1, integrated independently: the scanner
  // must report exactly one crossing near t = pi and ignore the initial zero.
  OdeRhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& f) {
    f.resize(2);
    f(0) = y(1);
    f(1) = -y(0);
  };
  Eigen::VectorXd y0(2);
  y0 << 0.0, 1.0;
  const OdeSolution sol = integrate_dopri5(rhs, 0.0, 3.5, y0);
  std::vector<double> t, v;
  for (const auto& s : sol.samples) {
    t.push_back(s.t);
    v.push_back(s.y(0));
  }
  const auto crossings = scan_sign_changes(t, v);
  REQUIRE(crossings.size() == 1);
  CHECK(crossings[0] == doctest::Approx(M_PI).epsilon(1e-4));

  // all-positive data: no crossings even with a zero leading entry
  const auto none = scan_sign_changes({0, 1, 2, 3}, {0, 1e-12, 0.5, 1.0});
  CHECK(none.empty());
}

TEST_CASE("symplectic pairing of two fields is conserved") {
  const GasGiantMetric M = model_metric(1.0);
  const double x0 = 0.4;
  const PhasePoint start = make_unit_speed(M, x0, vec1(0.0), 0.0, vec1(1.0));
  const MetricJet jet = metric_jet(M, start.x, start.y);
  const VectorXd N = normal_basis(M, start)[0];
  const double xa = std::pow(x0, 1.0);
  const VectorXd v = coordinate_velocity(M, start);

  JacobiState a;  // J = 0, D_t J = N
  a.W1 = Eigen::VectorXd::Zero(2);
  a.W2 = N / xa;
  JacobiState b;  // J = N, D_t J = 0  =>  W2 = -Gamma(v) N / x^alpha
  b.W1 = N;
  b.W2.resize(2);
  for (int i = 0; i < 2; ++i)
    b.W2(i) = -v.dot(jet.gamma[std::size_t(i)] * N) / xa;

  const double p0 = symplectic_pairing(M, start, a, b);
  CHECK(std::abs(p0) > 1e-3);
  const JacobiRun run = jacobi_run(M, start, {a, b}, {}, /*x_floor=*/1e-3);
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    const double p = symplectic_pairing(M, run.base[i], run.fields[i][0],
                                        run.fields[i][1]);
    CHECK(p == doctest::Approx(p0).epsilon(1e-7));
  }
}

TEST_CASE("simplicity certificate passes on the model collar") {
  const GasGiantMetric M = model_metric(1.0);
  GeoOptions opts;
  opts.rtol = 1e-8;
  opts.atol = 1e-10;
  const SimplicityReport rep = simplicity_certificate(M, 12, opts);
  CHECK(rep.pass);
  CHECK(rep.orbits == 144);
  CHECK(rep.trapped_count == 0);
  CHECK(rep.conjugate_count == 0);
  CHECK(rep.witness.empty());
  CHECK(rep.min_injectivity_gap > 1e-6);
  CHECK(rep.max_gronwall_ratio <= 1.0 + 1e-9);
  CHECK(rep.max_length < 50.0);
}

TEST_CASE("simplicity certificate flags a trapping well") {
  // h(x) = 1 / (1 + 5 bump(x)) puts a barrier into the effective radial
  // potential W = x^alpha / h = x^alpha (1 + 5 bump): an apex start above the
  // barrier (x0 = 0.7 sits on the sweep grid) descends, turns where W climbs
  // back to its launch level, and oscillates forever between two interior
  // turning points.
  const double a = 1.0;
  auto h = [](double x, double) {
    const double u = (x - 0.3) / 0.07;
    return 1.0 / (1.0 + 5.0 * std::exp(-u * u));
  };
  const GasGiantMetric M(a, 2,
                         std::make_shared<ScalarFunctionFamily>(
                             h, nullptr, nullptr, /*y_indep=*/true),
                         1.0);
  GeoOptions opts;
  opts.rtol = 1e-8;
  opts.atol = 1e-10;
  opts.length_budget = 12.0;
  const SimplicityReport rep = simplicity_certificate(M, 8, opts);
  CHECK_FALSE(rep.pass);
  CHECK(rep.trapped_count > 0);
  CHECK_FALSE(rep.witness.empty());
}
