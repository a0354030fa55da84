#include <cmath>

#include "doctest.h"
#include "gasgiant/ode.hpp"

using namespace gasgiant;

TEST_CASE("harmonic oscillator over many periods") {
  OdeRhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& f) {
    f.resize(2);
    f(0) = y(1);
    f(1) = -y(0);
  };
  Eigen::VectorXd y0(2);
  y0 << 1.0, 0.0;
  const double T = 20 * M_PI;
  const OdeSolution sol = integrate_dopri5(rhs, 0.0, T, y0);
  CHECK(sol.samples.back().y(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(sol.samples.back().y(1)) < 1e-7);
}

TEST_CASE("dense output is accurate inside steps") {
  OdeRhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& f) {
    f = -y;
  };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  const OdeSolution sol = integrate_dopri5(rhs, 0.0, 2.0, y0);
  for (double t : {0.1, 0.77, 1.3, 1.99})
    CHECK(sol.at(t)(0) == doctest::Approx(std::exp(-t)).epsilon(1e-7));
}

TEST_CASE("event location finds a zero crossing to high accuracy") {
  OdeRhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& f) {
    f.resize(2);
    f(0) = y(1);
    f(1) = -y(0);
  };
  Eigen::VectorXd y0(2);
  y0 << 1.0, 0.0;  // cos(t): first zero at pi/2
  std::vector<OdeEvent> ev(1);
  ev[0].g = [](double, const Eigen::VectorXd& y) { return y(0); };
  const OdeSolution sol = integrate_dopri5(rhs, 0.0, 10.0, y0, {}, ev);
  REQUIRE(sol.event_hit);
  CHECK(sol.t_event == doctest::Approx(M_PI / 2).epsilon(1e-10));
}

TEST_CASE("backward integration works") {
  OdeRhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& f) {
    f = y;
  };
  Eigen::VectorXd y0(1);
  y0 << std::exp(1.0);
  const OdeSolution sol = integrate_dopri5(rhs, 1.0, 0.0, y0);
  CHECK(sol.samples.back().y(0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("adaptive quadrature") {
  const double v =
      integrate_adaptive([](double x) { return std::sin(x); }, 0.0, M_PI);
  CHECK(v == doctest::Approx(2.0).epsilon(1e-11));
}
