#include <cmath>

#include "doctest.h"
#include "gasgiant/profile.hpp"

using namespace gasgiant;

TEST_CASE("index-1 polytrope matches sin(r)/r") {
  const auto p = lane_emden(1.0, 3);
  CHECK(p.R == doctest::Approx(M_PI).epsilon(1e-10));
  double sup = 0;
  for (std::size_t i = 0; i < p.r.size(); ++i) {
    const double exact = std::sin(p.r[i]) / p.r[i];
    sup = std::max(sup, std::abs(p.theta[i] - exact));
  }
  CHECK(sup < 1e-9);
  CHECK(p.theta_prime_R == doctest::Approx(-1.0 / M_PI).epsilon(1e-8));
}

TEST_CASE("index-0 polytrope matches 1 - r^2/6") {
  const auto p = lane_emden(0.0, 3);
  CHECK(p.R == doctest::Approx(std::sqrt(6.0)).epsilon(1e-10));
  double sup = 0;
  for (std::size_t i = 0; i < p.r.size(); ++i)
    sup = std::max(sup, std::abs(p.theta[i] - (1 - p.r[i] * p.r[i] / 6)));
  CHECK(sup < 1e-9);
}

TEST_CASE("gas-giant polytrope has square-root sound speed at the surface") {
  const auto p = lane_emden(5.0 / 3.0, 3);
  CHECK(p.alpha_fit == doctest::Approx(1.0).epsilon(0.01));
  // theta positive inside, zero at the surface
  CHECK(p.theta_at(0.5 * p.R) > 0);
  CHECK(p.theta.back() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("lane_emden input validation") {
  CHECK_THROWS(lane_emden(-1.5, 3));
  CHECK_THROWS(lane_emden(5.0, 3, 20.0));  // index-5 profile never hits zero
}

TEST_CASE("normal form: input already adapted returns the identity chart") {
  RadialConformalSpec spec;
  spec.R = 1.0;
  spec.r_inner = 0.2;
  spec.c = [](double r) { return std::sqrt(1.0 - r); };  // c = x^{1/2}, x = R-r
  const auto nf = normal_form_radial(spec);
  CHECK(nf.alpha_fit == doctest::Approx(1.0).epsilon(1e-6));
  for (std::size_t i = 0; i < nf.x.size(); i += 100)
    CHECK(nf.x[i] == doctest::Approx(spec.R - nf.r_of_x[i]).epsilon(1e-9));
  CHECK(nf.eikonal_residual < 1e-8);
}

TEST_CASE("normal form: perturbed square-root speed") {
  RadialConformalSpec spec;
  spec.R = 1.0;
  spec.r_inner = 0.3;
  spec.c = [](double r) { return std::sqrt(1.0 - r) * (1 + (1.0 - r)); };
  const auto nf = normal_form_radial(spec);
  CHECK(nf.alpha_fit == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(nf.eikonal_residual < 1e-8);
  REQUIRE(nf.metric != nullptr);
  // returned metric is usable: jet evaluation succeeds mid-collar
  const auto jet =
      metric_jet(*nf.metric, 0.5 * nf.x_max, Eigen::VectorXd::Zero(1));
  CHECK(jet.h(0, 0) > 0);
}

TEST_CASE("normal form driven by the polytrope profile") {
  const auto p = lane_emden(5.0 / 3.0, 3);
  RadialConformalSpec spec;
  spec.R = p.R;
  spec.r_inner = 0.5 * p.R;
  spec.c = [&p](double r) { return std::sqrt(p.theta_at(r)); };
  const auto nf = normal_form_radial(spec);
  CHECK(nf.alpha_fit == doctest::Approx(1.0).epsilon(0.01));
}
