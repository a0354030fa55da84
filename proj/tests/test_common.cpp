#include <cmath>

#include "doctest.h"
#include "gasgiant/common.hpp"

using namespace gasgiant;

TEST_CASE("loglog fit recovers a pure power law") {
  std::vector<double> s, v;
  for (int k = 0; k < 8; ++k) {
    const double x = std::pow(10.0, -k * 0.5);
    s.push_back(x);
    v.push_back(x * x);
  }
  const RateFit fit = fit_loglog(s, v);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("loglog fit with a controlled perturbation") {
  std::vector<double> s, v;
  for (int k = 0; k <= 12; ++k) {
    const double x = 1e-6 * std::pow(10.0, 0.25 * k);  // [1e-6, 1e-3]
    s.push_back(x);
    v.push_back(3.0 * std::sqrt(x) * (1 + 0.01 * x));
  }
  const RateFit fit = fit_loglog(s, v);
  CHECK(std::abs(fit.slope - 0.5) < 1e-3);
  CHECK(fit.prefactor() == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("checked fit enforces the sample contract") {
  std::vector<double> s = {1e-1, 1e-2, 1e-3};
  std::vector<double> v = {1e-1, 1e-2, 1e-3};
  CHECK_THROWS(fit_loglog_checked(s, v, 1.0, 0.1));  // only 3 samples
  s = {1.0, 0.5, 0.25, 0.9};
  v = {1.0, 0.5, 0.25, 0.9};
  CHECK_THROWS(fit_loglog_checked(s, v, 1.0, 0.1));  // < 2 decades
  s = {1.0, 1e-1, 1e-2, 1e-3};
  v = {2.0, 2e-1, 2e-2, 2e-3};
  const CheckedFit ok = fit_loglog_checked(s, v, 1.0, 0.01);
  CHECK(ok.pass);
}

TEST_CASE("bisection locates a bracketed root") {
  const double r = bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-13);
  CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("aitken extrapolation accelerates geometric convergence") {
  std::vector<double> seq;
  for (int k = 0; k < 6; ++k) seq.push_back(5.0 + std::pow(0.5, k));
  CHECK(aitken_limit(seq) == doctest::Approx(5.0).epsilon(1e-12));
}
