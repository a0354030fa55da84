#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gasgiant {

/// Result of a least-squares line fit on (log s, log v).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;   // intercept in log space; prefactor = exp(intercept)
  double rms_residual = 0.0;
  int n_samples = 0;
  double prefactor() const { return std::exp(intercept); }
};

/// Ordinary least squares on (log s, log v). Throws on nonpositive input values.
RateFit fit_loglog(const std::vector<double>& s, const std::vector<double>& v);

/// fit_loglog with the experiment contract: >= 4 samples spanning >= 2 decades.
struct CheckedFit {
  double slope = 0.0;
  double intercept = 0.0;
  bool pass = false;
};
CheckedFit fit_loglog_checked(const std::vector<double>& s,
                              const std::vector<double>& v,
                              double expected_slope, double tolerance);

/// Plain linear least squares y = a*x + b.
RateFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);

/// Bisection for a bracketed root of f on [a, b]; f(a), f(b) must have opposite signs.
double bisect(const std::function<double(double)>& f, double a, double b,
              double xtol, int max_iter = 200);

/// Aitken delta-squared extrapolation of the tail of a sequence.
double aitken_limit(const std::vector<double>& seq);

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace gasgiant
