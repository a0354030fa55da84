#include "gasgiant/common.hpp"

#include <algorithm>
#include <cstddef>

namespace gasgiant {

RateFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "fit_linear: need >= 2 samples");
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  require(std::abs(denom) > 0, "fit_linear: degenerate abscissae");
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.n_samples = static_cast<int>(n);
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

RateFit fit_loglog(const std::vector<double>& s, const std::vector<double>& v) {
  require(s.size() == v.size(), "fit_loglog: size mismatch");
  std::vector<double> ls(s.size()), lv(v.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    require(s[i] > 0 && v[i] > 0, "fit_loglog: nonpositive sample");
    ls[i] = std::log(s[i]);
    lv[i] = std::log(v[i]);
  }
  return fit_linear(ls, lv);
}

CheckedFit fit_loglog_checked(const std::vector<double>& s,
                              const std::vector<double>& v,
                              double expected_slope, double tolerance) {
  require(s.size() >= 4, "fit_loglog: need >= 4 samples");
  auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  require(*lo > 0, "fit_loglog: nonpositive abscissa");
  require(*hi / *lo >= 100.0, "fit_loglog: samples must span >= 2 decades");
  const RateFit fit = fit_loglog(s, v);
  CheckedFit out;
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  out.pass = std::abs(fit.slope - expected_slope) <= tolerance;
  return out;
}

double bisect(const std::function<double(double)>& f, double a, double b,
              double xtol, int max_iter) {
  double fa = f(a), fb = f(b);
  if (fa == 0) return a;
  if (fb == 0) return b;
  require(fa * fb < 0, "bisect: endpoints do not bracket a root");
  for (int i = 0; i < max_iter && (b - a) > xtol; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0) return m;
    if (fa * fm < 0) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
  }
  return 0.5 * (a + b);
}

double aitken_limit(const std::vector<double>& seq) {
  require(seq.size() >= 3, "aitken_limit: need >= 3 terms");
  const std::size_t n = seq.size();
  const double a0 = seq[n - 3], a1 = seq[n - 2], a2 = seq[n - 1];
  const double denom = a2 - 2 * a1 + a0;
  if (std::abs(denom) < 1e-300) return a2;
  return a2 - (a2 - a1) * (a2 - a1) / denom;
}

}  // namespace gasgiant
