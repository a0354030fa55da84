// Acceptance harness: one line per criterion, exit 0 iff all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "gasgiant/jacobi.hpp"
#include "gasgiant/profile.hpp"
#include "gasgiant/spectral.hpp"
#include "gasgiant/xray.hpp"

using namespace gasgiant;
using Eigen::VectorXd;

namespace {

GasGiantMetric flat_metric(double alpha, int dim = 2, double x_max = 1.0) {
  return GasGiantMetric(alpha, dim, std::make_shared<FlatFamily>(dim - 1),
                        x_max);
}

VectorXd vec1(double v) {
  VectorXd out(1);
  out << v;
  return out;
}

double smooth_bump(double s) {
  if (std::abs(s) >= 1) return 0;
  return std::exp(1 - 1 / (1 - s * s));
}

// k-th positive zero of the order-1 Bessel function
double j1_zero(int k) {
  auto f = [](double x) { return std::cyl_bessel_j(1.0, x); };
  double lo = 3.8317 + (k - 1) * M_PI - 1.2, hi = lo + 2.4;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(lo) * f(mid) <= 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

struct Harness {
  int failures = 0;

  void run(int id, const std::string& label,
           const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("criterion %2d: %s  %s (%.1f s)%s%s\n", id,
                ok ? "PASS" : "FAIL", label.c_str(), dt,
                detail.empty() ? "" : "  -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

bool near_rel(double got, double expect, double tol) {
  return std::abs(got - expect) <= tol * std::abs(expect);
}
bool near_abs(double got, double expect, double tol) {
  return std::abs(got - expect) <= tol;
}

bool check(bool cond, const std::string& what, std::string& detail) {
  if (!cond && detail.empty()) detail = what;
  return cond;
}

}  // namespace

int main() {
  Harness h;

  h.run(1, "cycloid geodesic oracle", [](std::string& d) {
    const GasGiantMetric M = flat_metric(1.0);
    bool ok = true;
    for (double x0 : {0.5, 0.25}) {
      const Trajectory tr =
          integrate_to_boundary(M, make_unit_speed(M, x0, vec1(0.0), 0.0, vec1(1.0)));
      ok &= check(tr.status == TrajStatus::exited, "no exit", d);
      ok &= check(near_abs(tr.exit_record->T, M_PI * std::sqrt(x0), 1e-6),
                  "exit time", d);
      ok &= check(near_abs(tr.exit_record->y_bar(0), M_PI * x0 / 2, 1e-6),
                  "endpoint", d);
      // unit speed: arc length equals elapsed time
      ok &= check(near_abs(tr.exit_record->length, tr.exit_record->T, 1e-6),
                  "length", d);
    }
    for (double dy : {1.0, 0.3, 0.0625}) {
      const ConnectionResult c = connect_boundary_points(M, 0.0, dy);
      ok &= check(near_rel(c.d_g, 2 * std::sqrt(M_PI * dy), 1e-5),
                  "chord distance", d);
    }
    return ok;
  });

  h.run(2, "exit expansion constants and exponents", [](std::string& d) {
    bool ok = true;
    for (double a : {0.5, 1.0, 1.5}) {
      const GasGiantMetric M = flat_metric(a);
      const Trajectory tr = trace_from_boundary(M, vec1(0.0), vec1(1.5));
      const ExpansionFit f = expansion_fit(M, tr);
      ok &= check(near_rel(f.c_alpha_fit, expected_c_alpha(a), 0.01),
                  "c_alpha at a=" + std::to_string(a), d);
      ok &= check(
          near_rel(f.c_alpha_prime_fit, expected_c_alpha_prime(a), 0.02),
          "c_alpha_prime at a=" + std::to_string(a), d);
      ok &= check(near_abs(f.exponent_x, 2 / (2 - a), 0.01), "exponent_x", d);
      ok &= check(near_abs(f.exponent_y, (2 + a) / (2 - a), 0.01),
                  "exponent_y", d);
    }
    return ok;
  });

  h.run(3, "exit-time scaling law", [](std::string& d) {
    bool ok = true;
    for (double a : {0.5, 1.0, 1.5}) {
      const GasGiantMetric M = flat_metric(a);
      const RateFit f = exit_time_scaling(M, vec1(0.0), vec1(1.0));
      ok &= check(near_abs(f.slope, 1 - a / 2, 0.01),
                  "slope at a=" + std::to_string(a), d);
      if (a == 1.0)
        ok &= check(near_rel(f.prefactor(), M_PI, 0.005), "pi prefactor", d);
    }
    return ok;
  });

  h.run(4, "curvature laws near the boundary", [](std::string& d) {
    bool ok = true;
    const double x = 1e-4;
    for (double a : {0.5, 1.0, 1.5}) {
      const GasGiantMetric M3 = flat_metric(a, 3);
      const VectorXd y0 = VectorXd::Zero(2);
      const double kr =
          sectional_curvature(M3, x, y0, {PlanePair::RadialTangential, 0});
      const double kt = sectional_curvature(
          M3, x, y0, {PlanePair::TangentialTangential, 0, 1});
      ok &= check(near_rel(std::pow(x, 2 - a) * kr, -a / 2, 0.01),
                  "radial limit at a=" + std::to_string(a), d);
      ok &= check(near_rel(std::pow(x, 2 - a) * kt, -a * a / 4, 0.01),
                  "tangential limit at a=" + std::to_string(a), d);
      const CurvatureDistanceLaw law = curvature_distance_law(M3, true);
      ok &= check(near_rel(law.radial_fitted, law.radial_constant, 0.01),
                  "distance-form radial", d);
      ok &= check(
          near_rel(law.tangential_fitted, law.tangential_constant, 0.01),
          "distance-form tangential", d);
      ok &= check(near_rel(law.radial_constant, -2 * a / ((2 - a) * (2 - a)),
                           1e-12),
                  "radial constant formula", d);
      ok &= check(near_rel(law.tangential_constant,
                           -a * a / ((2 - a) * (2 - a)), 1e-12),
                  "tangential constant formula", d);
    }
    // flat 2D at alpha = 1 is exactly K = -1/(2x)
    const GasGiantMetric M = flat_metric(1.0);
    for (double xx : {1e-2, 1e-4}) {
      const double k =
          sectional_curvature(M, xx, vec1(0.0), {PlanePair::RadialTangential, 0});
      ok &= check(near_rel(k, -1 / (2 * xx), 1e-9), "exact 2D curvature", d);
    }
    return ok;
  });

  h.run(5, "boundary distance comparability", [](std::string& d) {
    bool ok = true;
    for (double a : {0.5, 1.0}) {
      const GasGiantMetric M = flat_metric(a);
      const BoundaryDistanceLaw law = boundary_distance_exponent(M, 0.0, 4, 12);
      ok &= check(near_abs(law.fit.slope, 1 - a / 2, 0.01),
                  "slope at a=" + std::to_string(a), d);
      ok &= check(near_abs(law.alpha_recovered, a, 0.02), "alpha recovery", d);
    }
    return ok;
  });

  h.run(6, "boundary Hausdorff dimension", [](std::string& d) {
    bool ok = true;
    for (double a : {0.5, 1.0}) {
      const GasGiantMetric M = flat_metric(a);
      const double dim = hausdorff_dimension_boundary(M);
      ok &= check(near_rel(dim, 2 / (2 - a), 0.05),
                  "dimension at a=" + std::to_string(a), d);
    }
    return ok;
  });

  h.run(7, "volume growth exponent", [](std::string& d) {
    bool ok = true;
    const GasGiantMetric M31 = flat_metric(1.0, 3);
    const VolumeGrowth g = volume_growth_fit(M31);
    ok &= check(near_abs(g.fitted_exponent, -0.5, 0.02), "(3,1) exponent", d);
    ok &= check(!g.logarithmic, "(3,1) wrongly logarithmic", d);
    const GasGiantMetric Mlog = flat_metric(1.0, 2);  // alpha = 2/n
    ok &= check(volume_growth_fit(Mlog).logarithmic, "log regime missed", d);
    return ok;
  });

  h.run(8, "transport equation residual", [](std::string& d) {
    const GasGiantMetric M = flat_metric(1.0);
    const ScalarField f{[](double x, const VectorXd& y) {
                          const double s = std::sin(M_PI * y(0));
                          return x * x * x * x * (0.5 + s * s);
                        },
                        4};
    bool ok = true;
    const double r_fine = transport_residual(M, f, 3, 3, 8, 0.2, 0.7, 1e-4);
    ok &= check(r_fine < 1e-6, "sup residual", d);
    const double r1 = transport_residual(M, f, 3, 3, 8, 0.2, 0.7, 0.02);
    const double r2 = transport_residual(M, f, 3, 3, 8, 0.2, 0.7, 0.01);
    ok &= check(r1 / r2 > 3.5 && r1 / r2 < 4.5, "stencil order ratio", d);
    return ok;
  });

  h.run(9, "bundle energy identity and boundary flux", [](std::string& d) {
    const GasGiantMetric M = flat_metric(1.0);
    SphereBundleField u;
    u.u = [](double x, double y, double theta) {
      return smooth_bump((x - 0.55) / 0.3) * smooth_bump((y - 0.5) / 0.2) *
             (0.3 + std::cos(theta) + 0.2 * std::sin(2 * theta));
    };
    bool ok = true;
    const PestovTerms p = pestov_terms(M, u, 0.1, 128);
    ok &= check(std::abs(p.residual) < 1e-3, "identity residual", d);

    // manufactured zero-transform pair: f = -X u0
    SphereBundleField u0;
    u0.u = [](double x, double y, double th) {
      return std::pow(x / 0.3, 4.0) * smooth_bump((x - 0.3) / 0.25) *
             (1 + 0.3 * std::sin(2 * M_PI * y)) * (1 + 0.4 * std::cos(th));
    };
    const SphereBundleField f = transport_source(M, u0);
    const double b1 = std::abs(pestov_boundary_flux(M, f, 0.2, 8, 16));
    const double b2 = std::abs(pestov_boundary_flux(M, f, 0.1, 8, 16));
    const double b3 = std::abs(pestov_boundary_flux(M, f, 0.05, 8, 16));
    ok &= check(b2 < b1 && b3 < b2, "flux not decreasing", d);
    return ok;
  });

  h.run(10, "discrete ray-matrix injectivity", [](std::string& d) {
    const GasGiantMetric M = flat_metric(1.0);
    std::vector<double> mins;
    for (unsigned seed : {11u, 12u, 13u})
      mins.push_back(
          discrete_injectivity_probe(M, 10, 10, 800, seed).sigma_min);
    const double mean =
        std::accumulate(mins.begin(), mins.end(), 0.0) / double(mins.size());
    bool ok = true;
    for (double m : mins) {
      ok &= check(m > 0, "sigma_min not positive", d);
      ok &= check(std::abs(m - mean) <= 0.2 * mean, "sigma_min unstable", d);
    }
    return ok;
  });

  h.run(11, "spectral oracle", [](std::string& d) {
    const EigenTable t = truncation_ladder(1.0, 2, 0.0, 5, 4, 14, 600);
    bool ok = true;
    for (int j = 1; j <= 5; ++j) {
      const double oracle = std::pow(j1_zero(j) / 2, 2.0);
      ok &= check(near_rel(t.lambda_limit[std::size_t(j - 1)], oracle, 1e-3),
                  "lambda_" + std::to_string(j), d);
    }
    ok &= check(near_rel(t.lambda_limit[0], 3.67049, 1e-3), "lambda_1 value", d);
    return ok;
  });

  h.run(12, "eigenvalue truncation rate", [](std::string& d) {
    struct Triple {
      int n;
      double alpha;
    };
    bool ok = true;
    for (const Triple tr : {Triple{2, 1.0}, Triple{4, 1.0}, Triple{3, 0.5}}) {
      const EigenTable t = truncation_ladder(tr.alpha, tr.n, 0.0, 3, 4, 14, 600);
      const double expect = tr.alpha * (tr.n / 2.0 - 1) + 1;
      for (double s : t.slopes)
        ok &= check(near_abs(s, expect, 0.1),
                    "slope (" + std::to_string(tr.n) + ")", d);
    }
    return ok;
  });

  h.run(13, "indicial root and self-adjointness table", [](std::string& d) {
    bool ok = true;
    int points = 0;
    for (double a : {0.125, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75}) {
      for (int n : {2, 3, 4, 5, 6}) {
        const IndicialData id = indicial_data(a, n);
        ok &= check(id.gamma_minus == 0.0, "gamma_minus", d);
        ok &= check(id.gamma_plus == a * (n / 2.0 - 1) + 1, "gamma_plus", d);
        ok &= check(id.mu_minus == (n * a / 2 - 1) / 2, "mu_minus", d);
        ok &= check(id.mu_plus == id.mu_minus + (2 - a), "mu_plus", d);
        ok &= check((id.mu_minus + id.mu_plus) / 2 ==
                        (id.gamma_minus + id.gamma_plus) / 2,
                    "midpoint identity", d);
        ok &= check(id.essentially_self_adjoint == (a > 2.0 / n),
                    "self-adjointness window", d);
        ++points;
      }
    }
    ok &= check(points == 40, "sweep size", d);
    return ok;
  });

  h.run(14, "polytrope profile oracles", [](std::string& d) {
    bool ok = true;
    const PolytropeProfile p0 = lane_emden(0.0);
    double sup0 = 0;
    for (std::size_t i = 0; i < p0.r.size(); ++i)
      sup0 = std::max(sup0, std::abs(p0.theta[i] - (1 - p0.r[i] * p0.r[i] / 6)));
    ok &= check(sup0 < 1e-9, "index 0 profile", d);

    const PolytropeProfile p1 = lane_emden(1.0);
    double sup1 = 0;
    for (std::size_t i = 0; i < p1.r.size(); ++i) {
      const double exact = p1.r[i] == 0 ? 1.0 : std::sin(p1.r[i]) / p1.r[i];
      sup1 = std::max(sup1, std::abs(p1.theta[i] - exact));
    }
    ok &= check(sup1 < 1e-9, "index 1 profile", d);

    const PolytropeProfile p53 = lane_emden(5.0 / 3.0);
    ok &= check(near_abs(p53.alpha_fit, 1.0, 0.01), "alpha fit at 5/3", d);
    return ok;
  });

  if (h.failures) {
    std::printf("%d criterion(s) FAILED\n", h.failures);
    return 2;
  }
  std::printf("all 14 criteria PASS\n");
  return 0;
}
