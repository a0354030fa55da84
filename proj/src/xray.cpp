#include "gasgiant/xray.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace gasgiant {

namespace {

void parallel_for(int n, const std::function<void(int)>& body) {
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned i = 0; i + 1 < std::min(hw, 8u); ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

// A few fixed-step RK4 substeps of the cogeodesic flow; used for the short
// flow-differencing displacements where adaptive control is overkill.
PhasePoint flow_rk4(const GasGiantMetric& metric, const PhasePoint& p0,
                    double s) {
  const int n_sub = std::max(1, int(std::ceil(std::abs(s) / 1e-3)));
  const double h = s / n_sub;
  auto add = [](const PhasePoint& p, const PhasePoint& d, double c) {
    PhasePoint q;
    q.x = p.x + c * d.x;
    q.y = p.y + c * d.y;
    q.xi = p.xi + c * d.xi;
    q.eta = p.eta + c * d.eta;
    return q;
  };
  PhasePoint p = p0;
  for (int k = 0; k < n_sub; ++k) {
    const PhasePoint k1 = hamiltonian_rhs(metric, p);
    const PhasePoint k2 = hamiltonian_rhs(metric, add(p, k1, h / 2));
    const PhasePoint k3 = hamiltonian_rhs(metric, add(p, k2, h / 2));
    const PhasePoint k4 = hamiltonian_rhs(metric, add(p, k3, h));
    p.x += h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    p.y += h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
    p.xi += h / 6 * (k1.xi + 2 * k2.xi + 2 * k3.xi + k4.xi);
    p.eta += h / 6 * (k1.eta + 2 * k2.eta + 2 * k3.eta + k4.eta);
  }
  return p;
}

double scalar_h(const GasGiantMetric& metric, double x, double y) {
  Eigen::MatrixXd h, dhx;
  std::vector<Eigen::MatrixXd> dhy;
  Eigen::VectorXd yv(1);
  yv << y;
  metric.family_eval(x, yv, h, dhx, dhy);
  return h(0, 0);
}

}  // namespace

bool verify_vanishing_order(const ScalarField& field, int y_dim,
                            double bound_scale) {
  const int order = field.vanishing_order < 0 ? 6 : field.vanishing_order;
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> uy(0.0, 1.0);
  for (int k = 0; k < 24; ++k) {
    const double x = 1e-2 * std::pow(10.0, -4.0 * k / 23);
    for (int trial = 0; trial < 8; ++trial) {
      Eigen::VectorXd y(y_dim);
      for (int i = 0; i < y_dim; ++i) y(i) = uy(rng);
      if (std::abs(field(x, y)) > bound_scale * std::pow(x, order))
        return false;
    }
  }
  return true;
}

double xray_transform(const GasGiantMetric& metric, const ScalarField& field,
                      const RaySpec& ray, const GeoOptions& opts) {
  const Trajectory traj = trace_from_boundary(metric, ray.y, ray.eta, opts);
  require(traj.status == TrajStatus::exited, "ray does not exit");
  return traj.integrate_scalar(
      [&](double x, const Eigen::VectorXd& y) { return field(x, y); });
}

namespace {

// Shared reflection loop: integrate `piece` over each forward leg until the
// orbit exits through x = 0. Orbits reflect at x = x_max (the collar stands
// in for a closed manifold; truncating there instead would make u^f
// discontinuous in the direction).
double uf_reflect_loop(
    const GasGiantMetric& metric, const PhasePoint& start,
    const GeoOptions& opts,
    const std::function<double(const Trajectory&)>& piece) {
  require(std::abs(2 * hamiltonian(metric, start) - 1) < 1e-6,
          "u^f expects a unit-speed phase point");
  GeoOptions o = opts;
  o.allow_top_exit = true;
  double total = 0;
  // rescale away interpolation-level energy drift in the start state
  PhasePoint p = start;
  const double scale = 1.0 / std::sqrt(2 * hamiltonian(metric, p));
  p.xi *= scale;
  p.eta *= scale;
  for (int bounce = 0; bounce < 12; ++bounce) {
    const Trajectory traj = integrate_to_boundary(metric, p, o);
    total += piece(traj);
    if (traj.status == TrajStatus::exited) return total;
    require(traj.status == TrajStatus::exited_top, "u^f orbit did not exit");
    p = traj.state_at(traj.t_end);
    p.x = std::min(p.x, metric.x_max() * (1 - 1e-12));
    p.xi = -std::abs(p.xi);
  }
  throw std::runtime_error("u^f orbit: too many reflections at x_max");
}

}  // namespace

double uf_integral(const GasGiantMetric& metric, const ScalarField& field,
                   const PhasePoint& start, const GeoOptions& opts) {
  return uf_reflect_loop(metric, start, opts, [&](const Trajectory& traj) {
    return traj.integrate_scalar(
        [&](double x, const Eigen::VectorXd& y) { return field(x, y); });
  });
}

double uf_integral(const GasGiantMetric& metric,
                   const SphereBundleField& field, const PhasePoint& start,
                   const GeoOptions& opts) {
  return uf_reflect_loop(metric, start, opts, [&](const Trajectory& traj) {
    return integrate_adaptive(
        [&](double t) {
          const PhasePoint q = traj.state_at(t);
          return field.u(q.x, q.y(0), bundle_angle(metric, q));
        },
        // looser than the scalar overload: flow-differenced integrands carry
        // O(h^2) noise an adaptive rule must not chase
        0.0, traj.t_end, 1e-8);
  });
}

SphereBundleField transport_source(const GasGiantMetric& metric,
                                   const SphereBundleField& u, double h) {
  SphereBundleField f;
  f.y_period = u.y_period;
  f.u = [metric, u, h](double x, double y, double theta) {
    if (x <= 0) return 0.0;  // u vanishes near the boundary by assumption
    // cap the step by the time-to-boundary scale so the difference stencil
    // stays inside the collar even for very small x
    const double hl = std::min(h, 0.1 * w_of_x(metric.alpha(), x));
    auto at = [&](double s) {
      const PhasePoint q =
          flow_rk4(metric, bundle_point(metric, x, y, theta), s);
      return u.u(q.x, q.y(0), bundle_angle(metric, q));
    };
    return -(at(hl) - at(-hl)) / (2 * hl);
  };
  return f;
}

PhasePoint bundle_point(const GasGiantMetric& metric, double x, double y,
                        double theta) {
  require(metric.dim() == 2, "bundle coordinates implemented for 2D collars");
  const double scale = std::pow(x, -metric.alpha() / 2);
  PhasePoint p;
  p.x = x;
  p.y = Eigen::VectorXd::Constant(1, y);
  p.xi = scale * std::cos(theta);
  p.eta = Eigen::VectorXd::Constant(
      1, scale * std::sqrt(scalar_h(metric, x, y)) * std::sin(theta));
  return p;
}

double bundle_angle(const GasGiantMetric& metric, const PhasePoint& p) {
  return std::atan2(p.eta(0) / std::sqrt(scalar_h(metric, p.x, p.y(0))), p.xi);
}

double transport_residual(const GasGiantMetric& metric,
                          const ScalarField& field, int nx, int ny, int ntheta,
                          double x_lo, double x_hi, double h,
                          const GeoOptions& opts) {
  require(nx > 0 && ny > 0 && ntheta > 0 && h > 0, "bad transport grid");
  std::vector<double> sup(std::size_t(nx), 0.0);
  parallel_for(nx, [&](int i) {
    const double x = x_lo + (x_hi - x_lo) * (i + 0.5) / nx;
    for (int j = 0; j < ny; ++j) {
      const double y = (j + 0.5) / ny;
      for (int k = 0; k < ntheta; ++k) {
        const double theta = 2 * M_PI * (k + 0.5) / ntheta;
        const PhasePoint p = bundle_point(metric, x, y, theta);
        const double up = uf_integral(metric, field, flow_rk4(metric, p, h),
                                      opts);
        const double um = uf_integral(metric, field, flow_rk4(metric, p, -h),
                                      opts);
        const double res = std::abs((up - um) / (2 * h) + field(p.x, p.y));
        sup[std::size_t(i)] = std::max(sup[std::size_t(i)], res);
      }
    }
  });
  double out = 0;
  for (double s : sup) out = std::max(out, s);
  return out;
}

BoundaryDeterminationReport boundary_determination_probe(
    const GasGiantMetric& metric, const ScalarField& field, double y_bar,
    int k_min, int k_max, const GeoOptions& opts) {
  require(k_min < k_max, "bad chord ladder");
  BoundaryDeterminationReport rep;
  for (int k = k_min; k <= k_max; ++k) {
    const double delta = std::pow(2.0, -k);
    const ConnectionResult con =
        connect_boundary_points(metric, y_bar, y_bar + delta, opts);
    const double integral = con.trajectory.integrate_scalar(
        [&](double x, const Eigen::VectorXd& y) { return field(x, y); });
    rep.delta.push_back(delta);
    rep.averages.push_back(integral / con.trajectory.t_end);
  }
  rep.extrapolated = aitken_limit(rep.averages);
  std::vector<double> rates;
  for (std::size_t i = 0; i + 2 < rep.averages.size(); ++i) {
    const double d1 = std::abs(rep.averages[i] - rep.averages[i + 1]);
    const double d2 = std::abs(rep.averages[i + 1] - rep.averages[i + 2]);
    if (d1 > 0 && d2 > 0) rates.push_back(std::log2(d1 / d2));
  }
  if (!rates.empty()) {
    double s = 0;
    for (double r : rates) s += r;
    rep.observed_rate = s / double(rates.size());
  }
  return rep;
}

namespace {

// Flow derivative of a bundle scalar by central differencing along the
// cogeodesic flow.
double flow_diff(const GasGiantMetric& metric, const SphereBundleField& field,
                 const PhasePoint& p, double h) {
  const PhasePoint pp = flow_rk4(metric, p, h);
  const PhasePoint pm = flow_rk4(metric, p, -h);
  const double up = field.u(pp.x, pp.y(0), bundle_angle(metric, pp));
  const double um = field.u(pm.x, pm.y(0), bundle_angle(metric, pm));
  return (up - um) / (2 * h);
}

// Horizontal derivative: transport along the geodesic of the g-perpendicular
// direction; in 2D parallel transport keeps the covector at a fixed angle to
// the auxiliary geodesic's own momentum.
double perp_diff(const GasGiantMetric& metric, const SphereBundleField& field,
                 double x, double y, double theta, double h) {
  auto shift = [&](double s) {
    const PhasePoint q =
        flow_rk4(metric, bundle_point(metric, x, y, theta + M_PI / 2), s);
    const double theta_aux = bundle_angle(metric, q);
    return field.u(q.x, q.y(0), theta_aux - M_PI / 2);
  };
  return (shift(h) - shift(-h)) / (2 * h);
}

// 4th-order centered d/dtheta.
double theta_diff(const std::function<double(double)>& u, double theta,
                  double d) {
  return (-u(theta + 2 * d) + 8 * u(theta + d) - 8 * u(theta - d) +
          u(theta - 2 * d)) /
         (12 * d);
}

}  // namespace

PestovTerms pestov_terms(const GasGiantMetric& metric,
                         const SphereBundleField& field, double eps,
                         int grid) {
  require(metric.dim() == 2, "bundle identity implemented for 2D collars");
  require(eps > 0 && eps < metric.x_max(), "bad truncation");
  require(grid >= 8, "bundle grid too coarse");
  const double a = metric.alpha();
  const double L = field.y_period;
  const int nx = grid, ny = grid, nt = grid;
  const double dx = (metric.x_max() - eps) / nx;
  const double dy = L / ny;
  const double dt = 2 * M_PI / nt;
  const double hf = 0.5 * dx;  // flow-differencing step

  struct Acc {
    double lhs = 0, t_xv = 0, t_curv = 0, t_n = 0;
  };
  std::vector<Acc> acc(static_cast<std::size_t>(nx));
  parallel_for(nx, [&](int i) {
    const double x = eps + (i + 0.5) * dx;
    Acc& A = acc[std::size_t(i)];
    for (int j = 0; j < ny; ++j) {
      const double y = (j + 0.5) * dy;
      const double K = sectional_curvature(
          metric, x, Eigen::VectorXd::Constant(1, y), {});
      const double w =
          std::pow(x, -a) * std::sqrt(scalar_h(metric, x, y)) * dx * dy * dt;
      for (int k = 0; k < nt; ++k) {
        const double theta = (k + 0.5) * dt;
        auto Xu_at = [&](double th) {
          return flow_diff(metric, field, bundle_point(metric, x, y, th), hf);
        };
        auto u_theta_at = [&](double th) {
          auto u_of = [&](double t2) { return field.u(x, y, t2); };
          return theta_diff(u_of, th, dt);
        };
        const double Xu = Xu_at(theta);
        const double dtheta_Xu = theta_diff(Xu_at, theta, dt);
        // X applied to the scalar representative of the vertical gradient
        SphereBundleField w_field;
        w_field.y_period = L;
        w_field.u = [&](double x2, double y2, double th2) {
          auto u_of = [&](double t2) { return field.u(x2, y2, t2); };
          return theta_diff(u_of, th2, dt);
        };
        const double X_dtheta_u =
            flow_diff(metric, w_field, bundle_point(metric, x, y, theta), hf);
        const double u_theta = u_theta_at(theta);
        A.lhs += w * dtheta_Xu * dtheta_Xu;
        A.t_xv += w * X_dtheta_u * X_dtheta_u;
        A.t_curv += w * K * u_theta * u_theta;
        A.t_n += w * Xu * Xu;  // coefficient dim - 1 = 1
      }
    }
  });

  PestovTerms out;
  for (const Acc& A : acc) {
    out.lhs += A.lhs;
    out.t_xv += A.t_xv;
    out.t_curv += A.t_curv;
    out.t_n += A.t_n;
  }

  // boundary components x = eps and x = x_max
  for (double xb : {eps, metric.x_max()}) {
    std::vector<double> part(std::size_t(ny), 0.0);
    parallel_for(ny, [&](int j) {
      const double y = (j + 0.5) * dy;
      const double w =
          std::pow(xb, -a / 2) * std::sqrt(scalar_h(metric, xb, y)) * dy * dt;
      for (int k = 0; k < nt; ++k) {
        const double theta = (k + 0.5) * dt;
        auto u_of = [&](double t2) { return field.u(xb, y, t2); };
        const double u = field.u(xb, y, theta);
        const double u_theta = theta_diff(u_of, theta, dt);
        const double Xu =
            flow_diff(metric, field, bundle_point(metric, xb, y, theta), hf);
        const double Hu = perp_diff(metric, field, xb, y, theta, hf);
        part[std::size_t(j)] += w * (u_theta * Hu + 2 * u * Xu);
      }
    });
    for (double p : part) out.t_boundary += p;
  }

  const double scale = std::max(
      {std::abs(out.lhs), std::abs(out.t_xv), std::abs(out.t_curv),
       std::abs(out.t_n), std::abs(out.t_boundary), 1e-300});
  out.residual =
      (out.lhs - out.t_xv + out.t_curv - out.t_n - out.t_boundary) / scale;
  return out;
}

namespace {

double flux_impl(const GasGiantMetric& metric,
                 const std::function<double(const PhasePoint&)>& uf,
                 double eps, int ny, int ntheta) {
  require(metric.dim() == 2, "bundle identity implemented for 2D collars");
  const double a = metric.alpha();
  const double dy = 1.0 / ny;
  const double dt = 2 * M_PI / ntheta;
  const double hf = 1e-3;
  std::vector<double> part(std::size_t(ny), 0.0);
  parallel_for(ny, [&](int j) {
    const double y = (j + 0.5) * dy;
    const double w =
        std::pow(eps, -a / 2) * std::sqrt(scalar_h(metric, eps, y)) * dy * dt;
    for (int k = 0; k < ntheta; ++k) {
      const double theta = (k + 0.5) * dt;
      const PhasePoint p = bundle_point(metric, eps, y, theta);
      const double u = uf(p);
      const double Xu =
          (uf(flow_rk4(metric, p, hf)) - uf(flow_rk4(metric, p, -hf))) /
          (2 * hf);
      const double dth = 1e-3;
      const double u_theta = (uf(bundle_point(metric, eps, y, theta + dth)) -
                              uf(bundle_point(metric, eps, y, theta - dth))) /
                             (2 * dth);
      auto shifted = [&](double s) {
        const PhasePoint q =
            flow_rk4(metric, bundle_point(metric, eps, y, theta + M_PI / 2), s);
        // rotate the transported frame back to the original direction
        const double th = bundle_angle(metric, q) - M_PI / 2;
        return uf(bundle_point(metric, q.x, q.y(0), th));
      };
      const double Hu = (shifted(hf) - shifted(-hf)) / (2 * hf);
      part[std::size_t(j)] += w * (u_theta * Hu + 2 * u * Xu);
    }
  });
  double out = 0;
  for (double p : part) out += p;
  return out;
}

}  // namespace

double pestov_boundary_flux(const GasGiantMetric& metric,
                            const ScalarField& field, double eps, int ny,
                            int ntheta, const GeoOptions& opts) {
  return flux_impl(
      metric,
      [&](const PhasePoint& p) { return uf_integral(metric, field, p, opts); },
      eps, ny, ntheta);
}

double pestov_boundary_flux(const GasGiantMetric& metric,
                            const SphereBundleField& field, double eps, int ny,
                            int ntheta, const GeoOptions& opts) {
  return flux_impl(
      metric,
      [&](const PhasePoint& p) { return uf_integral(metric, field, p, opts); },
      eps, ny, ntheta);
}

double cubic_bspline(double s) {
  const double t = std::abs(s);
  if (t >= 2) return 0;
  if (t >= 1) {
    const double u = 2 - t;
    return u * u * u / 6;
  }
  return (4 - 6 * t * t + 3 * t * t * t) / 6;
}

namespace {

// Tensor cubic B-splines supported inside the collar; y-splines periodic.
struct SplineBasis {
  int nx = 0, ny = 0;
  double x_lo = 0, x_hi = 0, wx = 0, wy = 0;

  double eval(int jdx, double x, double y) const {
    const int jx = jdx / ny, jy = jdx % ny;
    const double cx = x_lo + (jx + 2.0) * wx;
    double dyv = y - (jy + 0.5) * wy;
    dyv -= std::round(dyv);  // periodic wrap
    return cubic_bspline((x - cx) / wx) * cubic_bspline(dyv / wy);
  }
};

SplineBasis make_spline_basis(const GasGiantMetric& metric, int nx, int ny) {
  SplineBasis b;
  b.nx = nx;
  b.ny = ny;
  b.x_lo = 0.10 * metric.x_max();
  b.x_hi = 0.80 * metric.x_max();
  b.wx = (b.x_hi - b.x_lo) / (nx + 3);
  b.wy = 1.0 / ny;
  return b;
}

Eigen::MatrixXd spline_ray_matrix(const GasGiantMetric& metric,
                                  const SplineBasis& basis, int n_rays,
                                  unsigned seed, const GeoOptions& opts,
                                  bool duplicate_first) {
  require(metric.dim() == 2, "ray matrix implemented for 2D collars");
  const int n_basis = basis.nx * basis.ny;
  require(n_basis <= 400, "basis too large");
  require(n_rays >= 4 * n_basis, "catalog too small");
  const double x_lo = basis.x_lo, x_hi = basis.x_hi;

  // seeded catalog, stratified over (entry point, apex depth) with in-stratum
  // jitter: keeps sigma_min stable across reseeding while still resampling
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uj(0.0, 1.0);
  const double la = std::log(0.5 * x_lo), lb = std::log(1.1 * x_hi);
  int sy = int(std::round(std::sqrt(2.0 * n_rays)));
  while (n_rays % sy != 0) --sy;  // sy x (n_rays / sy) strata
  const int sa = n_rays / sy;
  std::vector<double> ray_y(static_cast<std::size_t>(n_rays));
  std::vector<double> ray_p(static_cast<std::size_t>(n_rays));
  for (int r = 0; r < n_rays; ++r) {
    const int iy = r % sy, ia = r / sy;
    ray_y[std::size_t(r)] = (iy + uj(rng)) / sy;
    const double apex = std::exp(la + (lb - la) * (ia + uj(rng)) / sa);
    const double p = std::pow(apex, -metric.alpha() / 2) *
                     std::sqrt(scalar_h(metric, apex, ray_y[std::size_t(r)]));
    ray_p[std::size_t(r)] = (uj(rng) < 0.5 ? 1.0 : -1.0) * p;
  }
  if (duplicate_first && n_rays > 1) {
    ray_y[1] = ray_y[0];
    ray_p[1] = ray_p[0];
  }

  Eigen::MatrixXd A(n_rays, n_basis);
  const int n_samp = 512;  // composite Simpson along each ray
  parallel_for(n_rays, [&](int r) {
    const Trajectory traj = trace_from_boundary(
        metric, Eigen::VectorXd::Constant(1, ray_y[std::size_t(r)]),
        Eigen::VectorXd::Constant(1, ray_p[std::size_t(r)]), opts);
    const double T = traj.t_end;
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n_basis);
    // endpoints skipped: every basis function vanishes near x = 0
    for (int i = 1; i < n_samp; ++i) {
      const double t = T * i / n_samp;
      const PhasePoint p = traj.state_at(t);
      if (p.x < 0.8 * x_lo) continue;  // outside every support
      const double sw = i % 2 == 1 ? 4.0 : 2.0;
      const double wq = sw * T / (3.0 * n_samp);
      for (int j = 0; j < n_basis; ++j) {
        const double b = basis.eval(j, p.x, p.y(0));
        if (b != 0) row(j) += wq * b;
      }
    }
    A.row(r) = row;
  });
  return A;
}

}  // namespace

InjectivityReport discrete_injectivity_probe(const GasGiantMetric& metric,
                                             int nx, int ny, int n_rays,
                                             unsigned seed,
                                             const GeoOptions& opts,
                                             bool duplicate_first) {
  const SplineBasis basis = make_spline_basis(metric, nx, ny);
  const Eigen::MatrixXd A =
      spline_ray_matrix(metric, basis, n_rays, seed, opts, duplicate_first);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
  InjectivityReport rep;
  rep.n_basis = nx * ny;
  rep.n_rays = n_rays;
  rep.sigma_min = svd.singularValues().minCoeff();
  rep.sigma_max = svd.singularValues().maxCoeff();
  rep.cond = rep.sigma_max / std::max(rep.sigma_min, 1e-300);
  rep.rank_loss = rep.sigma_min < 1e-12 * rep.sigma_max;
  return rep;
}

ScalarField near_kernel_spline_field(const GasGiantMetric& metric, int nx,
                                     int ny, int n_rays, unsigned seed,
                                     const GeoOptions& opts) {
  const SplineBasis basis = make_spline_basis(metric, nx, ny);
  const Eigen::MatrixXd A =
      spline_ray_matrix(metric, basis, n_rays, seed, opts, false);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
  const Eigen::VectorXd v = svd.matrixV().col(nx * ny - 1);
  const int n_basis = nx * ny;
  // supported in x >= 0.1 x_max, so any power-law vanishing order holds
  return {[basis, v, n_basis](double x, const Eigen::VectorXd& y) {
            double s = 0;
            for (int j = 0; j < n_basis; ++j) {
              const double b = basis.eval(j, x, y(0));
              if (b != 0) s += v(j) * b;
            }
            return s;
          },
          4};
}

}  // namespace gasgiant
