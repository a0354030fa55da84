#include "gasgiant/geodesic.hpp"

#include <cmath>
#include <stdexcept>

namespace gasgiant {

double x_of_w(double alpha, double w) {
  const double p = 1 - alpha / 2;
  return std::pow(p * w, 1.0 / p);
}

double w_of_x(double alpha, double x) {
  const double p = 1 - alpha / 2;
  return std::pow(x, p) / p;
}

double hamiltonian(const GasGiantMetric& metric, const PhasePoint& p) {
  Eigen::MatrixXd h, dhx;
  std::vector<Eigen::MatrixXd> dhy;
  metric.family_eval(p.x, p.y, h, dhx, dhy);
  const double xa = std::pow(p.x, metric.alpha());
  return 0.5 * xa * (p.xi * p.xi + p.eta.dot(h.llt().solve(p.eta)));
}

PhasePoint hamiltonian_rhs(const GasGiantMetric& metric, const PhasePoint& p) {
  const double a = metric.alpha();
  Eigen::MatrixXd h, dhx;
  std::vector<Eigen::MatrixXd> dhy;
  metric.family_eval(p.x, p.y, h, dhx, dhy);
  const Eigen::VectorXd hv = h.llt().solve(p.eta);
  const double xa = std::pow(p.x, a);
  const double H = 0.5 * xa * (p.xi * p.xi + p.eta.dot(hv));
  PhasePoint f;
  f.x = xa * p.xi;
  f.y = xa * hv;
  f.xi = -(a / p.x) * H + 0.5 * xa * hv.dot(dhx * hv);
  f.eta.resize(p.eta.size());
  for (int i = 0; i < p.eta.size(); ++i)
    f.eta(i) = 0.5 * xa * hv.dot(dhy[std::size_t(i)] * hv);
  return f;
}

PhasePoint make_unit_speed(const GasGiantMetric& metric, double x,
                           const Eigen::VectorXd& y, double xi_dir,
                           const Eigen::VectorXd& eta_dir) {
  PhasePoint p{x, y, xi_dir, eta_dir};
  const double twoH = 2 * hamiltonian(metric, p);
  require(twoH > 0, "make_unit_speed: zero direction");
  const double lam = 1.0 / std::sqrt(twoH);
  p.xi *= lam;
  p.eta *= lam;
  return p;
}

namespace {

// Driver for one bicharacteristic. Interior ("time") legs evolve
// z = [x, y, xi, eta, s] in t; tail legs evolve v = [t, y, eta, s] in
// w = x^{1-a/2}/(1-a/2), which keeps every right-hand side bounded at x = 0.
class Tracer {
 public:
  Tracer(const GasGiantMetric& metric, const GeoOptions& opts)
      : M(metric), opt(opts), m(metric.dim() - 1), a(metric.alpha()) {
    x_switch = opt.x_switch > 0 ? opt.x_switch
                                : std::min(1e-2, metric.x_max() / 10);
    budget = opt.length_budget > 0
                 ? opt.length_budget
                 : 50 * (2 * w_of_x(a, metric.x_max()) + 1);
    traj.dim = metric.dim();
    traj.alpha = a;
    traj.family = metric.family_ptr();
    ode.rtol = opt.rtol;
    ode.atol = opt.atol;
  }

  Trajectory from_interior(const PhasePoint& start) {
    set_energy(2 * hamiltonian(M, start));
    Eigen::VectorXd z(2 * m + 3);
    z(0) = start.x;
    z.segment(1, m) = start.y;
    z(m + 1) = start.xi;
    z.segment(m + 2, m) = start.eta;
    z(2 * m + 2) = 0;
    run_time_leg(0.0, z);
    return std::move(traj);
  }

  Trajectory from_boundary(const Eigen::VectorXd& y1,
                           const Eigen::VectorXd& eta1) {
    Eigen::MatrixXd h, dhx;
    std::vector<Eigen::MatrixXd> dhy;
    M.family_eval(0.0, y1, h, dhx, dhy);
    require(eta1.dot(h.llt().solve(eta1)) > 0,
            "boundary launch needs a nonzero tangential covector");
    set_energy(1.0);
    Eigen::VectorXd v(2 * m + 2);
    v(0) = 0;
    v.segment(1, m) = y1;
    v.segment(m + 1, m) = eta1;
    v(2 * m + 1) = 0;

    // Ascend until the tangential part of the energy reaches 1 - dominance,
    // or until x_switch, whichever comes first.
    std::vector<OdeEvent> ev(2);
    ev[0].g = [this](double w, const Eigen::VectorXd& v) {
      return den2(w, v) - opt.dominance * twoH;
    };
    ev[0].direction = -1;
    ev[1].g = [this](double, const Eigen::VectorXd& v) {
      return v(2 * m + 1) - budget;
    };
    ev[1].direction = 1;
    const double w_cap = w_of_x(a, x_switch);
    OdeSolution sol = integrate_dopri5(
        [this](double w, const Eigen::VectorXd& v, Eigen::VectorXd& f) {
          tail_rhs(+1, w, v, f);
        },
        0.0, w_cap, v, ode, ev);
    const bool hit = sol.event_hit;
    const int idx = sol.event_index;
    const double w_end = hit ? sol.t_event : sol.t_end();
    const Eigen::VectorXd ve = hit ? sol.y_event : sol.samples.back().y;
    traj.legs.push_back({true, +1, std::move(sol)});
    if (hit && idx == 1) {
      traj.status = TrajStatus::trapped_suspect;
      finish_alive(ve(0), ve(2 * m + 1));
      return std::move(traj);
    }

    // Hand over to a time leg with xi reconstructed from the energy.
    const double x = x_of_w(a, w_end);
    const double den = std::sqrt(std::max(den2(w_end, ve), 0.0));
    Eigen::VectorXd z(2 * m + 3);
    z(0) = x;
    z.segment(1, m) = ve.segment(1, m);
    z(m + 1) = den / std::pow(x, a / 2);
    z.segment(m + 2, m) = ve.segment(m + 1, m);
    z(2 * m + 2) = ve(2 * m + 1);
    run_time_leg(ve(0), z);
    return std::move(traj);
  }

 private:
  const GasGiantMetric& M;
  GeoOptions opt;
  int m;
  double a;
  double x_switch = 0, budget = 0;
  double twoH = 1;
  Trajectory traj;
  OdeOptions ode;

  void set_energy(double e) {
    require(e > 0 && std::isfinite(e), "degenerate initial momentum");
    twoH = e;
    traj.H0 = e / 2;
  }

  void time_rhs(double, const Eigen::VectorXd& z, Eigen::VectorXd& f) const {
    const double x = z(0);
    const double xi = z(m + 1);
    Eigen::MatrixXd h, dhx;
    std::vector<Eigen::MatrixXd> dhy;
    M.family_eval(x, z.segment(1, m), h, dhx, dhy);
    const Eigen::VectorXd hv = h.llt().solve(z.segment(m + 2, m));
    const double xa = std::pow(x, a);
    const double H = 0.5 * xa * (xi * xi + z.segment(m + 2, m).dot(hv));
    f.resize(2 * m + 3);
    f(0) = xa * xi;
    f.segment(1, m) = xa * hv;
    f(m + 1) = -(a / x) * H + 0.5 * xa * hv.dot(dhx * hv);
    for (int i = 0; i < m; ++i)
      f(m + 2 + i) = 0.5 * xa * hv.dot(dhy[std::size_t(i)] * hv);
    f(2 * m + 2) = std::sqrt(std::max(2 * H, 0.0));
  }

  // Squared radial momentum share 2H - x^a |eta|^2_{h^{-1}} of a tail state.
  double den2(double w, const Eigen::VectorXd& v) const {
    const double x = x_of_w(a, w);
    Eigen::MatrixXd h, dhx;
    std::vector<Eigen::MatrixXd> dhy;
    M.family_eval(x, v.segment(1, m), h, dhx, dhy);
    const Eigen::VectorXd eta = v.segment(m + 1, m);
    return twoH - std::pow(x, a) * eta.dot(h.llt().solve(eta));
  }

  // sigma = +1 ascending from the boundary (t grows with w), -1 descending.
  void tail_rhs(int sigma, double w, const Eigen::VectorXd& v,
                Eigen::VectorXd& f) const {
    const double x = x_of_w(a, w);
    Eigen::MatrixXd h, dhx;
    std::vector<Eigen::MatrixXd> dhy;
    M.family_eval(x, v.segment(1, m), h, dhx, dhy);
    const Eigen::VectorXd hv = h.llt().solve(v.segment(m + 1, m));
    const double xa = std::pow(x, a);
    const double den =
        std::sqrt(std::max(twoH - xa * v.segment(m + 1, m).dot(hv),
                           1e-14 * twoH));
    f.resize(2 * m + 2);
    f(0) = sigma / den;
    f.segment(1, m) = sigma * xa / den * hv;
    for (int i = 0; i < m; ++i)
      f(m + 1 + i) = sigma * 0.5 * xa / den * hv.dot(dhy[std::size_t(i)] * hv);
    f(2 * m + 1) = sigma * std::sqrt(twoH) / den;
  }

  // Capture condition for the descending tail: below x_switch with at least
  // the dominance share of the energy in downward radial momentum. The signed
  // combination x^a xi|xi| keeps the condition a single continuous crossing.
  double switch_gap(const Eigen::VectorXd& z) const {
    const double xi = z(m + 1);
    const double radial = -std::pow(z(0), a) * xi * std::abs(xi);
    return std::min(x_switch - z(0), radial - opt.dominance * twoH);
  }

  void run_time_leg(double t0, Eigen::VectorXd z) {
    while (true) {
      if (switch_gap(z) > 0) return tail_descend(t0, z);
      const bool watch_apex = z(m + 1) > 1e-10;
      std::vector<OdeEvent> ev;
      ev.push_back({[this](double, const Eigen::VectorXd& z) {
                      return switch_gap(z);
                    },
                    true, 1});
      ev.push_back({[this](double, const Eigen::VectorXd& z) {
                      return z(2 * m + 2) - budget;
                    },
                    true, 1});
      ev.push_back({[this](double, const Eigen::VectorXd& z) {
                      return z(0) - M.x_max();
                    },
                    true, 1});
      if (watch_apex)
        ev.push_back({[this](double, const Eigen::VectorXd& z) {
                        return z(m + 1);
                      },
                      true, -1});
      OdeSolution sol = integrate_dopri5(
          [this](double t, const Eigen::VectorXd& z, Eigen::VectorXd& f) {
            time_rhs(t, z, f);
          },
          t0, opt.t_max, z, ode, ev);
      track_drift(sol);
      const bool hit = sol.event_hit;
      const int idx = sol.event_index;
      const double te = sol.t_event;
      const Eigen::VectorXd ze = hit ? sol.y_event : sol.samples.back().y;
      const double t_last = hit ? te : sol.t_end();
      traj.legs.push_back({false, 0, std::move(sol)});
      if (!hit) {
        traj.status = TrajStatus::alive;
        return finish_alive(t_last, ze(2 * m + 2));
      }
      switch (idx) {
        case 0:
          return tail_descend(te, ze);
        case 1:
          traj.status = TrajStatus::trapped_suspect;
          return finish_alive(te, ze(2 * m + 2));
        case 2:
          if (opt.allow_top_exit) {
            traj.status = TrajStatus::exited_top;
            return finish_alive(te, ze(2 * m + 2));
          }
          throw std::runtime_error(
              "trajectory left the collar through x = x_max");
        default:  // apex
          if (!traj.apex_x || ze(0) > *traj.apex_x) {
            traj.apex_t = te;
            traj.apex_x = ze(0);
          }
          t0 = te;
          z = ze;
      }
    }
  }

  void tail_descend(double t0, const Eigen::VectorXd& z) {
    const double w_sw = w_of_x(a, z(0));
    Eigen::VectorXd v(2 * m + 2);
    v(0) = t0;
    v.segment(1, m) = z.segment(1, m);
    v.segment(m + 1, m) = z.segment(m + 2, m);
    v(2 * m + 1) = z(2 * m + 2);
    OdeSolution sol = integrate_dopri5(
        [this](double w, const Eigen::VectorXd& v, Eigen::VectorXd& f) {
          tail_rhs(-1, w, v, f);
        },
        w_sw, 0.0, v, ode);
    const Eigen::VectorXd vb = sol.samples.back().y;
    traj.legs.push_back({true, -1, std::move(sol)});

    ExitRecord rec;
    rec.T = vb(0);
    rec.y_bar = vb.segment(1, m);
    rec.eta_bar = vb.segment(m + 1, m);
    rec.length = vb(2 * m + 1);
    Eigen::MatrixXd h0, dhx;
    std::vector<Eigen::MatrixXd> dhy;
    M.family_eval(0.0, rec.y_bar, h0, dhx, dhy);
    rec.v_bar = h0.llt().solve(rec.eta_bar);
    traj.status = TrajStatus::exited;
    traj.t_end = rec.T;
    traj.length = rec.length;
    traj.exit_record = std::move(rec);
  }

  void finish_alive(double t, double s) {
    traj.t_end = t;
    traj.length = s;
  }

  void track_drift(const OdeSolution& sol) {
    for (const auto& smp : sol.samples) {
      PhasePoint p{smp.y(0), smp.y.segment(1, m), smp.y(m + 1),
                   smp.y.segment(m + 2, m)};
      traj.hamiltonian_drift = std::max(
          traj.hamiltonian_drift, std::abs(hamiltonian(M, p) - twoH / 2));
    }
  }
};

}  // namespace

Trajectory integrate_to_boundary(const GasGiantMetric& metric,
                                 const PhasePoint& start,
                                 const GeoOptions& opts) {
  require(start.x > 0 && start.x <= metric.x_max(), "start outside the collar");
  require(start.y.size() == metric.dim() - 1 &&
              start.eta.size() == metric.dim() - 1,
          "state dimension mismatch");
  return Tracer(metric, opts).from_interior(start);
}

Trajectory trace_from_boundary(const GasGiantMetric& metric,
                               const Eigen::VectorXd& y1,
                               const Eigen::VectorXd& eta1,
                               const GeoOptions& opts) {
  require(y1.size() == metric.dim() - 1 && eta1.size() == metric.dim() - 1,
          "state dimension mismatch");
  return Tracer(metric, opts).from_boundary(y1, eta1);
}

PhasePoint Trajectory::state_at(double t) const {
  require(!legs.empty(), "empty trajectory");
  const int m = dim - 1;
  auto t_range = [&](const Leg& leg, double& lo, double& hi) {
    if (leg.tail) {
      lo = leg.sol.samples.front().y(0);
      hi = leg.sol.samples.back().y(0);
    } else {
      lo = leg.sol.t_begin();
      hi = leg.sol.t_end();
    }
    if (lo > hi) std::swap(lo, hi);
  };
  const Leg* pick = &legs.back();
  for (const auto& leg : legs) {
    double lo, hi;
    t_range(leg, lo, hi);
    if (t <= hi + 1e-14) {
      pick = &leg;
      break;
    }
  }
  PhasePoint p;
  if (!pick->tail) {
    const Eigen::VectorXd z = pick->sol.at(t);
    p.x = z(0);
    p.y = z.segment(1, m);
    p.xi = z(m + 1);
    p.eta = z.segment(m + 2, m);
    return p;
  }
  // Tail leg: invert the monotone map t(w) by bisection on the interpolant,
  // then reconstruct x and xi from w and the conserved energy.
  double wa = pick->sol.t_begin(), wb = pick->sol.t_end();
  double ga = pick->sol.samples.front().y(0) - t;
  for (int it = 0; it < 200 && std::abs(wb - wa) > 1e-15 * (1 + std::abs(wb));
       ++it) {
    const double wm = 0.5 * (wa + wb);
    const double gm = pick->sol.at(wm)(0) - t;
    if ((gm < 0) == (ga < 0)) {
      wa = wm;
      ga = gm;
    } else {
      wb = wm;
    }
  }
  const double w = 0.5 * (wa + wb);
  const Eigen::VectorXd v = pick->sol.at(w);
  p.x = x_of_w(alpha, w);
  p.y = v.segment(1, m);
  p.eta = v.segment(m + 1, m);
  Eigen::MatrixXd h, dhx;
  std::vector<Eigen::MatrixXd> dhy;
  family->eval(p.x, p.y, h, dhx, dhy);
  const double den2 = std::max(
      2 * H0 - std::pow(p.x, alpha) * p.eta.dot(h.llt().solve(p.eta)), 0.0);
  p.xi = pick->dir * std::sqrt(den2) / std::pow(p.x, alpha / 2);
  return p;
}

double Trajectory::integrate_scalar(
    const std::function<double(double, const Eigen::VectorXd&)>& f,
    double tol) const {
  const int m = dim - 1;
  double acc = 0;
  for (const auto& leg : legs) {
    if (!leg.tail) {
      acc += integrate_adaptive(
          [&](double t) {
            const Eigen::VectorXd z = leg.sol.at(t);
            return f(z(0), z.segment(1, m));
          },
          leg.sol.t_begin(), leg.sol.t_end(), tol);
      continue;
    }
    double w0 = leg.sol.t_begin(), w1 = leg.sol.t_end();
    if (w0 > w1) std::swap(w0, w1);
    // dt = dw / den on either tail branch.
    acc += integrate_adaptive(
        [&](double w) {
          const Eigen::VectorXd v = leg.sol.at(w);
          const double x = x_of_w(alpha, w);
          Eigen::MatrixXd h, dhx;
          std::vector<Eigen::MatrixXd> dhy;
          family->eval(x, v.segment(1, m), h, dhx, dhy);
          const Eigen::VectorXd eta = v.segment(m + 1, m);
          const double den = std::sqrt(std::max(
              2 * H0 - std::pow(x, alpha) * eta.dot(h.llt().solve(eta)),
              1e-14 * 2 * H0));
          return f(x, v.segment(1, m)) / den;
        },
        w0, w1, tol);
  }
  return acc;
}

double expected_c_alpha(double alpha) {
  return std::pow(1 - alpha / 2, 2 / (2 - alpha));
}

double expected_c_alpha_prime(double alpha) {
  return std::pow(expected_c_alpha(alpha), alpha) * (2 - alpha) / (2 + alpha);
}

namespace {

// Samples of the exit expansion along the ascending tail relaunched from the
// exit record: tau ladder in [1e-6, 1e-3], with x(tau), |y - y_bar| and
// |xi|(tau). The tangential deviation is accumulated by quadrature of the
// (all-positive-exponent) tail right-hand side, which avoids the catastrophic
// cancellation of differencing y itself at |dy| ~ tau^{(2+a)/(2-a)}.
struct TailLadder {
  std::vector<double> tau, x, dy, xi;
  double v_norm = 0;  // |v_bar|_{h0}
  bool has_y = false;
};

TailLadder tail_ladder(const GasGiantMetric& metric, const Trajectory& traj) {
  require(traj.exit_record.has_value(),
          "expansion fit needs an exited trajectory");
  require(std::abs(2 * traj.H0 - 1) < 1e-6, "expansion fit expects unit speed");
  const int m = metric.dim() - 1;
  const double a = metric.alpha();
  const ExitRecord& rec = *traj.exit_record;

  Eigen::MatrixXd h0, dhx;
  std::vector<Eigen::MatrixXd> dhy;
  metric.family_eval(0.0, rec.y_bar, h0, dhx, dhy);
  TailLadder lad;
  lad.v_norm = std::sqrt(std::max(rec.eta_bar.dot(h0.llt().solve(rec.eta_bar)), 0.0));
  lad.has_y = lad.v_norm > 1e-12;

  // Relaunch the ascending tail: states [t, y, eta], w from 0. Since
  // dt/dw = 1/den >= 1/sqrt(2H), w_end = 1.25e-3 sqrt(2H) covers tau <= 1e-3.
  // the leading corrections are O(tau^{2a/(2-a)}) relative: keeping tau_max
  // small bounds the prefactor bias below 1e-2 even at a = 1/2
  const double tau_max = 1e-4, tau_min = 1e-7;
  const double w_end = 1.25 * tau_max * std::sqrt(2 * traj.H0);
  Eigen::VectorXd v0(2 * m + 1);
  v0(0) = 0;
  v0.segment(1, m) = rec.y_bar;
  v0.segment(m + 1, m) = rec.eta_bar;
  const double twoH = 2 * traj.H0;
  auto rhs = [&](double w, const Eigen::VectorXd& v, Eigen::VectorXd& f) {
    const double x = x_of_w(a, w);
    Eigen::MatrixXd h, dh_dx;
    std::vector<Eigen::MatrixXd> dh_dy;
    metric.family_eval(x, v.segment(1, m), h, dh_dx, dh_dy);
    const Eigen::VectorXd hv = h.llt().solve(v.segment(m + 1, m));
    const double xa = std::pow(x, a);
    const double den =
        std::sqrt(std::max(twoH - xa * v.segment(m + 1, m).dot(hv), 0.5 * twoH));
    f.resize(2 * m + 1);
    f(0) = 1 / den;
    f.segment(1, m) = xa / den * hv;
    for (int i = 0; i < m; ++i)
      f(m + 1 + i) = 0.5 * xa / den * hv.dot(dh_dy[std::size_t(i)] * hv);
  };
  OdeOptions oo;
  oo.rtol = 1e-12;
  oo.atol = 1e-16;
  const OdeSolution sol = integrate_dopri5(rhs, 0.0, w_end, v0, oo);

  auto den_at = [&](double w) {
    const Eigen::VectorXd v = sol.at(w);
    const double x = x_of_w(a, w);
    Eigen::MatrixXd h, dh_dx;
    std::vector<Eigen::MatrixXd> dh_dy;
    metric.family_eval(x, v.segment(1, m), h, dh_dx, dh_dy);
    const Eigen::VectorXd eta = v.segment(m + 1, m);
    return std::sqrt(
        std::max(twoH - std::pow(x, a) * eta.dot(h.llt().solve(eta)),
                 0.5 * twoH));
  };

  const int nk = 13;
  for (int k = 0; k < nk; ++k) {
    const double tau =
        tau_min * std::pow(tau_max / tau_min, double(k) / (nk - 1));
    // invert the monotone t(w)
    double wa = 0, wb = w_end;
    // capped: near w ~ w_end one ulp can exceed any fixed relative threshold
    for (int it = 0; it < 80 && wb - wa > 1e-16 * w_end; ++it) {
      const double wm = 0.5 * (wa + wb);
      if (sol.at(wm)(0) < tau)
        wa = wm;
      else
        wb = wm;
    }
    const double wk = 0.5 * (wa + wb);
    const double xk = x_of_w(a, wk);
    lad.tau.push_back(tau);
    lad.x.push_back(xk);
    lad.xi.push_back(den_at(wk) / std::pow(xk, a / 2));

    if (!lad.has_y) continue;
    Eigen::VectorXd dy = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
      auto integrand = [&](double w) {
        const Eigen::VectorXd v = sol.at(w);
        const double x = x_of_w(a, w);
        Eigen::MatrixXd h, dh_dx;
        std::vector<Eigen::MatrixXd> dh_dy;
        metric.family_eval(x, v.segment(1, m), h, dh_dx, dh_dy);
        const Eigen::VectorXd hv = h.llt().solve(v.segment(m + 1, m));
        return std::pow(x, a) * hv(i) / den_at(w);
      };
      const double scale = std::abs(integrand(wk)) * wk + 1e-300;
      dy(i) = integrate_adaptive(integrand, 0.0, wk, 1e-9 * scale);
    }
    lad.dy.push_back(std::sqrt(std::max(dy.dot(h0 * dy), 0.0)));
  }
  return lad;
}

}  // namespace

ExpansionFit expansion_fit(const GasGiantMetric& metric, const Trajectory& traj,
                           const GeoOptions&) {
  const TailLadder lad = tail_ladder(metric, traj);
  ExpansionFit out;
  out.has_y = lad.has_y;
  const RateFit fx = fit_loglog(lad.tau, lad.x);
  out.exponent_x = fx.slope;
  out.c_alpha_fit = fx.prefactor();
  const RateFit fxi = fit_loglog(lad.tau, lad.xi);
  out.exponent_xi = fxi.slope;
  out.xi_prefactor_fit = fxi.prefactor();
  if (lad.has_y) {
    std::vector<double> scaled(lad.dy);
    for (double& v : scaled) v /= lad.v_norm;
    const RateFit fy = fit_loglog(lad.tau, scaled);
    out.exponent_y = fy.slope;
    out.c_alpha_prime_fit = fy.prefactor();
  }
  return out;
}

double geodesic_shape_exponent(const GasGiantMetric& metric,
                               const Trajectory& traj, const GeoOptions&) {
  const TailLadder lad = tail_ladder(metric, traj);
  require(lad.has_y, "shape exponent needs a non-vertical exit");
  return fit_loglog(lad.x, lad.dy).slope;
}

RateFit exit_time_scaling(const GasGiantMetric& metric,
                          const Eigen::VectorXd& y0,
                          const Eigen::VectorXd& eta_dir, int k_min, int k_max,
                          const GeoOptions& opts) {
  require(k_min < k_max, "bad ladder");
  std::vector<double> x0s, Ts;
  for (int k = k_min; k <= k_max; ++k) {
    const double x0 = std::pow(2.0, -k);
    const PhasePoint start = make_unit_speed(metric, x0, y0, 0.0, eta_dir);
    const Trajectory traj = integrate_to_boundary(metric, start, opts);
    require(traj.status == TrajStatus::exited, "apex launch did not exit");
    x0s.push_back(x0);
    Ts.push_back(traj.exit_record->T);
  }
  return fit_loglog(x0s, Ts);
}

ScatteringResult scattering_relation(const GasGiantMetric& metric,
                                     const Eigen::VectorXd& y_in,
                                     const Eigen::VectorXd& eta_in,
                                     const GeoOptions& opts) {
  const Trajectory traj = trace_from_boundary(metric, y_in, eta_in, opts);
  if (traj.status != TrajStatus::exited)
    throw std::runtime_error("scattering relation: trajectory did not return");
  ScatteringResult out;
  out.y_out = traj.exit_record->y_bar;
  out.eta_out = traj.exit_record->eta_bar;
  out.total_time = traj.exit_record->T;
  out.length = traj.exit_record->length;
  out.apex_x = traj.apex_x.value_or(0.0);
  return out;
}

ConnectionResult connect_boundary_points(const GasGiantMetric& metric,
                                         double y1, double y2,
                                         const GeoOptions& opts) {
  require(metric.dim() == 2, "boundary shooting implemented for 2D collars");
  const double delta = y2 - y1;
  require(delta != 0, "distinct boundary points required");
  const double sgn = (delta > 0) ? 1.0 : -1.0;

  Eigen::VectorXd yv(1);
  yv << y1;
  int evals = 0;
  auto chord = [&](double p, Trajectory* keep = nullptr) {
    Eigen::VectorXd eta(1);
    eta << sgn * p;
    Trajectory traj = trace_from_boundary(metric, yv, eta, opts);
    if (traj.status != TrajStatus::exited)
      throw std::runtime_error("shooting ray did not return to the boundary");
    ++evals;
    const double out = traj.exit_record->y_bar(0) - y2;
    if (keep) *keep = std::move(traj);
    return sgn * out;  // positive when the ray overshoots
  };

  // Bracket: larger momentum -> shorter chord.
  double p_lo = std::sqrt(M_PI / std::abs(delta));  // flat-model guess
  double f_lo = chord(p_lo);
  double p_hi = p_lo, f_hi = f_lo;
  for (int it = 0; it < 60 && f_lo * f_hi > 0; ++it) {
    if (f_lo < 0) {
      p_lo /= 1.7;  // undershoot: lower the momentum
      f_lo = chord(p_lo);
    } else {
      p_hi *= 1.7;
      f_hi = chord(p_hi);
    }
  }
  if (f_lo * f_hi > 0)
    throw std::runtime_error("boundary shooting failed to bracket the target");
  if (f_lo < 0) {
    std::swap(p_lo, p_hi);
    std::swap(f_lo, f_hi);
  }
  // Illinois-damped regula falsi on [p_lo (overshoot), p_hi (undershoot)].
  double p_mid = p_lo, f_mid = f_lo;
  for (int it = 0; it < 200 && std::abs(p_hi - p_lo) >
                                   1e-13 * std::max(std::abs(p_lo), 1.0);
       ++it) {
    p_mid = (p_lo * f_hi - p_hi * f_lo) / (f_hi - f_lo);
    if (!(p_mid > std::min(p_lo, p_hi) && p_mid < std::max(p_lo, p_hi)))
      p_mid = 0.5 * (p_lo + p_hi);
    f_mid = chord(p_mid);
    if (std::abs(f_mid) < 1e-12 * std::max(1.0, std::abs(delta))) break;
    if (f_mid * f_lo > 0) {
      p_lo = p_mid;
      f_lo = f_mid;
      f_hi *= 0.5;
    } else {
      p_hi = p_mid;
      f_hi = f_mid;
      f_lo *= 0.5;
    }
  }

  ConnectionResult out;
  Trajectory best;
  chord(p_mid, &best);
  out.d_g = best.exit_record->length;
  out.apex_x = best.apex_x.value_or(0.0);
  out.eta1 = sgn * p_mid;
  out.iterations = evals;
  out.trajectory = std::move(best);
  return out;
}

BoundaryDistanceLaw boundary_distance_exponent(const GasGiantMetric& metric,
                                               double y_center, int k_min,
                                               int k_max,
                                               const GeoOptions& opts) {
  const double a = metric.alpha();
  std::vector<double> ds, dgs;
  BoundaryDistanceLaw out;
  out.ratio_min = std::numeric_limits<double>::infinity();
  out.ratio_max = 0;
  for (int k = k_min; k <= k_max; ++k) {
    const double d = std::pow(2.0, -k);
    const ConnectionResult c =
        connect_boundary_points(metric, y_center - d / 2, y_center + d / 2, opts);
    ds.push_back(d);
    dgs.push_back(c.d_g);
    // g-height of the apex vs the boundary distance: comparable in the
    // simple regime.
    const double ratio = w_of_x(a, c.apex_x) / c.d_g;
    out.ratio_min = std::min(out.ratio_min, ratio);
    out.ratio_max = std::max(out.ratio_max, ratio);
  }
  out.fit = fit_loglog(ds, dgs);
  out.alpha_recovered = 2 * (1 - out.fit.slope);
  return out;
}

BoundaryDistanceFunction interior_distance_map(const GasGiantMetric& metric,
                                               double x0, double y0,
                                               const std::vector<double>& z_grid,
                                               int n_sweep,
                                               const GeoOptions& opts) {
  require(metric.dim() == 2, "distance map implemented for 2D collars");
  require(n_sweep >= 16, "sweep too coarse");
  Eigen::VectorXd yv(1);
  yv << y0;

  struct Ray {
    bool ok = false;
    double y_exit = 0, length = 0;
  };
  auto shoot = [&](double theta) {
    Ray r;
    Eigen::VectorXd eta(1);
    eta << std::sin(theta);
    try {
      const PhasePoint start = make_unit_speed(metric, x0, yv,
                                               std::cos(theta), eta);
      const Trajectory traj = integrate_to_boundary(metric, start, opts);
      if (traj.status == TrajStatus::exited) {
        r.ok = true;
        r.y_exit = traj.exit_record->y_bar(0);
        r.length = traj.exit_record->length;
      }
    } catch (const std::exception&) {
      // rays leaving through x_max (or collapsing) carry no boundary arrival
    }
    return r;
  };

  std::vector<double> thetas(n_sweep);
  std::vector<Ray> rays(n_sweep);
  for (int i = 0; i < n_sweep; ++i) {
    thetas[std::size_t(i)] = 2 * M_PI * i / n_sweep;
    rays[std::size_t(i)] = shoot(thetas[std::size_t(i)]);
  }

  BoundaryDistanceFunction out;
  out.source_x = x0;
  out.source_y = yv;
  out.z = z_grid;
  out.d.assign(z_grid.size(), std::numeric_limits<double>::quiet_NaN());

  for (std::size_t iz = 0; iz < z_grid.size(); ++iz) {
    const double z = z_grid[iz];
    // Brackets where the exit point crosses z between adjacent good rays.
    struct Bracket {
      double ta, tb, fa, fb, l_est;
    };
    std::vector<Bracket> brs;
    for (int i = 0; i < n_sweep; ++i) {
      const Ray& ra = rays[std::size_t(i)];
      const Ray& rb = rays[std::size_t((i + 1) % n_sweep)];
      if (!ra.ok || !rb.ok) continue;
      const double fa = ra.y_exit - z, fb = rb.y_exit - z;
      if (fa == 0) {
        brs.push_back({thetas[std::size_t(i)], thetas[std::size_t(i)], fa, fa,
                       ra.length});
        continue;
      }
      if (fa * fb < 0) {
        const double s = fa / (fa - fb);
        brs.push_back({thetas[std::size_t(i)],
                       thetas[std::size_t(i)] + 2 * M_PI / n_sweep, fa, fb,
                       ra.length + s * (rb.length - ra.length)});
      }
    }
    std::sort(brs.begin(), brs.end(),
              [](const Bracket& a, const Bracket& b) { return a.l_est < b.l_est; });
    double best = std::numeric_limits<double>::infinity();
    const std::size_t refine = std::min<std::size_t>(brs.size(), 3);
    for (std::size_t ib = 0; ib < refine; ++ib) {
      Bracket br = brs[ib];
      if (br.ta == br.tb) {
        best = std::min(best, br.l_est);
        continue;
      }
      Ray hit;
      for (int it = 0; it < 48 && br.tb - br.ta > 1e-12; ++it) {
        const double tm = 0.5 * (br.ta + br.tb);
        const Ray rm = shoot(tm);
        if (!rm.ok) break;  // bracket degenerated; fall back to the estimate
        hit = rm;
        if ((rm.y_exit - z) * br.fa < 0) {
          br.tb = tm;
          br.fb = rm.y_exit - z;
        } else {
          br.ta = tm;
          br.fa = rm.y_exit - z;
        }
      }
      best = std::min(best, hit.ok ? hit.length : br.l_est);
    }
    if (std::isfinite(best)) out.d[iz] = best;
  }
  return out;
}

double hausdorff_dimension_boundary(const GasGiantMetric& metric,
                                    const GeoOptions& opts) {
  require(metric.dim() == 2, "boundary dimension probe implemented for 2D");
  // Calibrate the boundary separation -> d_g profile on a ladder, then count
  // coverings of a unit boundary interval by d_g-balls.
  const int nd = 20;
  const double d_lo = 1e-3, d_hi = 0.25;
  std::vector<double> logd, logD;
  for (int k = 0; k < nd; ++k) {
    const double d = d_lo * std::pow(d_hi / d_lo, double(k) / (nd - 1));
    const ConnectionResult c =
        connect_boundary_points(metric, 0.5 - d / 2, 0.5 + d / 2, opts);
    logd.push_back(std::log(d));
    logD.push_back(std::log(c.d_g));
  }
  // Monotone inverse Delta(delta) by bisection on the interpolated profile.
  auto D_of = [&](double ld) {
    if (ld <= logd.front()) {  // extend by the local slope
      const double sl = (logD[1] - logD[0]) / (logd[1] - logd[0]);
      return logD.front() + sl * (ld - logd.front());
    }
    if (ld >= logd.back()) {
      const double sl = (logD[nd - 1] - logD[nd - 2]) /
                        (logd[nd - 1] - logd[nd - 2]);
      return logD.back() + sl * (ld - logd.back());
    }
    const auto it = std::upper_bound(logd.begin(), logd.end(), ld);
    const std::size_t j = std::size_t(it - logd.begin());
    const double s = (ld - logd[j - 1]) / (logd[j] - logd[j - 1]);
    return logD[j - 1] + s * (logD[j] - logD[j - 1]);
  };
  auto delta_of = [&](double logdel) {
    double lo = std::log(1e-6), hi = std::log(0.9);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (D_of(mid) < logdel)
        lo = mid;
      else
        hi = mid;
    }
    return std::exp(0.5 * (lo + hi));
  };

  std::vector<double> inv_delta, Ns;
  const double D_min = std::exp(logD.front()), D_max = std::exp(logD.back());
  for (int i = 0; i < 10; ++i) {
    // stay in the lower part of the calibrated range so counts are large
    // enough for the integer covering number not to bias the slope
    const double del =
        D_min * std::pow(D_max / D_min, 0.05 + 0.5 * i / 9.0);
    const double half_width = delta_of(std::log(del));
    // greedy covering of [0, 1] by closed d_g-balls of radius del
    double pos = 0;
    long count = 0;
    while (pos < 1.0 && count < 100000000L) {
      pos += 2 * half_width;
      ++count;
    }
    inv_delta.push_back(1.0 / del);
    Ns.push_back(double(count));
  }
  return fit_loglog(inv_delta, Ns).slope;
}

}  // namespace gasgiant
