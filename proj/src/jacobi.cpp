#include "gasgiant/jacobi.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace gasgiant {

namespace {

// Gamma^i_{jl} v^j v^l for all i, from a metric jet.
Eigen::VectorXd gamma_quadratic(const MetricJet& jet,
                                const Eigen::VectorXd& v) {
  const int n = int(jet.gamma.size());
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) c(i) = v.dot(jet.gamma[std::size_t(i)] * v);
  return c;
}

Eigen::VectorXd velocity_from_jet(const MetricJet& jet, double alpha,
                                  double xi, const Eigen::VectorXd& eta) {
  const int n = int(jet.g.rows());
  const double xa = std::pow(jet.x, alpha);
  Eigen::VectorXd v(n);
  v(0) = xa * xi;
  v.tail(n - 1) = xa * (jet.h_inv * eta);
  return v;
}

}  // namespace

Eigen::VectorXd coordinate_velocity(const GasGiantMetric& metric,
                                    const PhasePoint& base) {
  const MetricJet jet = metric_jet(metric, base.x, base.y);
  return velocity_from_jet(jet, metric.alpha(), base.xi, base.eta);
}

void jacobi_matrices(const GasGiantMetric& metric, const PhasePoint& base,
                     Eigen::MatrixXd& F, Eigen::MatrixXd& G) {
  const int n = metric.dim();
  const double a = metric.alpha();
  const MetricJet jet = metric_jet(metric, base.x, base.y);
  const Eigen::VectorXd v = velocity_from_jet(jet, a, base.xi, base.eta);

  F.setZero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      F(i, k) = 2.0 * v.dot(jet.gamma[std::size_t(i)].col(k));
  F.diagonal().array() += a * v(0) / base.x;

  // G^i_k = x^{-a} d_k [Gamma^i_{jl} v^j v^l] with v frozen.
  G.resize(n, n);
  const double xma = std::pow(base.x, -a);
  for (int k = 0; k < n; ++k) {
    const double step =
        (k == 0) ? 1e-6 * base.x : 1e-6 * (1.0 + std::abs(base.y(k - 1)));
    PhasePoint hi = base, lo = base;
    if (k == 0) {
      hi.x += step;
      lo.x -= step;
    } else {
      hi.y(k - 1) += step;
      lo.y(k - 1) -= step;
    }
    const Eigen::VectorXd c_hi =
        gamma_quadratic(metric_jet(metric, hi.x, hi.y), v);
    const Eigen::VectorXd c_lo =
        gamma_quadratic(metric_jet(metric, lo.x, lo.y), v);
    G.col(k) = xma * (c_hi - c_lo) / (2.0 * step);
  }
}

JacobiState jacobi_rhs(const GasGiantMetric& metric, const PhasePoint& base,
                       const JacobiState& state) {
  Eigen::MatrixXd F, G;
  jacobi_matrices(metric, base, F, G);
  JacobiState out;
  out.W1 = std::pow(base.x, metric.alpha()) * state.W2;
  out.W2 = -F * state.W2 - G * state.W1;
  return out;
}

std::vector<Eigen::VectorXd> normal_basis(const GasGiantMetric& metric,
                                          const PhasePoint& base) {
  const int n = metric.dim();
  const MetricJet jet = metric_jet(metric, base.x, base.y);
  const Eigen::VectorXd v =
      velocity_from_jet(jet, metric.alpha(), base.xi, base.eta);
  const double v2 = v.dot(jet.g * v);
  require(v2 > 0, "normal_basis: zero velocity");

  std::vector<Eigen::VectorXd> basis;
  basis.push_back(v / std::sqrt(v2));
  for (int s = 0; s < n && int(basis.size()) < n; ++s) {
    Eigen::VectorXd cand = Eigen::VectorXd::Unit(n, s);
    for (const auto& b : basis) cand -= b.dot(jet.g * cand) * b;
    const double nrm2 = cand.dot(jet.g * cand);
    if (nrm2 > 1e-16) basis.push_back(cand / std::sqrt(nrm2));
  }
  require(int(basis.size()) == n, "normal_basis: degenerate frame");

  // consistent orientation along the orbit
  Eigen::MatrixXd frame(n, n);
  for (int i = 0; i < n; ++i) frame.col(i) = basis[std::size_t(i)];
  if (frame.determinant() < 0) basis.back() = -basis.back();
  basis.erase(basis.begin());
  return basis;
}

double symplectic_pairing(const GasGiantMetric& metric, const PhasePoint& base,
                          const JacobiState& a, const JacobiState& b) {
  const MetricJet jet = metric_jet(metric, base.x, base.y);
  const double xa = std::pow(base.x, metric.alpha());
  const Eigen::VectorXd v =
      velocity_from_jet(jet, metric.alpha(), base.xi, base.eta);
  auto cov = [&](const JacobiState& s) {  // D_t J = Jdot + Gamma(v) J
    Eigen::VectorXd d = xa * s.W2;
    for (int i = 0; i < metric.dim(); ++i)
      d(i) += v.dot(jet.gamma[std::size_t(i)] * s.W1);
    return d;
  };
  return a.W1.dot(jet.g * cov(b)) - b.W1.dot(jet.g * cov(a));
}

JacobiRun jacobi_run(const GasGiantMetric& metric, const PhasePoint& start,
                     std::vector<JacobiState> fields, const GeoOptions& opts,
                     double x_floor) {
  const int n = metric.dim();
  const double a = metric.alpha();
  require(x_floor > 0 && x_floor < start.x, "x_floor must sit below the start");

  // Pre-trace for status, exit data, and the time horizon.
  const Trajectory traj = integrate_to_boundary(metric, start, opts);

  const bool default_fields = fields.empty();
  if (default_fields) {
    const double xma = std::pow(start.x, -a);
    for (const Eigen::VectorXd& nb : normal_basis(metric, start)) {
      JacobiState f;
      f.W1 = Eigen::VectorXd::Zero(n);
      f.W2 = xma * nb;  // J = 0, D_t J = frame vector
      fields.push_back(std::move(f));
    }
  }
  const int nf = int(fields.size());

  JacobiRun run;
  run.status = traj.status;
  run.length = traj.length;
  run.exit_record = traj.exit_record;
  run.x_floor = x_floor;

  // Packed state: base (x, y, xi, eta) then nf * (W1, W2), then int ||A||_F.
  const int nb = 2 * n;
  const int N = nb + nf * 2 * n + 1;
  Eigen::VectorXd z(N);
  z(0) = start.x;
  z.segment(1, n - 1) = start.y;
  z(n) = start.xi;
  z.segment(n + 1, n - 1) = start.eta;
  for (int f = 0; f < nf; ++f) {
    z.segment(nb + f * 2 * n, n) = fields[std::size_t(f)].W1;
    z.segment(nb + f * 2 * n + n, n) = fields[std::size_t(f)].W2;
  }
  z(N - 1) = 0;

  auto base_of = [&](const Eigen::VectorXd& z) {
    PhasePoint p;
    p.x = z(0);
    p.y = z.segment(1, n - 1);
    p.xi = z(n);
    p.eta = z.segment(n + 1, n - 1);
    return p;
  };

  OdeOptions oo;
  oo.rtol = opts.rtol;
  oo.atol = opts.atol;

  OdeRhs rhs = [&](double, const Eigen::VectorXd& z, Eigen::VectorXd& f) {
    const PhasePoint p = base_of(z);
    const MetricJet jet = metric_jet(metric, p.x, p.y);
    const double xa = std::pow(p.x, a);
    const Eigen::VectorXd hv = jet.h_inv * p.eta;
    const double H = 0.5 * xa * (p.xi * p.xi + p.eta.dot(hv));
    f.resize(N);
    f(0) = xa * p.xi;
    f.segment(1, n - 1) = xa * hv;
    f(n) = -(a / p.x) * H + 0.5 * xa * hv.dot(jet.dh_dx * hv);
    for (int i = 0; i < n - 1; ++i)
      f(n + 1 + i) = 0.5 * xa * hv.dot(jet.dh_dy[std::size_t(i)] * hv);

    Eigen::MatrixXd F, G;
    jacobi_matrices(metric, p, F, G);
    for (int k = 0; k < nf; ++k) {
      const auto W1 = z.segment(nb + k * 2 * n, n);
      const auto W2 = z.segment(nb + k * 2 * n + n, n);
      f.segment(nb + k * 2 * n, n) = xa * W2;
      f.segment(nb + k * 2 * n + n, n) = -F * W2 - G * W1;
    }
    f(N - 1) = std::sqrt(n * xa * xa + F.squaredNorm() + G.squaredNorm());
  };

  std::vector<OdeEvent> ev(2);
  ev[0].g = [&](double, const Eigen::VectorXd& z) { return z(0) - x_floor; };
  ev[0].direction = -1;
  ev[1].g = [&](double, const Eigen::VectorXd& z) {
    return z(0) - metric.x_max();
  };
  ev[1].direction = 1;

  // Integrate in segments, re-projecting the fields onto the velocity
  // orthocomplement between segments (normal fields only).
  const double t_cap = traj.t_end > 0 ? traj.t_end : opts.t_max;
  const int segments = 40;
  double t = 0;
  bool done = false;
  for (int seg = 0; seg < segments && !done; ++seg) {
    const double t1 = t_cap * double(seg + 1) / segments;
    if (t1 <= t) continue;
    const OdeSolution sol = integrate_dopri5(rhs, t, t1, z, oo, ev);
    const bool skip_first = !run.t.empty();  // segment start == previous end
    for (std::size_t i = skip_first ? 1 : 0; i < sol.samples.size(); ++i) {
      run.t.push_back(sol.samples[i].t);
      const Eigen::VectorXd& y = sol.samples[i].y;
      run.base.push_back(base_of(y));
      std::vector<JacobiState> fs(static_cast<std::size_t>(nf));
      for (int k = 0; k < nf; ++k) {
        fs[std::size_t(k)].W1 = y.segment(nb + k * 2 * n, n);
        fs[std::size_t(k)].W2 = y.segment(nb + k * 2 * n + n, n);
      }
      run.fields.push_back(std::move(fs));
    }
    t = sol.samples.back().t;
    z = sol.samples.back().y;
    if (sol.event_hit) {
      done = true;
    } else if (seg + 1 == segments) {
      done = true;
    }
    if (!done && default_fields) {
      // re-project: J and D_t J back to the g-orthocomplement of the velocity
      const PhasePoint p = base_of(z);
      const MetricJet jet = metric_jet(metric, p.x, p.y);
      const double xa = std::pow(p.x, a);
      const Eigen::VectorXd v = velocity_from_jet(jet, a, p.xi, p.eta);
      const double v2 = v.dot(jet.g * v);
      auto proj = [&](Eigen::VectorXd u) {
        return u - (v.dot(jet.g * u) / v2) * v;
      };
      for (int k = 0; k < nf; ++k) {
        Eigen::VectorXd W1 = z.segment(nb + k * 2 * n, n);
        Eigen::VectorXd W2 = z.segment(nb + k * 2 * n + n, n);
        Eigen::VectorXd DtJ = xa * W2;
        for (int i = 0; i < n; ++i)
          DtJ(i) += v.dot(jet.gamma[std::size_t(i)] * W1);
        W1 = proj(W1);
        DtJ = proj(DtJ);
        for (int i = 0; i < n; ++i)
          DtJ(i) -= v.dot(jet.gamma[std::size_t(i)] * W1);
        z.segment(nb + k * 2 * n, n) = W1;
        z.segment(nb + k * 2 * n + n, n) = DtJ / xa;
      }
    }
  }
  run.gronwall_log = z(N - 1);

  // Per-sample diagnostics.
  std::vector<double> w0(static_cast<std::size_t>(nf));
  for (int k = 0; k < nf; ++k) {
    const auto& f0 = run.fields.front()[std::size_t(k)];
    w0[std::size_t(k)] =
        std::sqrt(f0.W1.squaredNorm() + f0.W2.squaredNorm());
  }
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    double wmax = 0;
    for (int k = 0; k < nf; ++k) {
      const auto& f = run.fields[i][std::size_t(k)];
      const double w = std::sqrt(f.W1.squaredNorm() + f.W2.squaredNorm());
      wmax = std::max(wmax, w);
      if (w0[std::size_t(k)] > 0)
        run.sup_ratio = std::max(run.sup_ratio, w / w0[std::size_t(k)]);
    }
    run.w_norm.push_back(wmax);
    if (nf == n - 1) {
      Eigen::MatrixXd Mn(n - 1, n - 1);
      const PhasePoint& p = run.base[i];
      const MetricJet jet = metric_jet(metric, p.x, p.y);
      const auto frame = normal_basis(metric, p);
      for (int b = 0; b < n - 1; ++b)
        for (int c = 0; c < n - 1; ++c)
          Mn(b, c) =
              frame[std::size_t(b)].dot(jet.g * run.fields[i][std::size_t(c)].W1);
      run.det_normal.push_back(Mn.determinant());
    }
  }
  return run;
}

std::vector<double> scan_sign_changes(const std::vector<double>& t,
                                      const std::vector<double>& v,
                                      double rel_floor) {
  require(t.size() == v.size(), "scan_sign_changes: size mismatch");
  double vmax = 0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  const double floor = rel_floor * vmax;
  std::vector<double> out;
  std::size_t last = t.size();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::abs(v[i]) <= floor) continue;
    if (last < t.size() && (v[i] < 0) != (v[last] < 0)) {
      const double s = v[last] / (v[last] - v[i]);
      out.push_back(t[last] + s * (t[i] - t[last]));
    }
    last = i;
  }
  return out;
}

std::vector<double> conjugate_point_scan(const JacobiRun& run) {
  require(!run.det_normal.empty(),
          "conjugate scan needs a normal-basis Jacobi run");
  return scan_sign_changes(run.t, run.det_normal);
}

SimplicityReport simplicity_certificate(const GasGiantMetric& metric, int grid,
                                        const GeoOptions& opts) {
  require(metric.dim() == 2, "certificate sweep implemented for 2D collars");
  require(grid >= 2, "grid too coarse");
  const int n_orbits = grid * grid;

  struct OrbitResult {
    bool traced = false;
    TrajStatus status = TrajStatus::alive;
    double length = 0;
    int conj = 0;
    double log_ratio_minus_bound = -1e300;
    bool exited = false;
    double y_bar = 0, eta_bar = 0;
    double x0 = 0, y0 = 0;
    std::string error;
  };
  std::vector<OrbitResult> res(static_cast<std::size_t>(n_orbits));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int idx = next.fetch_add(1); idx < n_orbits; idx = next.fetch_add(1)) {
      OrbitResult& r = res[std::size_t(idx)];
      const int ix = idx / grid, iy = idx % grid;
      r.x0 = metric.x_max() *
             (1e-3 * std::pow(0.7 / 1e-3, double(ix) / (grid - 1)));
      r.y0 = double(iy) / grid;
      Eigen::VectorXd y(1), e(1);
      y << r.y0;
      e << 1.0;
      try {
        const PhasePoint start = make_unit_speed(metric, r.x0, y, 0.0, e);
        const JacobiRun run =
            jacobi_run(metric, start, {}, opts,
                       /*x_floor=*/std::min(1e-3, 0.5 * r.x0));
        r.traced = true;
        r.status = run.status;
        r.length = run.length;
        r.conj = int(conjugate_point_scan(run).size());
        r.log_ratio_minus_bound =
            std::log(std::max(run.sup_ratio, 1e-300)) - run.gronwall_log;
        if (run.exit_record) {
          r.exited = true;
          r.y_bar = run.exit_record->y_bar(0);
          r.eta_bar = run.exit_record->eta_bar(0);
        }
      } catch (const std::exception& ex) {
        r.error = ex.what();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned i = 0; i + 1 < std::min(hw, 8u); ++i)
    pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  SimplicityReport rep;
  rep.orbits = n_orbits;
  rep.min_injectivity_gap = std::numeric_limits<double>::infinity();
  double max_log_gap = -1e300;
  std::vector<const OrbitResult*> exited;
  for (const auto& r : res) {
    if (!r.error.empty()) {
      std::ostringstream os;
      os << "orbit (x0=" << r.x0 << ", y0=" << r.y0 << ") failed: " << r.error;
      rep.witness = os.str();
      return rep;
    }
    rep.max_length = std::max(rep.max_length, r.length);
    if (r.status == TrajStatus::trapped_suspect) {
      ++rep.trapped_count;
      if (rep.witness.empty()) {
        std::ostringstream os;
        os << "trapped orbit at apex (x0=" << r.x0 << ", y0=" << r.y0
           << "): length budget exceeded";
        rep.witness = os.str();
      }
    }
    if (r.conj > 0) {
      rep.conjugate_count += r.conj;
      if (rep.witness.empty()) {
        std::ostringstream os;
        os << "conjugate point on orbit (x0=" << r.x0 << ", y0=" << r.y0 << ")";
        rep.witness = os.str();
      }
    }
    max_log_gap = std::max(max_log_gap, r.log_ratio_minus_bound);
    if (r.exited) exited.push_back(&r);
  }
  rep.max_gronwall_ratio = std::exp(std::min(max_log_gap, 700.0));

  // Endpoint-map injectivity on the sampled grid: no two distinct apex starts
  // may produce (numerically) identical boundary data.
  std::sort(exited.begin(), exited.end(),
            [](const OrbitResult* a, const OrbitResult* b) {
              return a->y_bar < b->y_bar;
            });
  for (std::size_t i = 0; i + 1 < exited.size(); ++i) {
    const auto *a = exited[i], *b = exited[i + 1];
    const double gap = std::max(std::abs(a->y_bar - b->y_bar),
                                std::abs(a->eta_bar - b->eta_bar));
    rep.min_injectivity_gap = std::min(rep.min_injectivity_gap, gap);
    if (gap < 1e-9 && rep.witness.empty()) {
      std::ostringstream os;
      os << "endpoint collision between apex starts (" << a->x0 << ", "
         << a->y0 << ") and (" << b->x0 << ", " << b->y0 << ")";
      rep.witness = os.str();
    }
  }

  rep.pass = rep.witness.empty() && rep.trapped_count == 0 &&
             rep.conjugate_count == 0 && rep.max_gronwall_ratio <= 1.0 + 1e-9;
  return rep;
}

}  // namespace gasgiant
