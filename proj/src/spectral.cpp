#include "gasgiant/spectral.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace gasgiant {

IndicialData indicial_data(double alpha, int n) {
  require(alpha > 0 && alpha < 2, "alpha must lie in (0, 2)");
  require(n >= 2, "dimension must be at least 2");
  IndicialData d;
  d.alpha = alpha;
  d.n = n;
  d.gamma_minus = 0;
  d.gamma_plus = alpha * (n / 2.0 - 1) + 1;
  d.mu_minus = (n * alpha / 2 - 1) / 2;
  d.mu_plus = d.mu_minus + (2 - alpha);
  d.essentially_self_adjoint = alpha > 2.0 / n;
  return d;
}

namespace {

// 4-point Gauss-Legendre on [-1, 1]
const double kGx[4] = {-0.8611363115940526, -0.3399810435848563,
                       0.3399810435848563, 0.8611363115940526};
const double kGw[4] = {0.3478548451374538, 0.6521451548625461,
                       0.6521451548625461, 0.3478548451374538};

struct Coeffs {
  double wexp = 0;   // volume weight exponent -n a/2
  double alpha = 0;
  double mu = 0;
  double p(double x) const { return std::pow(x, alpha + wexp); }
  double w(double x) const { return std::pow(x, wexp); }
  double pot(double x) const { return mu * std::pow(x, alpha) * w(x); }
};

Coeffs coeffs_of(const TruncatedEigenproblem& prob) {
  return {volume_weight_exponent(prob.alpha, prob.n), prob.alpha,
          prob.mu_mode};
}

// Solve T z = b for a symmetric tridiagonal (diag, off) block rows lo..hi of
// the interior index range (no pivoting; the pencils here are SPD).
Eigen::VectorXd thomas_solve(const Eigen::VectorXd& diag,
                             const Eigen::VectorXd& off,
                             const Eigen::VectorXd& b) {
  const Eigen::Index m = diag.size();
  Eigen::VectorXd c(m), d(m), z(m);
  c(0) = diag(0);
  d(0) = b(0);
  for (Eigen::Index i = 1; i < m; ++i) {
    const double l = off(i - 1) / c(i - 1);
    c(i) = diag(i) - l * off(i - 1);
    d(i) = b(i) - l * d(i - 1);
  }
  z(m - 1) = d(m - 1) / c(m - 1);
  for (Eigen::Index i = m - 2; i >= 0; --i)
    z(i) = (d(i) - off(i) * z(i + 1)) / c(i);
  return z;
}

Eigen::VectorXd tri_apply(const Eigen::VectorXd& diag,
                          const Eigen::VectorXd& off,
                          const Eigen::VectorXd& u) {
  const Eigen::Index m = diag.size();
  Eigen::VectorXd v = diag.cwiseProduct(u);
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    v(i) += off(i) * u(i + 1);
    v(i + 1) += off(i) * u(i);
  }
  return v;
}

// interior slices of the full tridiagonal pencil
struct InteriorPencil {
  Eigen::VectorXd a_diag, a_off, m_diag, m_off;
};

InteriorPencil interior_of(const RadialOperator& op) {
  const Eigen::Index nn = op.nodes.size();
  InteriorPencil p;
  p.a_diag = op.a_diag.segment(1, nn - 2);
  p.a_off = op.a_off.segment(1, nn - 3);
  p.m_diag = op.m_diag.segment(1, nn - 2);
  p.m_off = op.m_off.segment(1, nn - 3);
  return p;
}

}  // namespace

RadialOperator assemble_radial(const TruncatedEigenproblem& prob) {
  require(prob.alpha > 0 && prob.alpha < 2, "alpha must lie in (0, 2)");
  require(prob.n >= 2, "dimension must be at least 2");
  require(prob.eps > 0 && prob.eps < 1, "eps must lie in (0, 1)");
  require(prob.grid_n >= 8, "grid too coarse");
  require(prob.extension == Extension::dirichlet,
          "only the Dirichlet extension is implemented");
  const int N = prob.grid_n;
  const Coeffs c = coeffs_of(prob);

  RadialOperator op;
  op.prob = prob;
  op.nodes.resize(N + 1);
  for (int i = 0; i <= N; ++i) {
    const double s = double(i) / N;
    op.nodes(i) = prob.eps + (1 - prob.eps) * s * s * s;
  }
  op.a_diag = Eigen::VectorXd::Zero(N + 1);
  op.a_off = Eigen::VectorXd::Zero(N);
  op.m_diag = Eigen::VectorXd::Zero(N + 1);
  op.m_off = Eigen::VectorXd::Zero(N);

  for (int e = 0; e < N; ++e) {
    const double xl = op.nodes(e), xr = op.nodes(e + 1);
    const double h = xr - xl, mid = 0.5 * (xl + xr), half = 0.5 * h;
    double ip = 0;                  // int p over the cell
    double mw[3] = {0, 0, 0};       // int w  * {phi_l^2, phi_l phi_r, phi_r^2}
    double pw[3] = {0, 0, 0};       // same moments for the potential
    for (int q = 0; q < 4; ++q) {
      const double x = mid + half * kGx[q];
      const double wq = half * kGw[q];
      const double tl = (xr - x) / h, tr = (x - xl) / h;
      ip += wq * c.p(x);
      const double wv = c.w(x), pv = c.pot(x);
      mw[0] += wq * wv * tl * tl;
      mw[1] += wq * wv * tl * tr;
      mw[2] += wq * wv * tr * tr;
      pw[0] += wq * pv * tl * tl;
      pw[1] += wq * pv * tl * tr;
      pw[2] += wq * pv * tr * tr;
    }
    const double k = ip / (h * h);
    op.a_diag(e) += k + pw[0];
    op.a_diag(e + 1) += k + pw[2];
    op.a_off(e) += -k + pw[1];
    op.m_diag(e) += mw[0];
    op.m_diag(e + 1) += mw[2];
    op.m_off(e) += mw[1];
  }
  return op;
}

Eigen::VectorXd discrete_neg_l(const RadialOperator& op,
                               const Eigen::VectorXd& full_u) {
  const Eigen::Index nn = op.nodes.size();
  require(full_u.size() == nn, "node vector size mismatch");
  const Eigen::VectorXd au = tri_apply(op.a_diag, op.a_off, full_u);
  const InteriorPencil p = interior_of(op);
  return thomas_solve(p.m_diag, p.m_off, au.segment(1, nn - 2));
}

Eigen::VectorXd weighted_load(const RadialOperator& op,
                              const std::function<double(double)>& g) {
  const Coeffs c = coeffs_of(op.prob);
  const Eigen::Index nn = op.nodes.size();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(nn);
  for (Eigen::Index e = 0; e + 1 < nn; ++e) {
    const double xl = op.nodes(e), xr = op.nodes(e + 1);
    const double h = xr - xl, mid = 0.5 * (xl + xr), half = 0.5 * h;
    for (int q = 0; q < 4; ++q) {
      const double x = mid + half * kGx[q];
      const double wq = half * kGw[q];
      const double gv = wq * c.w(x) * g(x);
      load(e) += gv * (xr - x) / h;
      load(e + 1) += gv * (x - xl) / h;
    }
  }
  return load.segment(1, nn - 2);
}

double symmetry_residual(const RadialOperator& op, unsigned seed) {
  const InteriorPencil p = interior_of(op);
  const Eigen::Index m = p.a_diag.size();
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  double worst = 0;
  for (int trial = 0; trial < 8; ++trial) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m), v = Eigen::VectorXd::Zero(m);
    // compactly supported: random interior windows
    const Eigen::Index lo = rng() % (m / 2), hi = lo + 1 + rng() % (m / 2);
    for (Eigen::Index i = lo; i < hi && i < m; ++i) {
      u(i) = gauss(rng);
      v(i) = gauss(rng);
    }
    const double au_v = v.dot(tri_apply(p.a_diag, p.a_off, u));
    const double u_av = u.dot(tri_apply(p.a_diag, p.a_off, v));
    const double mu_v = v.dot(tri_apply(p.m_diag, p.m_off, u));
    const double u_mv = u.dot(tri_apply(p.m_diag, p.m_off, v));
    const double scale = std::abs(au_v) + std::abs(mu_v) + 1e-300;
    worst = std::max(worst,
                     (std::abs(au_v - u_av) + std::abs(mu_v - u_mv)) / scale);
  }
  return worst;
}

EigenSolveResult eigenvalues_truncated(const TruncatedEigenproblem& prob,
                                       int k) {
  require(k >= 1 && k <= 20, "k must lie in [1, 20]");
  const RadialOperator op = assemble_radial(prob);
  const InteriorPencil p = interior_of(op);
  const Eigen::Index m = p.a_diag.size();
  const Eigen::Index b = std::min<Eigen::Index>(k + 4, m);

  std::mt19937 rng(12345);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd z(m, b);
  for (Eigen::Index j = 0; j < b; ++j)
    for (Eigen::Index i = 0; i < m; ++i) z(i, j) = gauss(rng);

  std::vector<double> prev(static_cast<std::size_t>(k), 0.0);
  EigenSolveResult res;
  for (int it = 0; it < 400; ++it) {
    // shift-invert step W = A^{-1} M Z, then Rayleigh-Ritz in span(W)
    Eigen::MatrixXd w(m, b);
    for (Eigen::Index j = 0; j < b; ++j)
      w.col(j) = thomas_solve(p.a_diag, p.a_off,
                              tri_apply(p.m_diag, p.m_off, z.col(j)));
    // M-orthonormalize by modified Gram-Schmidt
    for (Eigen::Index j = 0; j < b; ++j) {
      for (Eigen::Index l = 0; l < j; ++l)
        w.col(j) -= w.col(l).dot(tri_apply(p.m_diag, p.m_off, w.col(j))) *
                    w.col(l);
      const double nrm =
          std::sqrt(w.col(j).dot(tri_apply(p.m_diag, p.m_off, w.col(j))));
      require(nrm > 0, "eigensolver subspace collapsed");
      w.col(j) /= nrm;
    }
    Eigen::MatrixXd ar(b, b), mr(b, b);
    for (Eigen::Index j = 0; j < b; ++j) {
      const Eigen::VectorXd aw = tri_apply(p.a_diag, p.a_off, w.col(j));
      const Eigen::VectorXd mw = tri_apply(p.m_diag, p.m_off, w.col(j));
      for (Eigen::Index i = 0; i < b; ++i) {
        ar(i, j) = w.col(i).dot(aw);
        mr(i, j) = w.col(i).dot(mw);
      }
    }
    ar = 0.5 * (ar + ar.transpose()).eval();
    mr = 0.5 * (mr + mr.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(ar, mr);
    require(ges.info() == Eigen::Success, "Rayleigh-Ritz solve failed");
    z = w * ges.eigenvectors();

    bool converged = it > 2;
    for (int j = 0; j < k; ++j) {
      const double lam = ges.eigenvalues()(j);
      if (std::abs(lam - prev[std::size_t(j)]) > 1e-13 * std::abs(lam))
        converged = false;
      prev[std::size_t(j)] = lam;
    }
    if (converged) {
      res.lambda = prev;
      res.vectors = z.leftCols(k);
      return res;
    }
  }
  throw std::runtime_error("eigensolver did not converge");
}

ExtrapolatedEigenvalues eigenvalues_extrapolated(
    const TruncatedEigenproblem& prob, int k) {
  TruncatedEigenproblem fine = prob;
  fine.grid_n = 2 * prob.grid_n;
  const EigenSolveResult coarse = eigenvalues_truncated(prob, k);
  const EigenSolveResult refined = eigenvalues_truncated(fine, k);
  ExtrapolatedEigenvalues out;
  for (int j = 0; j < k; ++j) {
    const double l1 = coarse.lambda[std::size_t(j)];
    const double l2 = refined.lambda[std::size_t(j)];
    out.lambda.push_back(l2 + (l2 - l1) / 3);  // O(h^2) Richardson
    out.grid_error.push_back(std::abs(l2 - l1) / 3);
  }
  return out;
}

EigenTable truncation_ladder(double alpha, int n, double mu_mode, int j_count,
                             int k_min, int k_max, int grid_n) {
  require(k_max > k_min + 2, "ladder too short");
  EigenTable table;
  table.expected_rate = alpha * (n / 2.0 - 1) + 1;

  std::vector<std::vector<double>> lam(static_cast<std::size_t>(j_count));
  std::vector<double> eps_list;
  for (int k = k_min; k <= k_max; ++k) {
    TruncatedEigenproblem prob;
    prob.alpha = alpha;
    prob.n = n;
    prob.mu_mode = mu_mode;
    prob.eps = std::pow(2.0, -k);
    prob.grid_n = grid_n;
    const ExtrapolatedEigenvalues ev = eigenvalues_extrapolated(prob, j_count);
    eps_list.push_back(prob.eps);
    for (int j = 0; j < j_count; ++j) {
      lam[std::size_t(j)].push_back(ev.lambda[std::size_t(j)]);
      table.rows.push_back({prob.eps, j + 1, ev.lambda[std::size_t(j)]});
    }
  }

  const std::size_t last = eps_list.size() - 1;
  const double rho = std::pow(2.0, table.expected_rate);
  for (int j = 0; j < j_count; ++j) {
    const auto& l = lam[std::size_t(j)];
    // eps -> 0 limit from the two smallest eps with the theoretical exponent
    const double limit = l[last] + (l[last] - l[last - 1]) / (rho - 1);
    table.lambda_limit.push_back(limit);
    // Rate from successive differences lambda(eps) - lambda(eps/2) ~ C eps^r:
    // the (near eps-independent) discretization offset cancels, so the tail
    // rungs stay usable well below the raw grid error. Fit the asymptotic
    // tail (last 6 differences).
    std::vector<double> fe, fd;
    for (std::size_t i = 0; i + 1 < eps_list.size(); ++i) {
      const double d = l[i] - l[i + 1];
      require(d > 0, "Dirichlet monotonicity violated in the ladder");
      fe.push_back(eps_list[i]);
      fd.push_back(d);
    }
    const std::size_t keep = std::min<std::size_t>(6, fd.size());
    require(keep >= 4, "too few usable ladder points for the rate fit");
    fe.erase(fe.begin(), fe.end() - static_cast<std::ptrdiff_t>(keep));
    fd.erase(fd.begin(), fd.end() - static_cast<std::ptrdiff_t>(keep));
    table.slopes.push_back(fit_loglog(fe, fd).slope);
  }
  return table;
}

BoundaryProfile eigenfunction_boundary_profile(
    const TruncatedEigenproblem& prob, int j) {
  require(j >= 1, "eigenfunction index is 1-based");
  const EigenSolveResult sol = eigenvalues_truncated(prob, j);
  const RadialOperator op = assemble_radial(prob);
  const Eigen::VectorXd phi =
      sol.vectors.col(j - 1) / sol.vectors.col(j - 1).cwiseAbs().maxCoeff();
  const double eps = prob.eps;
  const double gexp = prob.alpha * (prob.n / 2.0 - 1);

  BoundaryProfile out;
  out.expected_beta = gexp + 1;

  std::vector<double> fx, fv, ratios;
  std::vector<double> wx, wv;
  for (Eigen::Index i = 1; i + 1 < op.nodes.size(); ++i) {
    const double x = op.nodes(i);
    const double v = std::abs(phi(i - 1));
    if (x >= 10 * eps && x <= 0.1 && v > 0) {
      fx.push_back(x);
      fv.push_back(v);
    }
    if (x <= 2 * eps) {
      wx.push_back(x);
      wv.push_back(phi(i - 1));
    }
    ratios.push_back(v / (x * std::pow(eps + x, gexp)));
  }
  require(fx.size() >= 8, "fit window collides with the truncation");
  out.beta = fit_loglog(fx, fv).slope;

  std::sort(ratios.begin(), ratios.end());
  const double median = ratios[ratios.size() / 2];
  out.bound_spread = ratios.back() / std::max(median, 1e-300);

  // Dirichlet wall: least-squares line through (eps, 0) on [eps, 2 eps]
  require(wx.size() >= 3, "grid too coarse at the wall");
  double num = 0, den = 0, sup = 0;
  for (std::size_t i = 0; i < wx.size(); ++i) {
    num += wv[i] * (wx[i] - eps);
    den += (wx[i] - eps) * (wx[i] - eps);
    sup = std::max(sup, std::abs(wv[i]));
  }
  const double slope = num / den;
  double mis = 0;
  for (std::size_t i = 0; i < wx.size(); ++i)
    mis = std::max(mis, std::abs(wv[i] - slope * (wx[i] - eps)));
  out.wall_linear_residual = mis / std::max(sup, 1e-300);
  return out;
}

}  // namespace gasgiant
