#include "gasgiant/metric.hpp"

#include <cmath>

namespace gasgiant {

void FlatFamily::eval(double, const Eigen::VectorXd&, Eigen::MatrixXd& h,
                      Eigen::MatrixXd& dh_dx,
                      std::vector<Eigen::MatrixXd>& dh_dy) const {
  h = Eigen::MatrixXd::Identity(bdim_, bdim_);
  dh_dx = Eigen::MatrixXd::Zero(bdim_, bdim_);
  dh_dy.assign(bdim_, Eigen::MatrixXd::Zero(bdim_, bdim_));
}

void ScalarFunctionFamily::eval(double x, const Eigen::VectorXd& y,
                                Eigen::MatrixXd& h, Eigen::MatrixXd& dh_dx,
                                std::vector<Eigen::MatrixXd>& dh_dy) const {
  const double yy = y(0);
  h.resize(1, 1);
  dh_dx.resize(1, 1);
  dh_dy.assign(1, Eigen::MatrixXd::Zero(1, 1));
  h(0, 0) = h_(x, yy);
  const double step = 1e-6 * (1.0 + std::abs(x));
  if (dh_dx_) {
    dh_dx(0, 0) = dh_dx_(x, yy);
  } else {
    const double xm = std::max(x - step, 0.0);
    dh_dx(0, 0) = (h_(x + step, yy) - h_(xm, yy)) / (x + step - xm);
  }
  if (dh_dy_) {
    dh_dy[0](0, 0) = dh_dy_(x, yy);
  } else if (y_indep_) {
    dh_dy[0](0, 0) = 0.0;
  } else {
    dh_dy[0](0, 0) = (h_(x, yy + step) - h_(x, yy - step)) / (2 * step);
  }
}

namespace {

// Catmull-Rom interpolation and derivative on 4 points with local coord
// t in [0,1] between p1 and p2.
double catmull(double p0, double p1, double p2, double p3, double t, double* d) {
  const double a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
  const double b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
  const double c = -0.5 * p0 + 0.5 * p2;
  if (d) *d = (3 * a * t + 2 * b) * t + c;
  return ((a * t + b) * t + c) * t + p1;
}

int cell_index(const std::vector<double>& g, double v) {
  int i = int(std::upper_bound(g.begin(), g.end(), v) - g.begin()) - 1;
  return std::clamp(i, 0, int(g.size()) - 2);
}

}  // namespace

TabulatedFamily::TabulatedFamily(std::vector<double> x_grid,
                                 std::vector<double> y_grid,
                                 std::vector<std::vector<double>> values)
    : xg_(std::move(x_grid)), yg_(std::move(y_grid)), v_(std::move(values)) {
  require(xg_.size() >= 4 && yg_.size() >= 4, "tabulated family: grid too small");
  require(v_.size() == xg_.size(), "tabulated family: row count mismatch");
  for (const auto& row : v_)
    require(row.size() == yg_.size(), "tabulated family: column count mismatch");
}

double TabulatedFamily::interpolate(double x, double y) const {
  const int nx = int(xg_.size()), ny = int(yg_.size());
  const int ix = std::clamp(cell_index(xg_, x), 1, nx - 3);
  const int iy = std::clamp(cell_index(yg_, y), 1, ny - 3);
  const double tx = (x - xg_[ix]) / (xg_[ix + 1] - xg_[ix]);
  const double ty = (y - yg_[iy]) / (yg_[iy + 1] - yg_[iy]);
  double col[4];
  for (int k = 0; k < 4; ++k) {
    const auto& r = v_[ix - 1 + k];
    col[k] = catmull(r[iy - 1], r[iy], r[iy + 1], r[iy + 2], ty, nullptr);
  }
  return catmull(col[0], col[1], col[2], col[3], tx, nullptr);
}

void TabulatedFamily::eval(double x, const Eigen::VectorXd& y,
                           Eigen::MatrixXd& h, Eigen::MatrixXd& dh_dx,
                           std::vector<Eigen::MatrixXd>& dh_dy) const {
  const double yy = y(0);
  h.resize(1, 1);
  dh_dx.resize(1, 1);
  dh_dy.assign(1, Eigen::MatrixXd::Zero(1, 1));
  h(0, 0) = interpolate(x, yy);
  const double step = 1e-6 * (1.0 + std::abs(x));
  const double xm = std::max(x - step, 0.0);
  dh_dx(0, 0) = (interpolate(x + step, yy) - interpolate(xm, yy)) / (x + step - xm);
  dh_dy[0](0, 0) = (interpolate(x, yy + step) - interpolate(x, yy - step)) / (2 * step);
}

GasGiantMetric::GasGiantMetric(double alpha, int dim,
                               std::shared_ptr<BoundaryFamily> family,
                               double x_max, double spd_floor)
    : alpha_(alpha), dim_(dim), family_(std::move(family)), x_max_(x_max),
      spd_floor_(spd_floor) {
  require(alpha > 0.0 && alpha < 2.0, "alpha must lie strictly in (0, 2)");
  require(dim >= 2, "dim must be >= 2");
  require(x_max > 0.0, "x_max must be positive");
  require(family_ != nullptr, "boundary family required");
  require(family_->boundary_dim() == dim - 1, "family dimension mismatch");
  // Sample SPD on a coarse collar grid.
  Eigen::MatrixXd h, dh_dx;
  std::vector<Eigen::MatrixXd> dh_dy;
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(dim - 1);
  for (int i = 0; i <= 8; ++i) {
    family_eval(x_max_ * i / 8.0, y0, h, dh_dx, dh_dy);
  }
}

void GasGiantMetric::family_eval(double x, const Eigen::VectorXd& y,
                                 Eigen::MatrixXd& h, Eigen::MatrixXd& dh_dx,
                                 std::vector<Eigen::MatrixXd>& dh_dy) const {
  family_->eval(x, y, h, dh_dx, dh_dy);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < spd_floor_)
    throw std::domain_error("boundary family is not positive definite at the sampled point");
}

MetricJet metric_jet(const GasGiantMetric& metric, double x,
                     const Eigen::VectorXd& y) {
  require(x > 0.0, "metric undefined at x <= 0");
  // 10% overshoot margin: short flow-differencing displacements at the outer
  // boundary may poke past x_max; trajectories are still confined by events.
  require(x <= metric.x_max() * 1.1, "x beyond the collar");
  const int n = metric.dim();
  const int m = n - 1;
  const double a = metric.alpha();

  MetricJet jet;
  jet.x = x;
  jet.y = y;
  metric.family_eval(x, y, jet.h, jet.dh_dx, jet.dh_dy);
  jet.h_inv = jet.h.inverse();

  const double w = std::pow(x, -a);
  jet.g = Eigen::MatrixXd::Zero(n, n);
  jet.g_inv = Eigen::MatrixXd::Zero(n, n);
  jet.g(0, 0) = w;
  jet.g_inv(0, 0) = 1.0 / w;
  jet.g.block(1, 1, m, m) = w * jet.h;
  jet.g_inv.block(1, 1, m, m) = jet.h_inv / w;

  jet.gamma.assign(n, Eigen::MatrixXd::Zero(n, n));
  const double half_a_over_x = 0.5 * a / x;
  // Gamma^0
  jet.gamma[0](0, 0) = -half_a_over_x;
  jet.gamma[0].block(1, 1, m, m) =
      half_a_over_x * jet.h - 0.5 * jet.dh_dx;
  // Gamma^k, tangential upper index
  const Eigen::MatrixXd mixed = 0.5 * jet.h_inv * jet.dh_dx;  // (1/2) h^{mk} dxh_{ki}
  for (int mm = 0; mm < m; ++mm) {
    for (int i = 0; i < m; ++i) {
      double v = mixed(mm, i) - (mm == i ? half_a_over_x : 0.0);
      jet.gamma[1 + mm](1 + i, 0) = v;
      jet.gamma[1 + mm](0, 1 + i) = v;
    }
    // H^m_{jk} = (1/2) h^{ml} (d_j h_{lk} + d_k h_{lj} - d_l h_{jk})
    for (int j = 0; j < m; ++j) {
      for (int k = j; k < m; ++k) {
        double s = 0;
        for (int l = 0; l < m; ++l) {
          s += jet.h_inv(mm, l) * (jet.dh_dy[j](l, k) + jet.dh_dy[k](l, j) -
                                   jet.dh_dy[l](j, k));
        }
        s *= 0.5;
        jet.gamma[1 + mm](1 + j, 1 + k) = s;
        jet.gamma[1 + mm](1 + k, 1 + j) = s;
      }
    }
  }
  return jet;
}

namespace {

// d/dz_c of Gamma^a_{db} by central differences, relative step in x.
std::vector<std::vector<Eigen::MatrixXd>> christoffel_derivatives(
    const GasGiantMetric& metric, double x, const Eigen::VectorXd& y) {
  const int n = metric.dim();
  std::vector<std::vector<Eigen::MatrixXd>> dg(n);  // dg[c][a](d,b)
  for (int c = 0; c < n; ++c) {
    double step;
    MetricJet jp, jm;
    if (c == 0) {
      step = 1e-6 * x;
      jp = metric_jet(metric, x + step, y);
      jm = metric_jet(metric, x - step, y);
    } else {
      step = 1e-6 * (1.0 + y.cwiseAbs().maxCoeff());
      Eigen::VectorXd yp = y, ym = y;
      yp(c - 1) += step;
      ym(c - 1) -= step;
      jp = metric_jet(metric, x, yp);
      jm = metric_jet(metric, x, ym);
    }
    dg[c].resize(n);
    for (int aa = 0; aa < n; ++aa)
      dg[c][aa] = (jp.gamma[aa] - jm.gamma[aa]) / (2 * step);
  }
  return dg;
}

}  // namespace

std::vector<double> riemann_lowered(const GasGiantMetric& metric, double x,
                                    const Eigen::VectorXd& y) {
  const int n = metric.dim();
  const MetricJet jet = metric_jet(metric, x, y);
  const auto dgamma = christoffel_derivatives(metric, x, y);

  // R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
  //             + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}
  std::vector<double> up(n * n * n * n, 0.0);
  auto idx = [n](int a, int b, int c, int d) {
    return ((a * n + b) * n + c) * n + d;
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double v = dgamma[c][a](d, b) - dgamma[d][a](c, b);
          for (int e = 0; e < n; ++e)
            v += jet.gamma[a](c, e) * jet.gamma[e](d, b) -
                 jet.gamma[a](d, e) * jet.gamma[e](c, b);
          up[idx(a, b, c, d)] = v;
        }
  std::vector<double> low(n * n * n * n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double v = 0;
          for (int e = 0; e < n; ++e)
            v += jet.g(a, e) * up[idx(e, b, c, d)];
          low[idx(a, b, c, d)] = v;
        }
  return low;
}

double sectional_curvature(const GasGiantMetric& metric, double x,
                           const Eigen::VectorXd& y, const PlanePair& plane) {
  const int n = metric.dim();
  const int m = n - 1;
  require(plane.beta >= 0 && plane.beta < m, "invalid tangential index");
  if (plane.kind == PlanePair::TangentialTangential) {
    require(plane.gamma >= 0 && plane.gamma < m && plane.gamma != plane.beta,
            "degenerate plane");
  }
  const MetricJet jet = metric_jet(metric, x, y);
  const auto R = riemann_lowered(metric, x, y);
  auto idx = [n](int a, int b, int c, int d) {
    return ((a * n + b) * n + c) * n + d;
  };

  // Adapted orthonormal frame: e0 = x^{a/2} d/dx,
  // e_beta = x^{a/2} (h-orthonormal tangential basis).
  const double s = std::pow(x, 0.5 * metric.alpha());
  Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(n, n);  // columns are frame vecs
  frame(0, 0) = s;
  Eigen::LLT<Eigen::MatrixXd> llt(jet.h);
  Eigen::MatrixXd Linv =
      llt.matrixL().solve(Eigen::MatrixXd::Identity(m, m));
  // rows of Linv are h-orthonormal covectors; basis vectors are Linv^T cols
  frame.block(1, 1, m, m) = s * Linv.transpose();

  Eigen::VectorXd u, v;
  if (plane.kind == PlanePair::RadialTangential) {
    u = frame.col(0);
    v = frame.col(1 + plane.beta);
  } else {
    u = frame.col(1 + plane.beta);
    v = frame.col(1 + plane.gamma);
  }
  double K = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          K += R[idx(a, b, c, d)] * u(a) * v(b) * u(c) * v(d);
  return K;
}

CurvatureDistanceLaw curvature_distance_law(const GasGiantMetric& metric,
                                            bool verify, double s_sample) {
  const double a = metric.alpha();
  CurvatureDistanceLaw law;
  law.radial_constant = -2 * a / ((2 - a) * (2 - a));
  law.tangential_constant = -a * a / ((2 - a) * (2 - a));
  if (!verify) return law;

  const double x = std::pow((1 - a / 2) * s_sample, 2.0 / (2.0 - a));
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(metric.dim() - 1);
  PlanePair rad{PlanePair::RadialTangential, 0, 1};
  const double s2 = s_sample * s_sample;
  law.radial_fitted = s2 * sectional_curvature(metric, x, y0, rad);
  if (metric.dim() >= 3) {
    PlanePair tan{PlanePair::TangentialTangential, 0, 1};
    law.tangential_fitted = s2 * sectional_curvature(metric, x, y0, tan);
  }
  return law;
}

double volume_weight_exponent(double alpha, int n) { return -n * alpha / 2; }

double volume_sublevel(const GasGiantMetric& metric, double eps) {
  require(eps > 0 && eps < metric.x_max(), "eps must lie in (0, x_max)");
  const int n = metric.dim();
  const int m = n - 1;
  const double a = metric.alpha();
  // dV_g = x^{-n a / 2} sqrt(det h) dx dy over the unit y-box.
  // Integrate in log x; trapezoid over y unit box.
  const int ny = metric.family().y_independent() ? 1 : 17;
  auto cross_section = [&](double x) {
    if (ny == 1) {
      Eigen::MatrixXd h, dh_dx;
      std::vector<Eigen::MatrixXd> dh_dy;
      metric.family_eval(x, Eigen::VectorXd::Zero(m), h, dh_dx, dh_dy);
      return std::sqrt(h.determinant());
    }
    require(m == 1, "sampled cross-section volume implemented for 2D");
    double acc = 0;
    for (int j = 0; j < ny; ++j) {
      Eigen::VectorXd y(1);
      y(0) = (j + 0.5) / ny;
      Eigen::MatrixXd h, dh_dx;
      std::vector<Eigen::MatrixXd> dh_dy;
      metric.family_eval(x, y, h, dh_dx, dh_dy);
      acc += std::sqrt(h.determinant());
    }
    return acc / ny;
  };
  // Gauss-Legendre 16 point on log x over [log eps, log x_max].
  static const double gl_x[8] = {0.0950125098376374, 0.2816035507792589,
                                 0.4580167776572274, 0.6178762444026438,
                                 0.7554044083550030, 0.8656312023878318,
                                 0.9445750230732326, 0.9894009349916499};
  static const double gl_w[8] = {0.1894506104550685, 0.1826034150449236,
                                 0.1691565193950025, 0.1495959888165767,
                                 0.1246289712555339, 0.0951585116824928,
                                 0.0622535239386479, 0.0271524594117541};
  const double la = std::log(eps), lb = std::log(metric.x_max());
  // composite over 32 panels for safety with the singular weight
  const int panels = 32;
  double total = 0;
  for (int p = 0; p < panels; ++p) {
    const double pa = la + (lb - la) * p / panels;
    const double pb = la + (lb - la) * (p + 1) / panels;
    const double pm = 0.5 * (pa + pb), ph = 0.5 * (pb - pa);
    for (int i = 0; i < 8; ++i) {
      for (int sgn : {-1, 1}) {
        const double t = pm + sgn * ph * gl_x[i];
        const double x = std::exp(t);
        total += ph * gl_w[i] *
                 std::pow(x, 1.0 + volume_weight_exponent(a, n)) *
                 cross_section(x);
      }
    }
  }
  return total;
}

VolumeGrowth volume_growth_fit(const GasGiantMetric& metric, int k_min,
                               int k_max) {
  const int n = metric.dim();
  const double a = metric.alpha();
  VolumeGrowth out;
  std::vector<double> eps, vol;
  for (int k = k_min; k <= k_max; ++k) {
    const double e = std::pow(2.0, -k);
    eps.push_back(e);
    vol.push_back(volume_sublevel(metric, e));
  }
  if (std::abs(a - 2.0 / n) < 1e-12) {
    // Vol({x >= eps}) = C (-log eps) + D: each halving adds C log 2.
    out.logarithmic = true;
    out.log_coefficient =
        (vol[vol.size() - 1] - vol[vol.size() - 2]) / std::log(2.0);
    return out;
  }
  // Fit shell increments: Vol({x >= eps/2}) - Vol({x >= eps}) ~ eps^{1 - n a/2}
  // exactly for a pure power law, immune to the additive constant contributed
  // by the outer boundary (or by the finite total volume when a < 2/n).
  std::vector<double> e_mid, shell;
  for (std::size_t i = 0; i + 1 < vol.size(); ++i) {
    e_mid.push_back(eps[i + 1]);
    shell.push_back(vol[i + 1] - vol[i]);
  }
  out.fitted_exponent = fit_loglog(e_mid, shell).slope;
  return out;
}

Eigen::MatrixXd second_fundamental_form(const GasGiantMetric& metric,
                                        double eps, const Eigen::VectorXd& y) {
  require(eps > 0 && eps < metric.x_max(), "eps must lie in (0, x_max)");
  const MetricJet jet = metric_jet(metric, eps, y);
  const int m = metric.dim() - 1;
  // A^m_i = -x Gamma^m_{i0}
  Eigen::MatrixXd A(m, m);
  for (int mm = 0; mm < m; ++mm)
    for (int i = 0; i < m; ++i)
      A(mm, i) = -eps * jet.gamma[1 + mm](1 + i, 0);
  return A;
}

}  // namespace gasgiant
