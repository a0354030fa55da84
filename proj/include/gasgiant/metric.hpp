#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gasgiant/common.hpp"

namespace gasgiant {

/// Family h(x, y) of boundary metrics: symmetric positive definite
/// (n-1)x(n-1) matrices with first derivatives in x and y, defined for
/// x in [0, x_max].
class BoundaryFamily {
 public:
  virtual ~BoundaryFamily() = default;
  virtual int boundary_dim() const = 0;  // n - 1
  virtual void eval(double x, const Eigen::VectorXd& y, Eigen::MatrixXd& h,
                    Eigen::MatrixXd& dh_dx,
                    std::vector<Eigen::MatrixXd>& dh_dy) const = 0;
  virtual bool x_independent() const { return false; }
  virtual bool y_independent() const { return false; }
};

/// h == identity.
class FlatFamily final : public BoundaryFamily {
 public:
  explicit FlatFamily(int boundary_dim) : bdim_(boundary_dim) {}
  int boundary_dim() const override { return bdim_; }
  void eval(double x, const Eigen::VectorXd& y, Eigen::MatrixXd& h,
            Eigen::MatrixXd& dh_dx,
            std::vector<Eigen::MatrixXd>& dh_dy) const override;
  bool x_independent() const override { return true; }
  bool y_independent() const override { return true; }

 private:
  int bdim_;
};

/// Scalar h(x,y) for 2D collars, given by callables with optional analytic
/// derivatives. Missing derivatives are filled by central differences with
/// step 1e-6 * (1 + |x|).
class ScalarFunctionFamily final : public BoundaryFamily {
 public:
  using Fn = std::function<double(double, double)>;
  ScalarFunctionFamily(Fn h, Fn dh_dx = nullptr, Fn dh_dy = nullptr,
                       bool y_indep = false)
      : h_(std::move(h)), dh_dx_(std::move(dh_dx)), dh_dy_(std::move(dh_dy)),
        y_indep_(y_indep) {}
  int boundary_dim() const override { return 1; }
  void eval(double x, const Eigen::VectorXd& y, Eigen::MatrixXd& h,
            Eigen::MatrixXd& dh_dx,
            std::vector<Eigen::MatrixXd>& dh_dy) const override;
  bool y_independent() const override { return y_indep_; }

 private:
  Fn h_, dh_dx_, dh_dy_;
  bool y_indep_;
};

/// Scalar h tabulated on a rectangular (x, y) grid, cubic (Catmull-Rom)
/// interpolation; periodic continuation in y.
class TabulatedFamily final : public BoundaryFamily {
 public:
  TabulatedFamily(std::vector<double> x_grid, std::vector<double> y_grid,
                  std::vector<std::vector<double>> values);
  int boundary_dim() const override { return 1; }
  void eval(double x, const Eigen::VectorXd& y, Eigen::MatrixXd& h,
            Eigen::MatrixXd& dh_dx,
            std::vector<Eigen::MatrixXd>& dh_dy) const override;
  double interpolate(double x, double y) const;

 private:
  std::vector<double> xg_, yg_;
  std::vector<std::vector<double>> v_;  // v_[ix][iy]
};

/// Gas-giant metric g = x^{-alpha} (dx^2 + h(x,y)) on a collar
/// [0, x_max] x boundary. Immutable after construction.
class GasGiantMetric {
 public:
  GasGiantMetric(double alpha, int dim, std::shared_ptr<BoundaryFamily> family,
                 double x_max, double spd_floor = 1e-10);

  double alpha() const { return alpha_; }
  int dim() const { return dim_; }
  double x_max() const { return x_max_; }
  const BoundaryFamily& family() const { return *family_; }
  std::shared_ptr<const BoundaryFamily> family_ptr() const { return family_; }

  /// Evaluate h and its derivatives, validating positive definiteness.
  void family_eval(double x, const Eigen::VectorXd& y, Eigen::MatrixXd& h,
                   Eigen::MatrixXd& dh_dx,
                   std::vector<Eigen::MatrixXd>& dh_dy) const;

 private:
  double alpha_;
  int dim_;
  std::shared_ptr<BoundaryFamily> family_;
  double x_max_;
  double spd_floor_;
};

/// Exact metric jet at an interior point: components, inverse, Christoffels.
/// Index 0 is the x direction, 1..n-1 the y directions.
struct MetricJet {
  double x = 0;
  Eigen::VectorXd y;
  Eigen::MatrixXd g;      // n x n
  Eigen::MatrixXd g_inv;  // n x n
  std::vector<Eigen::MatrixXd> gamma;  // gamma[a](b,c) = Gamma^a_{bc}
  Eigen::MatrixXd h, dh_dx, h_inv;
  std::vector<Eigen::MatrixXd> dh_dy;
};

MetricJet metric_jet(const GasGiantMetric& metric, double x,
                     const Eigen::VectorXd& y);

/// Fully lowered Riemann tensor R_{abcd} at (x, y), flattened as
/// R[((a*n + b)*n + c)*n + d]. Christoffel derivatives are taken by central
/// differences with x-relative steps.
std::vector<double> riemann_lowered(const GasGiantMetric& metric, double x,
                                    const Eigen::VectorXd& y);

/// Orthonormal plane selection in the adapted frame
/// (e0 = x^{a/2} dx-dual, e_beta = x^{a/2} h-orthonormal tangential).
struct PlanePair {
  enum Kind { RadialTangential, TangentialTangential } kind = RadialTangential;
  int beta = 0;   // tangential index, 0-based
  int gamma = 1;  // second tangential index (TangentialTangential only)
};

double sectional_curvature(const GasGiantMetric& metric, double x,
                           const Eigen::VectorXd& y, const PlanePair& plane);

/// Limit constants of s^2 K along a boundary-normal ray,
/// s = x^{1-a/2}/(1-a/2): (-2a/(2-a)^2, -a^2/(2-a)^2). In verification mode
/// also returns constants fitted from sampled curvatures.
struct CurvatureDistanceLaw {
  double radial_constant = 0;
  double tangential_constant = 0;
  double radial_fitted = 0;      // s^2 K sampled at small s
  double tangential_fitted = 0;  // only meaningful for n >= 3
};
CurvatureDistanceLaw curvature_distance_law(const GasGiantMetric& metric,
                                            bool verify = false,
                                            double s_sample = 1e-2);

/// Exponent of the Riemannian volume density: dV_g = x^{-n a/2} dx dV_h.
/// Shared by volume_sublevel and the spectral assembly weight.
double volume_weight_exponent(double alpha, int n);

/// Riemannian volume of {eps <= x <= x_max} over a unit-coordinate-box
/// cross-section in y (dV_g = x^{-n a/2} dx dV_h).
double volume_sublevel(const GasGiantMetric& metric, double eps);

/// Growth diagnosis over a geometric eps ladder.
struct VolumeGrowth {
  double fitted_exponent = 0;  // slope of log Vol({x>=eps}) vs log eps
  bool logarithmic = false;    // alpha == 2/n regime
  double log_coefficient = 0;  // Vol / (-log eps) limit when logarithmic
};
VolumeGrowth volume_growth_fit(const GasGiantMetric& metric, int k_min = 4,
                               int k_max = 12);

/// Matrix of v -> nabla_v(-x d/dx) restricted to tangential directions on
/// {x = eps}; eigenvalues tend to alpha/2 (exactly alpha/2 for x-independent h).
Eigen::MatrixXd second_fundamental_form(const GasGiantMetric& metric,
                                        double eps, const Eigen::VectorXd& y);

/// Load a metric from the JSON document
/// {alpha, dim, x_max, family: {kind: "flat"|"radial_conformal"|"tabulated", params...}}.
GasGiantMetric metric_from_json(const std::string& json_text);
GasGiantMetric metric_from_json_file(const std::string& path);

}  // namespace gasgiant
