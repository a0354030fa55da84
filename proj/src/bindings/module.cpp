#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gasgiant/experiments.hpp"
#include "gasgiant/jacobi.hpp"
#include "gasgiant/metric.hpp"
#include "gasgiant/profile.hpp"
#include "gasgiant/spectral.hpp"

namespace py = pybind11;
using namespace gasgiant;

namespace {

const char* status_name(TrajStatus s) {
  switch (s) {
    case TrajStatus::exited: return "exited";
    case TrajStatus::exited_top: return "exited_top";
    case TrajStatus::trapped_suspect: return "trapped_suspect";
    default: return "alive";
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "numerical toolkit for degenerate gas-giant metrics";

  py::class_<GasGiantMetric, std::shared_ptr<GasGiantMetric>>(m, "Metric")
      .def_property_readonly("alpha", &GasGiantMetric::alpha)
      .def_property_readonly("dim", &GasGiantMetric::dim)
      .def_property_readonly("x_max", &GasGiantMetric::x_max);

  m.def("metric_from_json", [](const std::string& text) {
    return std::make_shared<GasGiantMetric>(metric_from_json(text));
  });
  m.def("metric_from_json_file", [](const std::string& path) {
    return std::make_shared<GasGiantMetric>(metric_from_json_file(path));
  });
  m.def("flat_metric", [](double alpha, int dim, double x_max) {
    return std::make_shared<GasGiantMetric>(
        alpha, dim, std::make_shared<FlatFamily>(dim - 1), x_max);
  }, py::arg("alpha"), py::arg("dim") = 2, py::arg("x_max") = 1.0);

  py::class_<MetricJet>(m, "MetricJet")
      .def_readonly("x", &MetricJet::x)
      .def_readonly("y", &MetricJet::y)
      .def_readonly("g", &MetricJet::g)
      .def_readonly("g_inv", &MetricJet::g_inv)
      .def_readonly("gamma", &MetricJet::gamma);
  m.def("metric_jet",
        [](const std::shared_ptr<GasGiantMetric>& metric, double x,
           const Eigen::VectorXd& y) { return metric_jet(*metric, x, y); });

  m.def("sectional_curvature",
        [](const std::shared_ptr<GasGiantMetric>& metric, double x,
           const Eigen::VectorXd& y, bool radial, int beta, int gamma) {
          PlanePair plane{radial ? PlanePair::RadialTangential
                                 : PlanePair::TangentialTangential,
                          beta, gamma};
          return sectional_curvature(*metric, x, y, plane);
        },
        py::arg("metric"), py::arg("x"), py::arg("y"), py::arg("radial") = true,
        py::arg("beta") = 0, py::arg("gamma") = 1);

  m.def("volume_sublevel",
        [](const std::shared_ptr<GasGiantMetric>& metric, double eps) {
          return volume_sublevel(*metric, eps);
        });

  // geodesic flow
  py::class_<ExitRecord>(m, "ExitRecord")
      .def_readonly("T", &ExitRecord::T)
      .def_readonly("y_bar", &ExitRecord::y_bar)
      .def_readonly("eta_bar", &ExitRecord::eta_bar)
      .def_readonly("length", &ExitRecord::length);

  m.def("trace_from_boundary",
        [](const std::shared_ptr<GasGiantMetric>& metric,
           const Eigen::VectorXd& y1, const Eigen::VectorXd& eta1) {
          const Trajectory tr = trace_from_boundary(*metric, y1, eta1);
          py::dict out;
          out["status"] = status_name(tr.status);
          out["t_end"] = tr.t_end;
          out["length"] = tr.length;
          if (tr.exit_record) out["exit_record"] = *tr.exit_record;
          return out;
        });

  py::class_<RateFit>(m, "RateFit")
      .def_readonly("slope", &RateFit::slope)
      .def_readonly("intercept", &RateFit::intercept)
      .def("prefactor", &RateFit::prefactor);
  m.def("fit_loglog", &fit_loglog);
  m.def("exit_time_scaling",
        [](const std::shared_ptr<GasGiantMetric>& metric,
           const Eigen::VectorXd& y0, const Eigen::VectorXd& eta_dir,
           int k_min, int k_max) {
          return exit_time_scaling(*metric, y0, eta_dir, k_min, k_max);
        },
        py::arg("metric"), py::arg("y0"), py::arg("eta_dir"),
        py::arg("k_min") = 4, py::arg("k_max") = 16);

  py::class_<ScatteringResult>(m, "ScatteringResult")
      .def_readonly("y_out", &ScatteringResult::y_out)
      .def_readonly("eta_out", &ScatteringResult::eta_out)
      .def_readonly("total_time", &ScatteringResult::total_time)
      .def_readonly("length", &ScatteringResult::length)
      .def_readonly("apex_x", &ScatteringResult::apex_x);
  m.def("scattering_relation",
        [](const std::shared_ptr<GasGiantMetric>& metric,
           const Eigen::VectorXd& y_in, const Eigen::VectorXd& eta_in) {
          return scattering_relation(*metric, y_in, eta_in);
        });

  m.def("boundary_distance",
        [](const std::shared_ptr<GasGiantMetric>& metric, double y1, double y2) {
          const ConnectionResult c = connect_boundary_points(*metric, y1, y2);
          return py::make_tuple(c.d_g, c.apex_x);
        });
  m.def("hausdorff_dimension_boundary",
        [](const std::shared_ptr<GasGiantMetric>& metric) {
          return hausdorff_dimension_boundary(*metric);
        });

  // Jacobi fields
  m.def("jacobi_summary",
        [](const std::shared_ptr<GasGiantMetric>& metric, double x0,
           const Eigen::VectorXd& y0, double xi_dir,
           const Eigen::VectorXd& eta_dir) {
          const JacobiRun run = jacobi_run(
              *metric, make_unit_speed(*metric, x0, y0, xi_dir, eta_dir));
          py::dict out;
          out["status"] = status_name(run.status);
          out["length"] = run.length;
          out["gronwall_log"] = run.gronwall_log;
          out["sup_ratio"] = run.sup_ratio;
          out["conjugate_times"] = conjugate_point_scan(run);
          return out;
        });

  // ray transform
  m.def("xray_transform",
        [](const std::shared_ptr<GasGiantMetric>& metric,
           const std::string& field_json, const Eigen::VectorXd& y,
           const Eigen::VectorXd& eta) {
          return xray_transform(*metric, field_from_json(field_json),
                                RaySpec{y, eta});
        });
  py::class_<InjectivityReport>(m, "InjectivityReport")
      .def_readonly("n_basis", &InjectivityReport::n_basis)
      .def_readonly("n_rays", &InjectivityReport::n_rays)
      .def_readonly("sigma_min", &InjectivityReport::sigma_min)
      .def_readonly("sigma_max", &InjectivityReport::sigma_max)
      .def_readonly("cond", &InjectivityReport::cond)
      .def_readonly("rank_loss", &InjectivityReport::rank_loss);
  m.def("discrete_injectivity_probe",
        [](const std::shared_ptr<GasGiantMetric>& metric, int nx, int ny,
           int n_rays, unsigned seed) {
          return discrete_injectivity_probe(*metric, nx, ny, n_rays, seed);
        },
        py::arg("metric"), py::arg("nx"), py::arg("ny"), py::arg("n_rays"),
        py::arg("seed"));

  // spectral theory
  py::class_<IndicialData>(m, "IndicialData")
      .def_readonly("alpha", &IndicialData::alpha)
      .def_readonly("n", &IndicialData::n)
      .def_readonly("gamma_minus", &IndicialData::gamma_minus)
      .def_readonly("gamma_plus", &IndicialData::gamma_plus)
      .def_readonly("mu_minus", &IndicialData::mu_minus)
      .def_readonly("mu_plus", &IndicialData::mu_plus)
      .def_readonly("essentially_self_adjoint",
                    &IndicialData::essentially_self_adjoint);
  m.def("indicial_data", &indicial_data);

  m.def("eigenvalues_truncated",
        [](double alpha, int n, double mu, double eps, int grid_n, int k) {
          TruncatedEigenproblem prob;
          prob.alpha = alpha;
          prob.n = n;
          prob.mu_mode = mu;
          prob.eps = eps;
          prob.grid_n = grid_n;
          return eigenvalues_truncated(prob, k).lambda;
        },
        py::arg("alpha"), py::arg("n"), py::arg("mu") = 0.0,
        py::arg("eps") = 1e-2, py::arg("grid_n") = 800, py::arg("k") = 5);

  py::class_<EigenTable>(m, "EigenTable")
      .def_readonly("lambda_limit", &EigenTable::lambda_limit)
      .def_readonly("slopes", &EigenTable::slopes)
      .def_readonly("expected_rate", &EigenTable::expected_rate)
      .def_property_readonly("rows", [](const EigenTable& t) {
        py::list rows;
        for (const auto& r : t.rows)
          rows.append(py::make_tuple(r.eps, r.j, r.lambda));
        return rows;
      });
  m.def("truncation_ladder", &truncation_ladder, py::arg("alpha"),
        py::arg("n"), py::arg("mu_mode") = 0.0, py::arg("j_count") = 3,
        py::arg("k_min") = 4, py::arg("k_max") = 14, py::arg("grid_n") = 600);

  // profiles and experiments
  py::class_<PolytropeProfile>(m, "PolytropeProfile")
      .def_readonly("n_poly", &PolytropeProfile::n_poly)
      .def_readonly("R", &PolytropeProfile::R)
      .def_readonly("r", &PolytropeProfile::r)
      .def_readonly("theta", &PolytropeProfile::theta)
      .def_readonly("c", &PolytropeProfile::c)
      .def_readonly("alpha_fit", &PolytropeProfile::alpha_fit);
  m.def("lane_emden", &lane_emden, py::arg("n_poly"), py::arg("N") = 3,
        py::arg("r_bound") = 50.0);

  m.def("run_experiment_json", [](const std::string& config_json) {
    const ExperimentReport rep =
        run_experiment(experiment_config_from_json(config_json));
    py::dict out;
    out["name"] = rep.name;
    out["kind"] = rep.kind;
    out["pass"] = rep.pass;
    out["error"] = rep.message;
    out["fitted_values"] = rep.fitted_values;
    out["expected_values"] = rep.expected_values;
    out["summary_path"] = rep.summary_path;
    out["csv_path"] = rep.csv_path;
    return out;
  });
}
