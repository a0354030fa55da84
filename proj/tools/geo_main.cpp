#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gasgiant/experiments.hpp"
#include "gasgiant/jacobi.hpp"
#include "gasgiant/spectral.hpp"
#include "json.hpp"

using namespace gasgiant;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Eigen::VectorXd parse_vec(const std::string& csv, int expect) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  require(int(vals.size()) == expect,
          "expected " + std::to_string(expect) + " components, got '" + csv + "'");
  Eigen::VectorXd v(expect);
  for (int i = 0; i < expect; ++i) v(i) = vals[std::size_t(i)];
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write " + path);
  return out;
}

double smooth_bump(double s) {
  const double t = 1 - s * s;
  return t > 0 ? std::exp(1 - 1 / t) : 0.0;
}

void write_trajectory_csv(const GasGiantMetric& M, const Trajectory& tr,
                          const std::string& path, int samples) {
  std::ofstream out = open_out(path);
  const int bd = M.dim() - 1;
  out << "t,x";
  for (int i = 0; i < bd; ++i) out << ",y" << i;
  out << ",xi";
  for (int i = 0; i < bd; ++i) out << ",eta" << i;
  out << ",H\n";
  for (int s = 0; s <= samples; ++s) {
    const double t = tr.t_end * double(s) / double(samples);
    const PhasePoint p = tr.state_at(t);
    out << fmt(t) << "," << fmt(p.x);
    for (int i = 0; i < bd; ++i) out << "," << fmt(p.y(i));
    out << "," << fmt(p.xi);
    for (int i = 0; i < bd; ++i) out << "," << fmt(p.eta(i));
    out << "," << fmt(p.x > 0 ? hamiltonian(M, p) : tr.H0) << "\n";
  }
  ordered_json footer;
  footer["status"] = tr.status == TrajStatus::exited ? "exited"
                     : tr.status == TrajStatus::exited_top ? "exited_top"
                     : tr.status == TrajStatus::trapped_suspect
                         ? "trapped_suspect"
                         : "alive";
  footer["t_end"] = tr.t_end;
  footer["length"] = tr.length;
  footer["hamiltonian_drift"] = tr.hamiltonian_drift;
  if (tr.exit_record) {
    const ExitRecord& e = *tr.exit_record;
    footer["exit_record"] = {
        {"T", e.T},
        {"y_bar", std::vector<double>(e.y_bar.data(), e.y_bar.data() + e.y_bar.size())},
        {"eta_bar",
         std::vector<double>(e.eta_bar.data(), e.eta_bar.data() + e.eta_bar.size())},
        {"length", e.length}};
  }
  out << "# " << footer.dump() << "\n";
}

int cmd_trace(const std::string& metric_path, double x0, const std::string& y0,
              double xi, const std::string& eta, const std::string& out_path,
              int samples) {
  const GasGiantMetric M = metric_from_json_file(metric_path);
  const int bd = M.dim() - 1;
  const PhasePoint start =
      make_unit_speed(M, x0, parse_vec(y0, bd), xi, parse_vec(eta, bd));
  GeoOptions opts;
  opts.allow_top_exit = true;
  const Trajectory tr = integrate_to_boundary(M, start, opts);
  write_trajectory_csv(M, tr, out_path, samples);
  return 0;
}

int cmd_distance(const std::string& metric_path, const std::string& pairs_path,
                 const std::string& out_path) {
  const GasGiantMetric M = metric_from_json_file(metric_path);
  require(M.dim() == 2, "distance: 2D collars only");
  std::ifstream in(pairs_path);
  require(in.good(), "cannot open pairs file: " + pairs_path);
  std::ofstream out = open_out(out_path);
  out << "y1,y2,d_g,apex_x,iterations\n";
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.find_first_of("0123456789-.") != 0)
      continue;
    std::stringstream ss(line);
    std::string a, b;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    const double y1 = std::stod(a), y2 = std::stod(b);
    const ConnectionResult c = connect_boundary_points(M, y1, y2);
    out << fmt(y1) << "," << fmt(y2) << "," << fmt(c.d_g) << ","
        << fmt(c.apex_x) << "," << c.iterations << "\n";
  }
  return 0;
}

int cmd_jacobi(const std::string& metric_path, double x0, const std::string& y0,
               double xi, const std::string& eta,
               const std::string& report_path) {
  const GasGiantMetric M = metric_from_json_file(metric_path);
  const int bd = M.dim() - 1;
  const PhasePoint start =
      make_unit_speed(M, x0, parse_vec(y0, bd), xi, parse_vec(eta, bd));
  const JacobiRun run = jacobi_run(M, start);
  const std::vector<double> conj = conjugate_point_scan(run);

  ordered_json rep;
  rep["status"] = run.status == TrajStatus::exited ? "exited"
                  : run.status == TrajStatus::trapped_suspect ? "trapped_suspect"
                                                              : "alive";
  rep["length"] = run.length;
  rep["x_floor"] = run.x_floor;
  rep["gronwall_log"] = run.gronwall_log;
  rep["sup_ratio"] = run.sup_ratio;
  rep["conjugate_times"] = conj;
  rep["conjugate_count"] = conj.size();
  if (run.exit_record)
    rep["exit_y_bar"] = std::vector<double>(
        run.exit_record->y_bar.data(),
        run.exit_record->y_bar.data() + run.exit_record->y_bar.size());
  open_out(report_path) << rep.dump(2) << "\n";
  return 0;
}

int cmd_xray(const std::string& metric_path, const std::string& field_path,
             const std::string& rays_path, const std::string& out_path) {
  const GasGiantMetric M = metric_from_json_file(metric_path);
  require(M.dim() == 2, "xray: 2D collars only");
  const ScalarField field = field_from_json_file(field_path);
  std::ifstream in(rays_path);
  require(in.good(), "cannot open ray catalog: " + rays_path);
  std::ofstream out = open_out(out_path);
  out << "y,eta,integral\n";
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.find_first_of("0123456789-.") != 0)
      continue;
    std::stringstream ss(line);
    std::string a, b;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    Eigen::VectorXd y(1), eta(1);
    y(0) = std::stod(a);
    eta(0) = std::stod(b);
    const double v = xray_transform(M, field, RaySpec{y, eta});
    out << fmt(y(0)) << "," << fmt(eta(0)) << "," << fmt(v) << "\n";
  }
  return 0;
}

int cmd_pestov(const std::string& metric_path, double eps, int grid,
               const std::string& out_path) {
  const GasGiantMetric M = metric_from_json_file(metric_path);
  require(M.dim() == 2, "pestov: 2D collars only");
  SphereBundleField u;
  u.u = [](double x, double y, double theta) {
    return smooth_bump((x - 0.55) / 0.3) * smooth_bump((y - 0.5) / 0.2) *
           (0.3 + std::cos(theta) + 0.2 * std::sin(2 * theta));
  };
  const PestovTerms p = pestov_terms(M, u, eps, grid);
  ordered_json rep;
  rep["eps"] = eps;
  rep["grid"] = grid;
  rep["lhs"] = p.lhs;
  rep["t_xv"] = p.t_xv;
  rep["t_curv"] = p.t_curv;
  rep["t_n"] = p.t_n;
  rep["t_boundary"] = p.t_boundary;
  rep["residual"] = p.residual;
  open_out(out_path) << rep.dump(2) << "\n";
  return 0;
}

int cmd_spectrum(double alpha, int dim, double mu, const std::string& eps_ladder,
                 int k_modes, int grid_n, const std::string& out_path) {
  int k_min = 4, k_max = 14;
  const auto colon = eps_ladder.find(':');
  require(colon != std::string::npos, "--eps-ladder expects K_MIN:K_MAX");
  k_min = std::stoi(eps_ladder.substr(0, colon));
  k_max = std::stoi(eps_ladder.substr(colon + 1));
  require(k_min <= k_max, "--eps-ladder expects K_MIN <= K_MAX");

  std::ofstream out = open_out(out_path);
  out << "alpha,n,mu,eps,j,lambda,grid_N,sym_residual\n";
  for (int k = k_min; k <= k_max; ++k) {
    TruncatedEigenproblem prob;
    prob.alpha = alpha;
    prob.n = dim;
    prob.mu_mode = mu;
    prob.eps = std::pow(2.0, -k);
    prob.grid_n = grid_n;
    const double sym = symmetry_residual(assemble_radial(prob));
    const EigenSolveResult r = eigenvalues_truncated(prob, k_modes);
    for (int j = 1; j <= k_modes; ++j)
      out << fmt(alpha) << "," << dim << "," << fmt(mu) << "," << fmt(prob.eps)
          << "," << j << "," << fmt(r.lambda[std::size_t(j - 1)]) << ","
          << grid_n << "," << fmt(sym) << "\n";
  }
  return 0;
}

int cmd_run(const std::string& config_path, int jobs) {
  const std::vector<ExperimentConfig> configs =
      experiment_batch_from_json_file(config_path);
  const std::vector<ExperimentReport> reports = run_experiments(configs, jobs);
  for (const auto& r : reports) {
    std::cout << (r.failed_to_run ? "ERROR" : r.pass ? "PASS" : "FAIL") << "  "
              << r.name;
    if (!r.message.empty()) std::cout << "  (" << r.message << ")";
    std::cout << "\n";
  }
  return batch_exit_code(reports);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geodesic and spectral toolkit for degenerate collar metrics"};
  app.require_subcommand(1);

  std::string metric_path, out_path, y0 = "0", eta = "1", field_path, rays_path;
  std::string pairs_path, report_path, config_path, eps_ladder = "4:14";
  double x0 = 0.5, xi = 0, eps = 0.1, alpha = 1, mu = 0;
  int grid = 64, dim = 2, k_modes = 5, grid_n = 600, jobs = 1, samples = 256;

  auto* trace = app.add_subcommand("trace", "integrate one bicharacteristic");
  trace->add_option("--metric", metric_path)->required();
  trace->add_option("--x0", x0)->required();
  trace->add_option("--y0", y0);
  trace->add_option("--xi", xi);
  trace->add_option("--eta", eta);
  trace->add_option("--samples", samples);
  trace->add_option("--out", out_path)->required();

  auto* dist = app.add_subcommand("distance", "boundary distances by shooting");
  dist->add_option("--metric", metric_path)->required();
  dist->add_option("--pairs", pairs_path)->required();
  dist->add_option("--out", out_path)->required();

  auto* jac = app.add_subcommand("jacobi", "Jacobi fields along one orbit");
  jac->add_option("--metric", metric_path)->required();
  jac->add_option("--x0", x0)->required();
  jac->add_option("--y0", y0);
  jac->add_option("--xi", xi);
  jac->add_option("--eta", eta);
  jac->add_option("--report", report_path)->required();

  auto* xr = app.add_subcommand("xray", "ray transform over a catalog");
  xr->add_option("--metric", metric_path)->required();
  xr->add_option("--field", field_path)->required();
  xr->add_option("--rays", rays_path)->required();
  xr->add_option("--out", out_path)->required();

  auto* pes = app.add_subcommand("pestov", "bundle energy identity terms");
  pes->add_option("--metric", metric_path)->required();
  pes->add_option("--eps", eps);
  pes->add_option("--grid", grid);
  pes->add_option("--out", out_path)->required();

  auto* spec = app.add_subcommand("spectrum", "truncated eigenvalue ladder");
  spec->add_option("--alpha", alpha)->required();
  spec->add_option("--dim", dim)->required();
  spec->add_option("--mode-mu", mu);
  spec->add_option("--eps-ladder", eps_ladder);
  spec->add_option("--k", k_modes);
  spec->add_option("--grid", grid_n);
  spec->add_option("--out", out_path)->required();

  auto* run = app.add_subcommand("run", "run declarative experiments");
  run->add_option("--config", config_path)->required();
  run->add_option("--jobs", jobs);

  CLI11_PARSE(app, argc, argv);

  try {
    if (trace->parsed())
      return cmd_trace(metric_path, x0, y0, xi, eta, out_path, samples);
    if (dist->parsed()) return cmd_distance(metric_path, pairs_path, out_path);
    if (jac->parsed())
      return cmd_jacobi(metric_path, x0, y0, xi, eta, report_path);
    if (xr->parsed())
      return cmd_xray(metric_path, field_path, rays_path, out_path);
    if (pes->parsed()) return cmd_pestov(metric_path, eps, grid, out_path);
    if (spec->parsed())
      return cmd_spectrum(alpha, dim, mu, eps_ladder, k_modes, grid_n, out_path);
    if (run->parsed()) return cmd_run(config_path, jobs);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 3;
}
