#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gasgiant/experiments.hpp"
#include "json.hpp"

using namespace gasgiant;
using Eigen::VectorXd;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_dir(const std::string& tag) {
  const auto dir =
      std::filesystem::temp_directory_path() / ("gg_exp_" + tag);
  std::filesystem::remove_all(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("field specs from json") {
  const ScalarField bump = field_from_json(R"({
    "kind": "bump", "vanishing_order": 4,
    "params": {"x_center": 0.5, "x_width": 0.1,
               "y_center": 0.25, "y_width": 0.2, "amplitude": 2.0}})");
  CHECK(bump.vanishing_order == 4);
  VectorXd y(1);
  y << 0.25;
  CHECK(bump(0.5, y) == doctest::Approx(2.0 * cubic_bspline(0) * cubic_bspline(0)));
  CHECK(bump(0.95, y) == 0.0);  // outside the x support
  y << 1.25;  // periodic image of the center
  CHECK(bump(0.5, y) == doctest::Approx(2.0 * cubic_bspline(0) * cubic_bspline(0)));

  const ScalarField poly = field_from_json(R"({
    "kind": "poly", "vanishing_order": 2,
    "params": {"coeffs": [1.0, -0.5], "sin": [0.1]}})");
  y << 0.0;
  CHECK(poly(0.5, y) == doctest::Approx(0.25 * (1 - 0.25)));
  CHECK(verify_vanishing_order(poly, 1));

  CHECK_THROWS_AS(field_from_json(R"({"kind": "nope", "params": {}})"),
                  std::invalid_argument);
}

TEST_CASE("config parsing, defaults, and GEO_SEED override") {
  const std::string text = R"({
    "kind": "exit_time", "seed": 7,
    "ladders": {"k": [4, 6, 8, 10]},
    "params": {"alpha": 1.0},
    "tolerances": {"slope": 0.02}})";
  unsetenv("GEO_SEED");
  ExperimentConfig cfg = experiment_config_from_json(text);
  CHECK(cfg.kind == "exit_time");
  CHECK(cfg.name == "exit_time");  // defaults to the kind
  CHECK(cfg.seed == 7u);
  CHECK(cfg.ladders.at("k").size() == 4);
  CHECK(cfg.tolerances.at("slope") == 0.02);

  setenv("GEO_SEED", "99", 1);
  CHECK(experiment_config_from_json(text).seed == 99u);
  unsetenv("GEO_SEED");
}

TEST_CASE("empty ladder rejected before any compute") {
  ExperimentConfig cfg;
  cfg.kind = "exit_time";
  cfg.ladders["k"] = {};
  cfg.output_dir = temp_dir("empty");
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  // nothing was written
  CHECK_FALSE(std::filesystem::exists(cfg.output_dir + "/exit_time.csv"));

  ExperimentConfig bad;
  bad.kind = "no_such_experiment";
  CHECK_THROWS_AS(run_experiment(bad), std::invalid_argument);

  ExperimentConfig missing;
  missing.kind = "exit_time";
  missing.metric_path = "/no/such/metric.json";
  CHECK_THROWS_AS(run_experiment(missing), std::invalid_argument);
}

TEST_CASE("exit_time experiment passes and reruns byte-identically") {
  ExperimentConfig cfg;
  cfg.kind = "exit_time";
  cfg.name = "exit_alpha1";
  cfg.ladders["k"] = {4, 5, 6, 7, 8, 9, 10};
  cfg.params["alpha"] = 1.0;
  cfg.output_dir = temp_dir("exit");

  const ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.pass);
  CHECK_FALSE(rep.failed_to_run);
  CHECK(rep.fitted_values.at("slope") == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(rep.expected_values.at("slope") == 0.5);

  const auto summary = nlohmann::json::parse(slurp(rep.summary_path));
  CHECK(summary.at("pass").get<bool>());
  CHECK(summary.at("kind").get<std::string>() == "exit_time");
  CHECK(summary.at("fitted_values").contains("slope"));
  CHECK(summary.at("expected_values").contains("prefactor"));

  const std::string first_csv = slurp(rep.csv_path);
  const ExperimentReport again = run_experiment(cfg);
  CHECK(slurp(again.csv_path) == first_csv);  // determinism contract
}

TEST_CASE("summaries validate against the published schema") {
  // structural validation against docs/summary.schema.json: required keys
  // present with the right JSON types, value maps numeric
  const auto schema = nlohmann::json::parse(
      slurp(std::string(GG_SOURCE_DIR) + "/docs/summary.schema.json"));
  ExperimentConfig cfg;
  cfg.kind = "lane_emden_profile";
  cfg.output_dir = temp_dir("schema");
  const ExperimentReport rep = run_experiment(cfg);
  const auto summary = nlohmann::json::parse(slurp(rep.summary_path));

  for (const auto& req : schema.at("required"))
    CHECK(summary.contains(req.get<std::string>()));
  CHECK(summary.at("name").is_string());
  CHECK(summary.at("kind").is_string());
  CHECK(summary.at("seed").is_number_unsigned());
  CHECK(summary.at("pass").is_boolean());
  for (const auto& [key, v] : summary.at("fitted_values").items()) {
    (void)key;
    CHECK(v.is_number());
  }
  CHECK(rep.pass);
}

TEST_CASE("module errors are captured, not propagated") {
  ExperimentConfig cfg;
  cfg.kind = "exit_time";
  cfg.name = "broken";
  cfg.ladders["k"] = {4, 6, 8};
  cfg.params["alpha"] = 1.0;
  cfg.params["x_max"] = -1.0;  // invalid collar: the metric ctor throws
  cfg.output_dir = temp_dir("err");
  const ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.failed_to_run);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.message.empty());
  const auto summary = nlohmann::json::parse(slurp(rep.summary_path));
  CHECK(summary.contains("error"));
  CHECK(batch_exit_code({rep}) == 2);
}

TEST_CASE("concurrent batch writes disjoint reports") {
  ExperimentConfig a;
  a.kind = "lane_emden_profile";
  a.name = "le";
  a.output_dir = temp_dir("batch");
  ExperimentConfig b;
  b.kind = "curvature_law";
  b.name = "curv";
  b.params["alpha"] = 1.0;
  b.output_dir = a.output_dir;

  const auto reports = run_experiments({a, b}, 2);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].name == "le");
  CHECK(reports[1].name == "curv");
  for (const auto& r : reports) {
    CHECK(r.pass);
    CHECK(std::filesystem::exists(r.csv_path));
    CHECK(std::filesystem::exists(r.summary_path));
    CHECK(std::filesystem::exists(r.log_path));
  }
  CHECK(batch_exit_code(reports) == 0);
}
