#include <fstream>
#include <sstream>

#include "gasgiant/metric.hpp"
#include "gasgiant/profile.hpp"
#include "json.hpp"

namespace gasgiant {

GasGiantMetric metric_from_json(const std::string& json_text) {
  const auto doc = nlohmann::json::parse(json_text);
  const double alpha = doc.at("alpha").get<double>();
  const int dim = doc.at("dim").get<int>();
  const double x_max = doc.at("x_max").get<double>();
  const auto& fam = doc.at("family");
  const std::string kind = fam.at("kind").get<std::string>();

  if (kind == "flat") {
    return GasGiantMetric(alpha, dim, std::make_shared<FlatFamily>(dim - 1),
                          x_max);
  }
  if (kind == "tabulated") {
    require(dim == 2, "tabulated family supports dim = 2");
    const auto& par = fam.at("params");
    auto family = std::make_shared<TabulatedFamily>(
        par.at("x_grid").get<std::vector<double>>(),
        par.at("y_grid").get<std::vector<double>>(),
        par.at("values").get<std::vector<std::vector<double>>>());
    return GasGiantMetric(alpha, dim, family, x_max);
  }
  if (kind == "radial_conformal") {
    require(dim == 2, "radial_conformal family supports dim = 2");
    const auto& par = fam.at("params");
    RadialConformalSpec spec;
    spec.R = par.at("R").get<double>();
    spec.r_inner = par.at("r_inner").get<double>();
    const double expo = par.value("c_exponent", alpha / 2);
    const auto coeffs = par.at("c_coeffs").get<std::vector<double>>();
    spec.c = [R = spec.R, expo, coeffs](double r) {
      const double d = R - r;
      double poly = 0;
      for (std::size_t i = coeffs.size(); i-- > 0;)
        poly = poly * d + coeffs[i];
      return std::pow(d, expo) * poly;
    };
    const RadialNormalForm nf = normal_form_radial(spec);
    require(std::abs(nf.alpha_fit - alpha) < 0.05,
            "radial_conformal: fitted boundary order does not match alpha");
    return *nf.metric;
  }
  throw std::invalid_argument("unknown family kind: " + kind);
}

GasGiantMetric metric_from_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open metric file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return metric_from_json(ss.str());
}

}  // namespace gasgiant
