#include "onfarm/report_json.hpp"

#include <sstream>

#include "onfarm/errors.hpp"

namespace onfarm {

using nlohmann::json;

nlohmann::json provenance_json(const Provenance& prov) {
  return json{{"tool", prov.tool},
              {"version", prov.version},
              {"config_hash", prov.config_hash},
              {"seed", prov.seed}};
}

json params_to_json(const CovarianceParams& params) {
  if (const auto* iso = std::get_if<IsoExpParams>(&params)) {
    return json{{"kind", "isotropic"}, {"c0", iso->c0}, {"c1", iso->c1}, {"a", iso->a}};
  }
  const auto& sm = std::get<SumMetricParams>(params);
  return json{{"kind", "anisotropic"}, {"c0", sm.c0},   {"cx1", sm.cx1}, {"ax", sm.ax},
              {"cy1", sm.cy1},         {"ay", sm.ay},   {"cxy1", sm.cxy1},
              {"axy", sm.axy},         {"alpha", sm.alpha}};
}

CovarianceParams params_from_json(const json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "isotropic") {
      return IsoExpParams{j.at("c0").get<double>(), j.at("c1").get<double>(),
                          j.at("a").get<double>()};
    }
    if (kind == "anisotropic") {
      SumMetricParams p;
      p.c0 = j.at("c0").get<double>();
      p.cx1 = j.at("cx1").get<double>();
      p.ax = j.at("ax").get<double>();
      p.cy1 = j.at("cy1").get<double>();
      p.ay = j.at("ay").get<double>();
      p.cxy1 = j.at("cxy1").get<double>();
      p.axy = j.at("axy").get<double>();
      p.alpha = j.at("alpha").get<double>();
      return p;
    }
    throw ConfigError("unknown covariance kind: " + kind);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad covariance parameters: ") + ex.what());
  }
}

json layout_to_json(const DesignLayout& layout) {
  return json{{"name", layout.name},
              {"kind", design_kind_name(layout.kind)},
              {"pass_width", layout.pass_width},
              {"n_passes", layout.n_passes},
              {"split_length", layout.split_length},
              {"phase", layout.phase == Phase::kControl ? "control" : "treatment"}};
}

DesignLayout layout_from_json(const json& j) {
  DesignLayout layout;
  try {
    layout.name = j.at("name").get<std::string>();
    layout.kind = design_kind_from_name(j.at("kind").get<std::string>());
    layout.pass_width = j.at("pass_width").get<double>();
    layout.n_passes = j.value("n_passes", 2);
    layout.split_length = j.value("split_length", 0.0);
    const std::string phase = j.value("phase", "control");
    if (phase != "control" && phase != "treatment") {
      throw ConfigError("phase must be 'control' or 'treatment'");
    }
    layout.phase = phase == "control" ? Phase::kControl : Phase::kTreatment;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad design layout: ") + ex.what());
  }
  layout.validate();
  return layout;
}

namespace {

json coefficients_json(const Eigen::VectorXd& beta, const Eigen::VectorXd& se) {
  json coef = json::array();
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const WaldTest wald = wald_test(beta(i), se(i));
    coef.push_back(json{{"term", i == 0 ? "intercept" : "treatment"},
                        {"beta", beta(i)},
                        {"se", se(i)},
                        {"z", wald.z},
                        {"p", wald.p_two_sided}});
  }
  return coef;
}

}  // namespace

json reml_fit_to_json(const RemlFit& fit, const DesignLayout& layout, const Provenance& prov) {
  json starts = json::array();
  for (const auto& s : fit.starts) {
    json entry{{"objective", s.objective},
               {"iterations", s.iterations},
               {"converged", s.converged}};
    if (!s.error.empty()) entry["error"] = s.error;
    starts.push_back(entry);
  }
  return json{{"provenance", provenance_json(prov)},
              {"design", layout_to_json(layout)},
              {"model", model_kind_name(fit.model_kind)},
              {"params", params_to_json(fit.params)},
              {"coefficients", coefficients_json(fit.beta, fit.se)},
              {"restricted_loglik", fit.restricted_loglik},
              {"aic", fit.aic},
              {"k", fit.k},
              {"n_starts", fit.n_starts},
              {"best_start_index", fit.best_start_index},
              {"converged", fit.converged},
              {"starts", starts}};
}

json ols_fit_to_json(const OlsFit& fit, const DesignLayout& layout, const Provenance& prov) {
  return json{{"provenance", provenance_json(prov)},
              {"design", layout_to_json(layout)},
              {"model", "ols"},
              {"coefficients", coefficients_json(fit.beta, fit.se)},
              {"sigma2", fit.sigma2},
              {"p_value", fit.p_value}};
}

json simulation_report_to_json(const SimulationReport& report, const Provenance& prov) {
  json arms = json::array();
  for (const auto& arm : report.arms) {
    json reps = json::array();
    for (const auto& r : arm.replicates) {
      json rep{{"rep", r.rep}, {"ok", r.ok}};
      if (r.ok) {
        rep["p"] = r.p;
        rep["beta"] = r.beta;
        rep["se"] = r.se;
        rep["ci_low"] = r.ci_low;
        rep["ci_high"] = r.ci_high;
      } else {
        rep["error"] = r.error;
      }
      reps.push_back(rep);
    }
    arms.push_back(json{{"design", arm.design},
                        {"model", arm.model},
                        {"n_ok", arm.n_ok},
                        {"n_failed", arm.n_failed},
                        {"rejection_rate", arm.rejection_rate},
                        {"mean_beta", arm.mean_beta},
                        {"bias", arm.bias},
                        {"mean_ci_width", arm.mean_ci_width},
                        {"ci_covers_zero_rate", arm.ci_covers_zero_rate},
                        {"ci_covers_truth_rate", arm.ci_covers_truth_rate},
                        {"replicates", reps}});
  }
  return json{{"provenance", provenance_json(prov)},
              {"experiment", report.experiment},
              {"effect_mean", report.effect_mean},
              {"effect_sd", report.effect_sd},
              {"n_reps", report.n_reps},
              {"seed", report.seed},
              {"alpha_level", report.alpha_level},
              {"mean_realized_effect", report.mean_realized_effect},
              {"arms", arms}};
}

std::string simulation_report_to_csv(const SimulationReport& report, const Provenance& prov) {
  std::ostringstream out;
  out << prov.comment_line() << "\n";
  out << "design,model,rep,p,beta,se,ci_low,ci_high\n";
  for (const auto& arm : report.arms) {
    for (const auto& r : arm.replicates) {
      if (!r.ok) continue;
      out << arm.design << ',' << arm.model << ',' << r.rep << ',' << format_double(r.p) << ','
          << format_double(r.beta) << ',' << format_double(r.se) << ','
          << format_double(r.ci_low) << ',' << format_double(r.ci_high) << "\n";
    }
  }
  return out.str();
}

}  // namespace onfarm
