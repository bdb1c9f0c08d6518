#pragma once

#include <nlohmann/json.hpp>

#include "onfarm/design.hpp"
#include "onfarm/inference.hpp"
#include "onfarm/io.hpp"
#include "onfarm/simulation.hpp"

namespace onfarm {

nlohmann::json provenance_json(const Provenance& prov);

nlohmann::json params_to_json(const CovarianceParams& params);
CovarianceParams params_from_json(const nlohmann::json& j);

nlohmann::json layout_to_json(const DesignLayout& layout);
DesignLayout layout_from_json(const nlohmann::json& j);

/// Full REML fit report: model kind, parameters, coefficients with z and p,
/// AIC, and the per-start optimizer diagnostics.
nlohmann::json reml_fit_to_json(const RemlFit& fit, const DesignLayout& layout,
                                const Provenance& prov);

nlohmann::json ols_fit_to_json(const OlsFit& fit, const DesignLayout& layout,
                               const Provenance& prov);

nlohmann::json simulation_report_to_json(const SimulationReport& report, const Provenance& prov);

/// Flat replicate table: design,model,rep,p,beta,se,ci_low,ci_high.
std::string simulation_report_to_csv(const SimulationReport& report, const Provenance& prov);

}  // namespace onfarm
