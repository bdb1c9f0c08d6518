#include "onfarm/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "onfarm/errors.hpp"
#include "onfarm/report_json.hpp"

namespace onfarm {

using nlohmann::json;

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();

  RunConfig config;
  config.raw_bytes = buffer.str();

  json j;
  try {
    j = json::parse(config.raw_bytes);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
  }

  try {
    config.input = j.value("input", "");
    config.output_dir = j.value("output_dir", "out");
    config.grid_dir = j.value("grid_dir", "");
    config.seed = j.value("seed", std::uint64_t{0});
    config.threads = j.value("threads", 1);

    if (j.contains("preprocess")) {
      const json& p = j["preprocess"];
      config.dx = p.value("dx", 2.5);
      config.dy = p.value("dy", 2.5);
      config.heading = p.value("heading", 0.0);
      config.row_width = p.value("row_width", 0.0);
      config.side_margin = p.value("side_margin", 0.0);
      config.headland_margin = p.value("headland_margin", 0.0);
      config.field_width_x = p.value("field_width_x", 0.0);
      config.field_length_y = p.value("field_length_y", 0.0);
    }

    for (const json& d : j.value("designs", json::array())) {
      config.designs.push_back(layout_from_json(d));
    }
    for (const json& m : j.value("models", json::array())) {
      config.models.push_back(model_choice_from_name(m.get<std::string>()));
    }

    if (j.contains("fit")) {
      config.n_starts = j["fit"].value("n_starts", 8);
      config.fit_max_iterations = j["fit"].value("max_iterations", 500);
    }
    if (j.contains("variogram")) {
      config.min_pairs = j["variogram"].value("min_pairs", std::size_t{30});
      config.max_lag = j["variogram"].value("max_lag", 0.0);
    }

    if (j.contains("simulation")) {
      const json& s = j["simulation"];
      config.n_reps = s.value("n_reps", 1);
      config.effect_mean = s.value("effect_mean", 0.3);
      config.effect_sd = s.value("effect_sd", 0.10);
      config.alpha_level = s.value("alpha_level", 0.05);
      config.experiments = s.value("experiments", std::vector<std::string>{"null"});
      if (s.contains("field") && s["field"].value("source", "grid") == "synthetic") {
        const json& f = s["field"];
        config.synthetic_field = true;
        config.synthetic.lattice.nx = f.at("nx").get<int>();
        config.synthetic.lattice.ny = f.at("ny").get<int>();
        config.synthetic.lattice.dx = f.value("dx", 1.0);
        config.synthetic.lattice.dy = f.value("dy", 1.0);
        config.synthetic.mean = f.value("mean", 0.0);
        config.synthetic.model = params_from_json(f.at("model"));
      }
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad config value: ") + ex.what());
  }

  if (config.grid_dir.empty()) config.grid_dir = config.output_dir;
  for (const auto& e : config.experiments) {
    if (e != "null" && e != "effect") {
      throw ConfigError("experiments entries must be 'null' or 'effect', got " + e);
    }
  }
  return config;
}

}  // namespace onfarm
