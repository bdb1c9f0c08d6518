// Command-line front end: preprocess yield data, preview designs, fit
// models, export variograms, and run design simulations, all driven by a
// single JSON config so any run is reproducible from (config, seed).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "onfarm/config.hpp"
#include "onfarm/errors.hpp"
#include "onfarm/inference.hpp"
#include "onfarm/io.hpp"
#include "onfarm/report_json.hpp"
#include "onfarm/simulation.hpp"
#include "onfarm/variogram.hpp"
#include "onfarm/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace onfarm;

namespace {

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  int threads = 0;
};

struct Context {
  RunConfig config;
  Provenance prov;
};

Context make_context(const CommonArgs& args) {
  Context ctx;
  ctx.config = load_run_config(args.config_path);
  if (args.seed_set) ctx.config.seed = args.seed;
  if (!args.out_dir.empty()) {
    ctx.config.output_dir = args.out_dir;
    if (ctx.config.grid_dir.empty()) ctx.config.grid_dir = args.out_dir;
  }
  if (args.threads > 0) ctx.config.threads = args.threads;

  ctx.prov.version = ONFARM_VERSION;
  ctx.prov.config_hash = to_hex(fnv1a_hash(ctx.config.raw_bytes));
  ctx.prov.seed = ctx.config.seed;

  fs::create_directories(ctx.config.output_dir);
  return ctx;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_json_file(const fs::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

YieldGrid load_grid(const RunConfig& config) {
  const fs::path dir = config.grid_dir;
  std::ifstream csv(dir / "grid.csv");
  std::ifstream meta(dir / "grid_meta.json");
  if (!csv || !meta) {
    throw Error("no grid artifacts in " + dir.string() + "; run 'preprocess' first");
  }
  return read_grid(csv, meta);
}

Eigen::VectorXd valid_values_vector(const YieldGrid& grid) {
  const auto values = grid.valid_values();
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

int cmd_preprocess(const CommonArgs& args) {
  const Context ctx = make_context(args);
  const RunConfig& config = ctx.config;
  if (config.input.empty()) throw ConfigError("config has no 'input' file");

  std::ifstream in(config.input);
  if (!in) throw Error("cannot open input: " + config.input);
  const LoadReport loaded = load_yield_points(in);

  std::vector<YieldPoint> points = rotate_coordinates(loaded.points, config.heading);
  if (config.row_width > 0.0) points = align_rows(points, config.row_width);

  const YieldGrid raw_grid = aggregate_to_grid(points, config.dx, config.dy);
  const std::size_t valid_pre_trim = raw_grid.valid_count();

  FieldGeometry geometry;
  geometry.width_x = config.field_width_x > 0.0 ? config.field_width_x : raw_grid.nx * raw_grid.dx;
  geometry.length_y =
      config.field_length_y > 0.0 ? config.field_length_y : raw_grid.ny * raw_grid.dy;
  geometry.heading = config.heading;
  geometry.side_margin = config.side_margin;
  geometry.headland_margin = config.headland_margin;
  const YieldGrid grid = trim_edges(raw_grid, geometry);

  const fs::path dir = config.output_dir;
  {
    std::ostringstream csv, meta;
    write_grid_csv(csv, grid, ctx.prov);
    write_grid_meta(meta, grid, ctx.prov);
    write_text_file(dir / "grid.csv", csv.str());
    write_text_file(dir / "grid_meta.json", meta.str());
  }

  json summary{{"provenance", provenance_json(ctx.prov)},
               {"points_in", loaded.points.size() + loaded.bad_rows.size()},
               {"points_bad", loaded.bad_rows.size()},
               {"points_used", loaded.points.size()},
               {"cells_total", grid.cell_count()},
               {"cells_valid_pre_trim", valid_pre_trim},
               {"cells_valid", grid.valid_count()},
               {"cells_trimmed", valid_pre_trim - grid.valid_count()},
               {"nx", grid.nx},
               {"ny", grid.ny}};
  json bad = json::array();
  for (const auto& row : loaded.bad_rows) {
    bad.push_back(json{{"line", row.line}, {"reason", row.reason}});
  }
  summary["bad_rows"] = bad;
  write_json_file(dir / "preprocess_summary.json", summary);

  std::cout << "preprocess: " << loaded.points.size() << " points -> " << grid.valid_count()
            << " valid cells (" << grid.nx << "x" << grid.ny << ")\n";
  return 0;
}

int cmd_design_preview(const CommonArgs& args) {
  const Context ctx = make_context(args);
  const YieldGrid grid = load_grid(ctx.config);
  if (ctx.config.designs.empty()) throw ConfigError("config lists no designs");

  for (const auto& layout : ctx.config.designs) {
    const TreatmentMask mask = assign_design(grid, layout);
    std::ostringstream csv;
    write_mask_csv(csv, grid, mask, ctx.prov);
    const fs::path path = fs::path(ctx.config.output_dir) / ("design_" + layout.name + "_mask.csv");
    write_text_file(path, csv.str());
    std::cout << "design " << layout.name << ": " << mask.n_control << " control / "
              << mask.n_treated << " treated cells\n";
  }
  return 0;
}

int cmd_fit(const CommonArgs& args) {
  const Context ctx = make_context(args);
  const RunConfig& config = ctx.config;
  if (config.designs.empty()) throw ConfigError("config lists no designs");
  if (config.models.empty()) throw ConfigError("config lists no models");

  const YieldGrid grid = load_grid(config);
  const Eigen::VectorXd y = valid_values_vector(grid);
  const auto cells = grid.valid_centroids();
  const fs::path dir = config.output_dir;

  bool any_ok = false;
  for (const auto& layout : config.designs) {
    const TreatmentMask mask = assign_design(grid, layout);
    const Eigen::MatrixXd x = build_design_matrix(grid, mask);

    std::vector<RemlFit> spatial_fits;
    for (const ModelChoice model : config.models) {
      const fs::path path =
          dir / ("fit_" + layout.name + "_" + model_choice_name(model) + ".json");
      try {
        if (model == ModelChoice::kOls) {
          const OlsFit fit = fit_ols(y, x);
          write_json_file(path, ols_fit_to_json(fit, layout, ctx.prov));
        } else {
          const ModelKind kind = model == ModelChoice::kIsotropic ? ModelKind::kIsotropic
                                                                  : ModelKind::kAnisotropic;
          const auto starts = default_starts(kind, y, cells, config.n_starts);
          FitOptions opts;
          opts.max_iterations = config.fit_max_iterations;
          opts.threads = config.threads;
          const RemlFit fit = fit_reml(y, x, cells, kind, starts, opts);
          write_json_file(path, reml_fit_to_json(fit, layout, ctx.prov));
          spatial_fits.push_back(fit);
        }
        any_ok = true;
        std::cout << "fit " << layout.name << " " << model_choice_name(model) << ": ok\n";
      } catch (const Error& ex) {
        std::cerr << "fit " << layout.name << " " << model_choice_name(model)
                  << " failed: " << ex.what() << "\n";
      }
    }

    if (spatial_fits.size() >= 2) {
      const RemlFit& chosen = select_model(spatial_fits);
      json summary{{"provenance", provenance_json(ctx.prov)},
                   {"design", layout.name},
                   {"selected", model_kind_name(chosen.model_kind)}};
      json aics = json::object();
      for (const auto& fit : spatial_fits) {
        aics[model_kind_name(fit.model_kind)] = fit.aic;
      }
      summary["aic"] = aics;
      summary["delta_aic"] = spatial_fits[0].aic - spatial_fits[1].aic;
      write_json_file(dir / ("fit_" + layout.name + "_selection.json"), summary);
    }
  }
  return any_ok ? 0 : 1;
}

int cmd_variogram(const CommonArgs& args) {
  const Context ctx = make_context(args);
  const RunConfig& config = ctx.config;
  const YieldGrid grid = load_grid(config);
  const Eigen::VectorXd y = valid_values_vector(grid);
  const auto cells = grid.valid_centroids();
  const fs::path dir = config.output_dir;

  double extent_x = 0.0, extent_y = 0.0;
  {
    double min_x = cells[0].x, max_x = cells[0].x, min_y = cells[0].y, max_y = cells[0].y;
    for (const auto& c : cells) {
      min_x = std::min(min_x, c.x);
      max_x = std::max(max_x, c.x);
      min_y = std::min(min_y, c.y);
      max_y = std::max(max_y, c.y);
    }
    extent_x = max_x - min_x;
    extent_y = max_y - min_y;
  }

  bool any_ok = false;
  for (const auto& layout : config.designs) {
    for (const ModelChoice model : config.models) {
      if (model == ModelChoice::kOls) continue;  // no covariance model to draw
      const std::string stem = layout.name + "_" + std::string(model_choice_name(model));
      const fs::path fit_path = dir / ("fit_" + stem + ".json");
      std::ifstream fit_in(fit_path);
      if (!fit_in) continue;

      json fit_json;
      fit_in >> fit_json;
      const CovarianceParams params = params_from_json(fit_json.at("params"));
      Eigen::VectorXd beta(fit_json.at("coefficients").size());
      for (Eigen::Index i = 0; i < beta.size(); ++i) {
        beta(i) = fit_json.at("coefficients")[i].at("beta").get<double>();
      }

      const TreatmentMask mask = assign_design(grid, layout);
      const Eigen::MatrixXd x = build_design_matrix(grid, mask);
      const Eigen::VectorXd resid = y - x * beta;
      const std::vector<double> resid_vec(resid.data(), resid.data() + resid.size());

      const double max_lag_x = config.max_lag > 0.0 ? config.max_lag : 0.5 * extent_x;
      const double max_lag_y = config.max_lag > 0.0 ? config.max_lag : 0.5 * extent_y;
      const EmpiricalVariogram emp_x =
          empirical_variogram(resid_vec, cells, Axis::X, max_lag_x, config.min_pairs);
      const EmpiricalVariogram emp_y =
          empirical_variogram(resid_vec, cells, Axis::Y, max_lag_y, config.min_pairs);

      auto dense_lags = [](double max_lag) {
        std::vector<double> lags;
        const int n = 120;
        for (int i = 1; i <= n; ++i) lags.push_back(max_lag * i / n);
        return lags;
      };
      const auto lags_x = dense_lags(max_lag_x);
      const auto lags_y = dense_lags(max_lag_y);
      const auto fit_x = fitted_curve(params, Axis::X, lags_x);
      const auto fit_y = fitted_curve(params, Axis::Y, lags_y);

      std::ostringstream emp_csv, fit_csv;
      write_empirical_variogram_csv(emp_csv, emp_x, emp_y, ctx.prov);
      write_fitted_variogram_csv(fit_csv, fit_x, fit_y, ctx.prov);
      write_text_file(dir / ("variogram_" + stem + "_empirical.csv"), emp_csv.str());
      write_text_file(dir / ("variogram_" + stem + "_fitted.csv"), fit_csv.str());
      any_ok = true;
      std::cout << "variogram " << stem << ": " << emp_x.bins.size() << " x-bins, "
                << emp_y.bins.size() << " y-bins\n";
    }
  }
  if (!any_ok) {
    throw Error("no completed spatial fits found in " + dir.string() + "; run 'fit' first");
  }
  return 0;
}

int cmd_simulate(const CommonArgs& args) {
  const Context ctx = make_context(args);
  const RunConfig& config = ctx.config;

  SimulationConfig sim;
  sim.effect_mean = config.effect_mean;
  sim.effect_sd = config.effect_sd;
  sim.n_reps = config.n_reps;
  sim.seed = config.seed;
  sim.alpha_level = config.alpha_level;
  sim.designs = config.designs;
  sim.models = config.models;
  sim.n_starts = config.n_starts;
  sim.fit_max_iterations = config.fit_max_iterations;
  sim.threads = config.threads;

  FieldSource source = config.synthetic_field ? FieldSource(config.synthetic)
                                              : FieldSource(load_grid(config));

  const fs::path dir = config.output_dir;
  bool all_arms_have_success = true;
  for (const std::string& experiment : config.experiments) {
    const SimulationReport report = experiment == "null" ? run_null_experiment(source, sim)
                                                         : run_effect_experiment(source, sim);
    write_json_file(dir / ("simulation_" + experiment + ".json"),
                    simulation_report_to_json(report, ctx.prov));
    write_text_file(dir / ("simulation_" + experiment + "_table.csv"),
                    simulation_report_to_csv(report, ctx.prov));
    for (const auto& arm : report.arms) {
      if (arm.n_ok == 0) all_arms_have_success = false;
      std::cout << experiment << " " << arm.design << " " << arm.model << ": "
                << (report.n_reps > 1
                        ? "rejection_rate=" + format_double(arm.rejection_rate)
                        : "p=" + format_double(arm.replicates.empty() || !arm.replicates[0].ok
                                                   ? 1.0
                                                   : arm.replicates[0].p))
                << " bias=" << format_double(arm.bias) << " failed=" << arm.n_failed << "\n";
    }
  }
  return all_arms_have_success ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geostatistical analysis and design simulation for on-farm experiments"};
  app.set_version_flag("--version", ONFARM_VERSION);
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "JSON run configuration")->required();
    cmd->add_option("--seed", args.seed, "override the config seed")
        ->each([&](const std::string&) { args.seed_set = true; });
    cmd->add_option("--out", args.out_dir, "override the output directory");
    cmd->add_option("--threads", args.threads, "worker threads (0 = config value)");
  };

  CLI::App* preprocess = app.add_subcommand("preprocess", "rotate, align, grid, and trim yield data");
  CLI::App* preview = app.add_subcommand("design-preview", "export treatment masks");
  CLI::App* fit = app.add_subcommand("fit", "fit OLS and spatial mixed models");
  CLI::App* variogram = app.add_subcommand("variogram", "export empirical and fitted variograms");
  CLI::App* simulate = app.add_subcommand("simulate", "run null / effect simulations");
  for (CLI::App* cmd : {preprocess, preview, fit, variogram, simulate}) add_common(cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (preprocess->parsed()) return cmd_preprocess(args);
    if (preview->parsed()) return cmd_design_preview(args);
    if (fit->parsed()) return cmd_fit(args);
    if (variogram->parsed()) return cmd_variogram(args);
    if (simulate->parsed()) return cmd_simulate(args);
  } catch (const Error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "unexpected error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
