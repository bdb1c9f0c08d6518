// Acceptance suite: one pass/fail line per criterion, exit code equal to
// the number of failures. Each criterion pins its own tolerances; Monte
// Carlo runs use fixed seeds so results are reproducible.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "onfarm/covariance.hpp"
#include "onfarm/design.hpp"
#include "onfarm/errors.hpp"
#include "onfarm/field_data.hpp"
#include "onfarm/inference.hpp"
#include "onfarm/io.hpp"
#include "onfarm/rng.hpp"
#include "onfarm/simulation.hpp"
#include "onfarm/variogram.hpp"
#include "test_support.hpp"

using namespace onfarm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return testsupport::uniform(rng, lo, hi);
}

int worker_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 2 : static_cast<int>(hw);
}

// Runs fn(rep) for rep in [0, n) across the available cores.
void parallel_reps(int n, const std::function<void(int)>& fn) {
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  const int n_threads = std::min(worker_threads(), n);
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
}

DesignLayout strip_layout(double pass_width, const std::string& name = "D1") {
  DesignLayout d;
  d.name = name;
  d.kind = DesignKind::kStrip;
  d.pass_width = pass_width;
  d.n_passes = 2;
  return d;
}

Eigen::VectorXd grid_values(const YieldGrid& grid) {
  const auto values = grid.valid_values();
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

// --- criterion 1 -----------------------------------------------------------

Outcome covariance_identities() {
  std::mt19937_64 rng(101);
  double worst_identity = 0.0;
  for (int i = 0; i < 100; ++i) {
    const IsoExpParams p{uniform(rng, 0.0, 1.0), uniform(rng, 0.05, 2.0), uniform(rng, 0.5, 50.0)};
    const double h = uniform(rng, 1e-3, 100.0);
    const double gap = std::fabs(iso_variogram(h, p) + iso_cov(h, p) - (p.c0 + p.c1));
    worst_identity = std::max(worst_identity, gap);
  }

  double worst_reduction = 0.0;
  for (int i = 0; i < 100; ++i) {
    SumMetricParams sm;
    sm.c0 = uniform(rng, 0.0, 0.5);
    sm.cx1 = 0.0;
    sm.cy1 = 0.0;
    sm.cxy1 = uniform(rng, 0.1, 2.0);
    sm.ax = 1.0;
    sm.ay = 1.0;
    sm.axy = uniform(rng, 0.5, 30.0);
    sm.alpha = 1.0;
    const IsoExpParams iso{sm.c0, sm.cxy1, sm.axy};
    const double hx = uniform(rng, 0.0, 40.0);
    const double hy = uniform(rng, 1e-6, 40.0);
    const double h = std::sqrt(hx * hx + hy * hy);
    const double gap = std::fabs(summetric_cov(hx, hy, sm) - iso_cov(h, iso));
    worst_reduction = std::max(worst_reduction, gap);
  }

  std::ostringstream detail;
  detail << "max identity gap " << worst_identity << " (tol 1e-12), max reduction gap "
         << worst_reduction << " (tol 1e-14)";
  return {worst_identity <= 1e-12 && worst_reduction <= 1e-14, detail.str()};
}

// --- criterion 2 -----------------------------------------------------------

Outcome reml_oracle_equivalence() {
  const auto cells = testsupport::make_lattice(5, 5, 1.0, 1.0);

  auto field_rng = derive_stream(2202, 0, 1);
  const YieldGrid grid =
      simulate_gaussian_field(LatticeSpec{5, 5, 1.0, 1.0}, IsoExpParams{0.1, 0.9, 1.5}, 5.0,
                              field_rng);
  const Eigen::VectorXd y = grid_values(grid);
  const TreatmentMask mask = assign_design(grid, strip_layout(2.0));
  const Eigen::MatrixXd x = build_design_matrix(grid, mask);

  const double c0s[] = {0.02, 0.1, 0.5, 1.0};
  const double c1s[] = {0.1, 0.45, 0.9, 1.8};
  const double as[] = {0.5, 1.5, 3.0, 6.0};

  double worst = 0.0;
  double grid_min = std::numeric_limits<double>::infinity();
  for (const double c0 : c0s) {
    for (const double c1 : c1s) {
      for (const double a : as) {
        const IsoExpParams p{c0, c1, a};
        const double fast = reml_negloglik(p, y, x, cells);
        const double naive = testsupport::naive_reml_negloglik(p, y, x, cells);
        worst = std::max(worst, std::fabs(fast - naive));
        grid_min = std::min(grid_min, fast);
      }
    }
  }

  const auto starts = default_starts(ModelKind::kIsotropic, y, cells, 8);
  FitOptions opts;
  opts.threads = worker_threads();
  const RemlFit fit = fit_reml(y, x, cells, ModelKind::kIsotropic, starts, opts);
  const double best = -fit.restricted_loglik;

  std::ostringstream detail;
  detail << "max |fast - naive| = " << worst << " (tol 1e-8); optimizer " << best
         << " vs grid min " << grid_min;
  return {worst <= 1e-8 && best <= grid_min + 1e-3, detail.str()};
}

// --- criterion 3 -----------------------------------------------------------

Outcome gls_ols_reduction() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const int n = 60;
    Eigen::MatrixXd x(n, 2);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      x(i, 1) = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : 1.0;
    }
    x(0, 1) = 0.0;  // guarantee both labels
    x(1, 1) = 1.0;
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = uniform(rng, -5.0, 5.0);

    const OlsFit ols = fit_ols(y, x);
    for (const double s2 : {0.5, 1.0, 4.0}) {
      const GlsResult gls = gls_beta(s2 * Eigen::MatrixXd::Identity(n, n), x, y);
      worst = std::max(worst, (gls.beta - ols.beta).norm() / ols.beta.norm());
    }
  }
  std::ostringstream detail;
  detail << "max relative coefficient gap " << worst << " (tol 1e-10)";
  return {worst <= 1e-10, detail.str()};
}

// --- criterion 4 -----------------------------------------------------------

Outcome parameter_recovery() {
  const int n_reps = 20;
  const LatticeSpec lattice{20, 20, 1.0, 1.0};
  const IsoExpParams truth{0.1, 0.9, 5.0};

  std::vector<double> sills(n_reps), ranges(n_reps);
  parallel_reps(n_reps, [&](int rep) {
    auto rng = derive_stream(404, rep, 1);
    const YieldGrid grid = simulate_gaussian_field(lattice, truth, 5.0, rng);
    const Eigen::VectorXd y = grid_values(grid);
    const auto cells = grid.valid_centroids();
    const TreatmentMask mask = assign_design(grid, strip_layout(5.0));
    const Eigen::MatrixXd x = build_design_matrix(grid, mask);

    const auto starts = default_starts(ModelKind::kIsotropic, y, cells, 8);
    const RemlFit fit = fit_reml(y, x, cells, ModelKind::kIsotropic, starts);
    const auto& p = std::get<IsoExpParams>(fit.params);
    sills[rep] = p.c1;
    ranges[rep] = effective_range(p);
  });

  std::sort(sills.begin(), sills.end());
  std::sort(ranges.begin(), ranges.end());
  const double median_sill = 0.5 * (sills[9] + sills[10]);
  const double median_range = 0.5 * (ranges[9] + ranges[10]);

  const bool sill_ok = median_sill >= 0.9 * 0.7 && median_sill <= 0.9 * 1.3;
  const bool range_ok = median_range >= 15.0 * 0.5 && median_range <= 15.0 * 1.5;
  std::ostringstream detail;
  detail << "median sill " << median_sill << " (target 0.9 +/- 30%), median effective range "
         << median_range << " (target 15 +/- 50%)";
  return {sill_ok && range_ok, detail.str()};
}

// --- criterion 5 -----------------------------------------------------------

Outcome type_one_error_direction() {
  SimulationConfig config;
  config.n_reps = 200;
  config.seed = 505;
  config.alpha_level = 0.05;
  config.designs = {strip_layout(3.0)};
  config.models = {ModelChoice::kOls, ModelChoice::kIsotropic};
  config.threads = worker_threads();

  SyntheticFieldSpec spec;
  spec.lattice = {12, 12, 1.0, 1.0};
  spec.model = IsoExpParams{0.05, 0.95, 3.0};  // strong autocorrelation
  spec.mean = 5.0;

  const SimulationReport report = run_null_experiment(FieldSource{spec}, config);
  double ols_rate = -1.0, iso_rate = -1.0;
  int failed = 0;
  for (const auto& arm : report.arms) {
    if (arm.model == "ols") ols_rate = arm.rejection_rate;
    if (arm.model == "isotropic") iso_rate = arm.rejection_rate;
    failed += arm.n_failed;
  }

  std::ostringstream detail;
  detail << "OLS rejection rate " << ols_rate << " (> 0.15), isotropic " << iso_rate
         << " (in [0.01, 0.12]), failed fits " << failed;
  return {ols_rate > 0.15 && iso_rate >= 0.01 && iso_rate <= 0.12 && failed == 0, detail.str()};
}

// --- criterion 6 -----------------------------------------------------------

Outcome effect_estimation_pipeline() {
  SimulationConfig config;
  config.n_reps = 200;
  config.seed = 606;
  config.effect_mean = 0.3;
  config.effect_sd = 0.1;
  config.designs = {strip_layout(4.0)};
  config.models = {ModelChoice::kOls};
  config.threads = worker_threads();

  SyntheticFieldSpec spec;
  spec.lattice = {16, 16, 1.0, 1.0};
  spec.model = IsoExpParams{0.04, 1e-6, 1.0};  // independent noise, sd 0.2
  spec.mean = 5.0;

  const SimulationReport report = run_effect_experiment(FieldSource{spec}, config);
  const ArmReport& arm = report.arms.at(0);

  std::ostringstream detail;
  detail << "OLS bias " << arm.bias << " (|bias| <= 0.02), CI coverage of 0.3 "
         << arm.ci_covers_truth_rate << " (in [0.90, 0.99])";
  const bool ok = std::fabs(arm.bias) <= 0.02 && arm.ci_covers_truth_rate >= 0.90 &&
                  arm.ci_covers_truth_rate <= 0.99 && arm.n_failed == 0;
  return {ok, detail.str()};
}

// --- criteria 7 and 8 ------------------------------------------------------

struct SelectionResult {
  Outcome selection;  // criterion 7
  Outcome ci_width;   // criterion 8
};

SelectionResult model_selection_and_ci() {
  const int n_reps = 20;
  const LatticeSpec lattice{12, 12, 1.0, 1.0};
  const DesignLayout d1 = strip_layout(3.0);

  SumMetricParams aniso_truth;
  aniso_truth.c0 = 0.05;
  aniso_truth.cx1 = 0.1;
  aniso_truth.ax = 1.0;
  aniso_truth.cy1 = 0.55;  // cy1/cx1 = 5.5
  aniso_truth.ay = 6.0;
  aniso_truth.cxy1 = 0.05;
  aniso_truth.axy = 2.0;
  aniso_truth.alpha = 1.0;
  const IsoExpParams iso_truth{0.1, 0.9, 3.0};

  struct RepOutcome {
    bool aniso_selected = false;
    double iso_width = 0.0;
    double aniso_width = 0.0;
    bool ok = false;
  };

  auto run_arm = [&](const CovarianceParams& generator, std::uint64_t seed,
                     std::vector<RepOutcome>& out) {
    out.assign(n_reps, {});
    parallel_reps(n_reps, [&](int rep) {
      try {
        auto rng = derive_stream(seed, rep, 1);
        const YieldGrid grid = simulate_gaussian_field(lattice, generator, 5.0, rng);
        const Eigen::VectorXd y = grid_values(grid);
        const auto cells = grid.valid_centroids();
        const TreatmentMask mask = assign_design(grid, d1);
        const Eigen::MatrixXd x = build_design_matrix(grid, mask);

        const auto iso_starts = default_starts(ModelKind::kIsotropic, y, cells, 8);
        const auto aniso_starts = default_starts(ModelKind::kAnisotropic, y, cells, 8);
        std::vector<RemlFit> fits;
        fits.push_back(fit_reml(y, x, cells, ModelKind::kIsotropic, iso_starts));
        fits.push_back(fit_reml(y, x, cells, ModelKind::kAnisotropic, aniso_starts));

        RepOutcome r;
        r.aniso_selected = select_model(fits).model_kind == ModelKind::kAnisotropic;
        r.iso_width = 2.0 * kNormalQ975 * fits[0].se(1);
        r.aniso_width = 2.0 * kNormalQ975 * fits[1].se(1);
        r.ok = true;
        out[rep] = r;
      } catch (const Error&) {
        out[rep].ok = false;
      }
    });
  };

  std::vector<RepOutcome> aniso_arm, iso_arm;
  run_arm(aniso_truth, 707, aniso_arm);
  run_arm(iso_truth, 708, iso_arm);

  int aniso_hits = 0, iso_hits = 0, ok_aniso = 0, ok_iso = 0;
  double mean_iso_width = 0.0, mean_aniso_width = 0.0;
  for (const auto& r : aniso_arm) {
    if (!r.ok) continue;
    ++ok_aniso;
    aniso_hits += r.aniso_selected;
    mean_iso_width += r.iso_width;
    mean_aniso_width += r.aniso_width;
  }
  for (const auto& r : iso_arm) {
    if (!r.ok) continue;
    ++ok_iso;
    iso_hits += !r.aniso_selected;
  }
  mean_iso_width /= std::max(1, ok_aniso);
  mean_aniso_width /= std::max(1, ok_aniso);

  const double aniso_frac = static_cast<double>(aniso_hits) / std::max(1, ok_aniso);
  const double iso_frac = static_cast<double>(iso_hits) / std::max(1, ok_iso);

  SelectionResult result;
  {
    std::ostringstream detail;
    detail << "anisotropic data: aniso selected " << aniso_hits << "/" << ok_aniso
           << "; isotropic data: iso selected " << iso_hits << "/" << ok_iso
           << " (both >= 70%)";
    result.selection = {aniso_frac >= 0.7 && iso_frac >= 0.7 && ok_aniso == n_reps &&
                            ok_iso == n_reps,
                        detail.str()};
  }
  {
    std::ostringstream detail;
    detail << "mean CI width under D1, anisotropic data: aniso " << mean_aniso_width << " vs iso "
           << mean_iso_width;
    result.ci_width = {mean_aniso_width >= mean_iso_width, detail.str()};
  }
  return result;
}

// --- criterion 9 -----------------------------------------------------------

Outcome preprocessing_suite() {
  // synthetic yield-monitor cloud: 50 rows at 2 m pitch, 200 points each
  const double heading = 0.35;
  std::mt19937_64 rng(909);
  std::vector<YieldPoint> aligned_truth;
  for (int row = 0; row < 50; ++row) {
    for (int k = 0; k < 200; ++k) {
      const double x = 1.0 + row * 2.0 + uniform(rng, -0.4, 0.4);
      const double y = uniform(rng, 0.0, 250.0);
      const double v =
          4.0 + std::sin(x / 15.0) + std::cos(y / 40.0) + uniform(rng, -0.5, 0.5);
      aligned_truth.push_back({x, y, v});
    }
  }
  // express the cloud in a rotated raw frame; the pipeline must undo it
  const std::vector<YieldPoint> raw = rotate_coordinates(aligned_truth, -heading);

  auto pipeline = [&](const std::vector<YieldPoint>& input) {
    const auto rotated = rotate_coordinates(input, heading);
    const auto rows = align_rows(rotated, 2.0);
    const YieldGrid grid = aggregate_to_grid(rows, 2.0, 2.5);
    FieldGeometry geom;
    geom.width_x = grid.nx * grid.dx;
    geom.length_y = grid.ny * grid.dy;
    geom.side_margin = 4.0;
    geom.headland_margin = 6.0;
    return std::pair{grid, trim_edges(grid, geom)};
  };

  const auto [pre_trim, grid] = pipeline(raw);

  // rotation isometry on sampled pairs
  const auto rotated = rotate_coordinates(raw, heading);
  double worst_dist = 0.0;
  std::mt19937_64 pair_rng(910);
  for (int s = 0; s < 2000; ++s) {
    const std::size_t i = pair_rng() % raw.size();
    const std::size_t j = pair_rng() % raw.size();
    const double before = std::hypot(raw[i].x - raw[j].x, raw[i].y - raw[j].y);
    const double after =
        std::hypot(rotated[i].x - rotated[j].x, rotated[i].y - rotated[j].y);
    worst_dist = std::max(worst_dist, std::fabs(before - after));
  }

  // mass conservation over the aggregation
  const auto rows = align_rows(rotated, 2.0);
  double point_total = 0.0;
  for (const auto& p : rows) point_total += p.value;
  double grid_total = 0.0;
  for (std::size_t k = 0; k < pre_trim.cell_count(); ++k) {
    if (pre_trim.mask[k]) grid_total += pre_trim.values[k] * pre_trim.counts[k];
  }
  const double mass_gap = std::fabs(grid_total - point_total) / std::fabs(point_total);

  // idempotence
  const auto rows_twice = align_rows(rows, 2.0);
  bool align_idempotent = rows.size() == rows_twice.size();
  for (std::size_t k = 0; align_idempotent && k < rows.size(); ++k) {
    align_idempotent = rows[k].x == rows_twice[k].x;
  }
  FieldGeometry geom;
  geom.width_x = pre_trim.nx * pre_trim.dx;
  geom.length_y = pre_trim.ny * pre_trim.dy;
  geom.side_margin = 4.0;
  geom.headland_margin = 6.0;
  const YieldGrid trimmed_twice = trim_edges(grid, geom);
  const bool trim_idempotent = trimmed_twice.mask == grid.mask &&
                               trimmed_twice.valid_values() == grid.valid_values() &&
                               trimmed_twice.counts == grid.counts;

  // byte-identical rerun of the full pipeline
  Provenance prov;
  prov.version = "acceptance";
  prov.config_hash = "0";
  prov.seed = 909;
  std::ostringstream bytes_a, bytes_b;
  write_grid_csv(bytes_a, grid, prov);
  const auto [pre_trim_b, grid_b] = pipeline(raw);
  write_grid_csv(bytes_b, grid_b, prov);
  const bool bytes_identical = bytes_a.str() == bytes_b.str();

  std::ostringstream detail;
  detail << "isometry gap " << worst_dist << " (tol 1e-10), mass gap " << mass_gap
         << " rel (tol 1e-9), align idempotent " << (align_idempotent ? "yes" : "no")
         << ", trim idempotent " << (trim_idempotent ? "yes" : "no") << ", rerun bytes "
         << (bytes_identical ? "identical" : "DIFFER");
  const bool ok = worst_dist <= 1e-10 && mass_gap <= 1e-9 && align_idempotent &&
                  trim_idempotent && bytes_identical;
  return {ok, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };

  SelectionResult selection;  // criteria 7 and 8 share one computation
  bool selection_done = false;
  auto ensure_selection = [&] {
    if (!selection_done) {
      selection = model_selection_and_ci();
      selection_done = true;
    }
  };

  const std::vector<Entry> entries = {
      {1, "covariance identities", covariance_identities},
      {2, "REML oracle equivalence", reml_oracle_equivalence},
      {3, "GLS-OLS reduction", gls_ols_reduction},
      {4, "parameter recovery", parameter_recovery},
      {5, "type I error behavior", type_one_error_direction},
      {6, "effect-estimation pipeline", effect_estimation_pipeline},
      {7, "model selection",
       [&] {
         ensure_selection();
         return selection.selection;
       }},
      {8, "anisotropic CI behavior",
       [&] {
         ensure_selection();
         return selection.ci_width;
       }},
      {9, "preprocessing determinism and mass conservation", preprocessing_suite},
  };

  int failures = 0;
  for (const auto& entry : entries) {
    if (!only.empty() && !only.count(entry.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = entry.run();
    } catch (const std::exception& ex) {
      outcome = {false, std::string("exception: ") + ex.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d [%s]: %s (%.1fs) - %s\n", entry.id, entry.name,
                outcome.pass ? "PASS" : "FAIL", seconds, outcome.detail.c_str());
    std::fflush(stdout);
    failures += !outcome.pass;
  }
  return failures;
}
