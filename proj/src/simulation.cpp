#include "onfarm/simulation.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "onfarm/errors.hpp"
#include "onfarm/inference.hpp"
#include "onfarm/rng.hpp"

namespace onfarm {

namespace {

constexpr std::size_t kMaxDenseCells = 2500;

// Stream purposes keep field draws and effect draws independent.
constexpr std::uint64_t kPurposeField = 1;
constexpr std::uint64_t kPurposeEffect = 1000;

struct RepResult {
  std::vector<ReplicateOutcome> outcomes;  // one per arm
  double realized_effect_sum = 0.0;
  std::size_t realized_effect_count = 0;
};

YieldGrid draw_field(const FieldSource& source, std::uint64_t seed, int rep) {
  if (const auto* fixed = std::get_if<YieldGrid>(&source)) return *fixed;
  const auto& spec = std::get<SyntheticFieldSpec>(source);
  auto rng = derive_stream(seed, static_cast<std::uint64_t>(rep), kPurposeField);
  return simulate_gaussian_field(spec.lattice, spec.model, spec.mean, rng);
}

ReplicateOutcome fit_arm(const YieldGrid& grid, const Eigen::MatrixXd& x, ModelChoice model,
                         const SimulationConfig& config, int rep) {
  ReplicateOutcome out;
  out.rep = rep;
  try {
    const auto values = grid.valid_values();
    const Eigen::VectorXd y =
        Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));

    double beta = 0.0, se = 0.0;
    if (model == ModelChoice::kOls) {
      const OlsFit ols = fit_ols(y, x);
      beta = ols.beta(1);
      se = ols.se(1);
    } else {
      const ModelKind kind =
          model == ModelChoice::kIsotropic ? ModelKind::kIsotropic : ModelKind::kAnisotropic;
      const auto cells = grid.valid_centroids();
      const auto starts = default_starts(kind, y, cells, config.n_starts);
      FitOptions opts;
      opts.max_iterations = config.fit_max_iterations;
      const RemlFit fit = fit_reml(y, x, cells, kind, starts, opts);
      beta = fit.beta(1);
      se = fit.se(1);
    }

    out.beta = beta;
    out.se = se;
    // se can be exactly zero on degenerate (noiseless) data; use the z limit
    out.p = se > 0.0 ? wald_test(beta, se).p_two_sided : (beta == 0.0 ? 1.0 : 0.0);
    out.ci_low = beta - kNormalQ975 * se;
    out.ci_high = beta + kNormalQ975 * se;
    out.ok = true;
  } catch (const Error& ex) {
    out.error = ex.what();
  }
  return out;
}

SimulationReport run_experiment(const FieldSource& source, const SimulationConfig& config,
                                bool inject_effect) {
  config.validate();

  SimulationReport report;
  report.experiment = inject_effect ? "effect" : "null";
  report.effect_mean = inject_effect ? config.effect_mean : 0.0;
  report.effect_sd = inject_effect ? config.effect_sd : 0.0;
  report.n_reps = config.n_reps;
  report.seed = config.seed;
  report.alpha_level = config.alpha_level;

  const std::size_t n_arms = config.designs.size() * config.models.size();
  std::vector<RepResult> per_rep(config.n_reps);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int rep = next.fetch_add(1); rep < config.n_reps; rep = next.fetch_add(1)) {
      RepResult& slot = per_rep[rep];
      slot.outcomes.reserve(n_arms);
      const YieldGrid base = draw_field(source, config.seed, rep);
      for (std::size_t d = 0; d < config.designs.size(); ++d) {
        YieldGrid grid = base;
        Eigen::MatrixXd x;
        std::string arm_error;
        try {
          const TreatmentMask mask = assign_design(base, config.designs[d]);
          if (inject_effect) {
            auto rng = derive_stream(config.seed, static_cast<std::uint64_t>(rep),
                                     kPurposeEffect + d);
            grid = inject_treatment(base, mask, config.effect_mean, config.effect_sd, rng);
            for (std::size_t k = 0; k < grid.values.size(); ++k) {
              if (mask.labels[k] && grid.mask[k]) {
                slot.realized_effect_sum += grid.values[k] - base.values[k];
                slot.realized_effect_count += 1;
              }
            }
          }
          x = build_design_matrix(grid, mask);
        } catch (const Error& ex) {
          arm_error = ex.what();
        }
        for (const ModelChoice model : config.models) {
          if (!arm_error.empty()) {
            ReplicateOutcome out;
            out.rep = rep;
            out.error = arm_error;
            slot.outcomes.push_back(out);
          } else {
            slot.outcomes.push_back(fit_arm(grid, x, model, config, rep));
          }
        }
      }
    }
  };

  const int n_threads = std::max(1, std::min(config.threads, config.n_reps));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Deterministic reduction: arms in (design, model) order, replicates by index.
  const double truth = report.effect_mean;
  std::size_t arm_index = 0;
  for (const auto& design : config.designs) {
    for (const ModelChoice model : config.models) {
      ArmReport arm;
      arm.design = design.name;
      arm.model = model_choice_name(model);
      double sum_beta = 0.0, sum_width = 0.0;
      int n_reject = 0, n_zero = 0, n_truth = 0;
      for (int rep = 0; rep < config.n_reps; ++rep) {
        const ReplicateOutcome& out = per_rep[rep].outcomes[arm_index];
        arm.replicates.push_back(out);
        if (!out.ok) {
          ++arm.n_failed;
          continue;
        }
        ++arm.n_ok;
        sum_beta += out.beta;
        sum_width += out.ci_high - out.ci_low;
        n_reject += out.p < config.alpha_level;
        n_zero += out.ci_low <= 0.0 && 0.0 <= out.ci_high;
        n_truth += out.ci_low <= truth && truth <= out.ci_high;
      }
      if (arm.n_ok > 0) {
        arm.rejection_rate = static_cast<double>(n_reject) / arm.n_ok;
        arm.mean_beta = sum_beta / arm.n_ok;
        arm.bias = arm.mean_beta - truth;
        arm.mean_ci_width = sum_width / arm.n_ok;
        arm.ci_covers_zero_rate = static_cast<double>(n_zero) / arm.n_ok;
        arm.ci_covers_truth_rate = static_cast<double>(n_truth) / arm.n_ok;
      }
      report.arms.push_back(std::move(arm));
      ++arm_index;
    }
  }

  if (inject_effect) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& rep : per_rep) {
      sum += rep.realized_effect_sum;
      count += rep.realized_effect_count;
    }
    report.mean_realized_effect = count > 0 ? sum / static_cast<double>(count) : 0.0;
  }
  return report;
}

}  // namespace

const char* model_choice_name(ModelChoice m) {
  switch (m) {
    case ModelChoice::kOls: return "ols";
    case ModelChoice::kIsotropic: return "isotropic";
    case ModelChoice::kAnisotropic: return "anisotropic";
  }
  return "?";
}

ModelChoice model_choice_from_name(const std::string& name) {
  if (name == "ols") return ModelChoice::kOls;
  if (name == "isotropic") return ModelChoice::kIsotropic;
  if (name == "anisotropic") return ModelChoice::kAnisotropic;
  throw ConfigError("unknown model: " + name);
}

void SimulationConfig::validate() const {
  if (!(effect_sd >= 0.0)) throw ConfigError("effect_sd must be nonnegative");
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw ConfigError("alpha_level must be in (0, 1)");
  if (n_reps < 1) throw ConfigError("n_reps must be at least 1");
  if (designs.empty()) throw ConfigError("at least one design is required");
  if (models.empty()) throw ConfigError("at least one model is required");
}

YieldGrid inject_treatment(const YieldGrid& grid, const TreatmentMask& mask,
                           double effect_mean, double effect_sd, std::mt19937_64& rng) {
  if (mask.nx != grid.nx || mask.ny != grid.ny) {
    throw DesignError("mask is not aligned to the grid");
  }
  YieldGrid out = grid;
  GaussianSampler gauss(rng);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t k = grid.index(i, j);
      if (grid.mask[k] && mask.labels[k]) {
        out.values[k] += gauss(effect_mean, effect_sd);
      }
    }
  }
  return out;
}

YieldGrid simulate_gaussian_field(const LatticeSpec& lattice, const CovarianceParams& model,
                                  double mean, std::mt19937_64& rng) {
  if (lattice.nx < 1 || lattice.ny < 1) throw DomainError("lattice must be at least 1x1");
  if (!(lattice.dx > 0.0) || !(lattice.dy > 0.0)) throw DomainError("lattice spacing must be positive");
  const std::size_t n = static_cast<std::size_t>(lattice.nx) * static_cast<std::size_t>(lattice.ny);
  if (n > kMaxDenseCells) {
    throw DomainError("lattice has " + std::to_string(n) + " cells; dense simulation caps at " +
                      std::to_string(kMaxDenseCells));
  }

  YieldGrid grid;
  grid.origin_x = lattice.origin_x;
  grid.origin_y = lattice.origin_y;
  grid.dx = lattice.dx;
  grid.dy = lattice.dy;
  grid.nx = lattice.nx;
  grid.ny = lattice.ny;
  grid.values.assign(n, 0.0);
  grid.mask.assign(n, 1);
  grid.counts.assign(n, 1);

  const auto cells = grid.valid_centroids();
  Eigen::MatrixXd v = build_cov_matrix(cells, model);
  v.diagonal().array() += conditioning_jitter(model);
  Eigen::LLT<Eigen::MatrixXd> llt(v);
  if (llt.info() != Eigen::Success) {
    throw IllConditionedError("field covariance is not positive definite");
  }

  GaussianSampler gauss(rng);
  Eigen::VectorXd z(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = gauss();
  const Eigen::VectorXd values = llt.matrixL() * z;
  for (std::size_t k = 0; k < n; ++k) grid.values[k] = values(static_cast<Eigen::Index>(k)) + mean;
  return grid;
}

SimulationReport run_null_experiment(const FieldSource& source, const SimulationConfig& config) {
  return run_experiment(source, config, false);
}

SimulationReport run_effect_experiment(const FieldSource& source, const SimulationConfig& config) {
  return run_experiment(source, config, true);
}

}  // namespace onfarm
