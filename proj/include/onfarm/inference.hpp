#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "onfarm/covariance.hpp"
#include "onfarm/types.hpp"

namespace onfarm {

// Result of a spatial linear mixed model fitted by REML.
struct RemlFit {
  ModelKind model_kind = ModelKind::kIsotropic;
  CovarianceParams params;
  Eigen::VectorXd beta;  // fixed effects, t/ha
  Eigen::VectorXd se;    // standard errors, t/ha
  double restricted_loglik = 0.0;
  double aic = 0.0;
  int k = 0;  // parameters counted in AIC: covariance parameters + p
  int n_starts = 0;
  bool converged = false;
  int best_start_index = -1;

  struct StartDiagnostics {
    double objective = 0.0;  // best negative restricted log-likelihood
    int iterations = 0;
    bool converged = false;
    std::string error;  // nonempty when the start failed outright
  };
  std::vector<StartDiagnostics> starts;
};

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  double sigma2 = 0.0;   // residual variance, RSS / (n - p)
  double p_value = 1.0;  // two-sided treatment p-value (z-based)
};

struct GlsResult {
  Eigen::VectorXd beta;
  Eigen::MatrixXd cov_beta;  // (X' V^-1 X)^-1
};

/// Negative restricted log-likelihood of theta given (y, X, cells):
///   -l_R = (n-p)/2 log 2pi + 1/2 log|V| + 1/2 log|X'V^-1 X| + 1/2 y'Py
/// with P = V^-1 - V^-1 X (X'V^-1 X)^-1 X'V^-1, evaluated through one
/// Cholesky factorization of V and triangular solves, never an explicit
/// inverse. Throws IllConditionedError (naming theta) if V cannot be
/// factorized after conditioning.
double reml_negloglik(const CovarianceParams& theta, const Eigen::VectorXd& y,
                      const Eigen::MatrixXd& x, std::span<const Location> cells);

/// GLS fixed effects: beta = (X'V^-1 X)^-1 X'V^-1 y with cov(beta) the
/// inverted normal-equation block.
GlsResult gls_beta(const Eigen::MatrixXd& v, const Eigen::MatrixXd& x,
                   const Eigen::VectorXd& y);

OlsFit fit_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x);

struct WaldTest {
  double z = 0.0;
  double p_two_sided = 1.0;
};

WaldTest wald_test(double beta_j, double se_j);

/// Akaike information criterion, -2 l_R + 2 k.
double aic(double restricted_loglik, int k);

/// Minimum-AIC fit; ties go to the model with fewer parameters.
const RemlFit& select_model(std::span<const RemlFit> fits);

struct FitOptions {
  int max_iterations = 500;
  double diameter_tol = 1e-6;
  double initial_step = 0.5;
  int threads = 1;  // concurrent starts
};

/// REML fit by multi-start Nelder-Mead over log-transformed parameters.
/// Starts that fail (non-finite objective everywhere) are recorded in the
/// diagnostics; if every start fails a FitError lists them.
RemlFit fit_reml(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                 std::span<const Location> cells, ModelKind kind,
                 std::span<const CovarianceParams> starts, const FitOptions& options = {});

/// Default multi-start grid: nugget fraction {0.1, 0.5} of the sample
/// variance crossed with distance parameter {0.1, 0.3, 0.6, 1.0} of the
/// field extent (per-axis extents for the sum-metric components).
std::vector<CovarianceParams> default_starts(ModelKind kind, const Eigen::VectorXd& y,
                                             std::span<const Location> cells,
                                             int n_starts = 8);

/// Standard normal CDF.
double normal_cdf(double z);

}  // namespace onfarm
