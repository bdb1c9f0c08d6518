#include "onfarm/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "onfarm/errors.hpp"
#include "onfarm/nelder_mead.hpp"

namespace onfarm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sample_variance(const Eigen::VectorXd& y) {
  if (y.size() < 2) return 0.0;
  const double mean = y.mean();
  return (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
}

// Log-parameter layout: iso (c0, c1, a); sum-metric (c0, cx1, ax, cy1, ay,
// cxy1, axy, alpha). The nugget is floored so log-space moves cannot take
// it to zero and stall the factorization.
Eigen::VectorXd to_log(const CovarianceParams& params, double c0_floor) {
  if (const auto* iso = std::get_if<IsoExpParams>(&params)) {
    Eigen::VectorXd t(3);
    t << std::log(std::max(iso->c0, c0_floor)), std::log(iso->c1), std::log(iso->a);
    return t;
  }
  const auto& sm = std::get<SumMetricParams>(params);
  Eigen::VectorXd t(8);
  t << std::log(std::max(sm.c0, c0_floor)), std::log(sm.cx1), std::log(sm.ax),
      std::log(sm.cy1), std::log(sm.ay), std::log(sm.cxy1), std::log(sm.axy),
      std::log(sm.alpha);
  return t;
}

CovarianceParams from_log(ModelKind kind, const Eigen::VectorXd& t, double c0_floor) {
  if (kind == ModelKind::kIsotropic) {
    IsoExpParams p;
    p.c0 = std::max(std::exp(t(0)), c0_floor);
    p.c1 = std::exp(t(1));
    p.a = std::exp(t(2));
    return p;
  }
  SumMetricParams p;
  p.c0 = std::max(std::exp(t(0)), c0_floor);
  p.cx1 = std::exp(t(1));
  p.ax = std::exp(t(2));
  p.cy1 = std::exp(t(3));
  p.ay = std::exp(t(4));
  p.cxy1 = std::exp(t(5));
  p.axy = std::exp(t(6));
  p.alpha = std::exp(t(7));
  return p;
}

struct Extents {
  double x = 0.0;
  double y = 0.0;
  double diag = 0.0;
};

Extents cell_extents(std::span<const Location> cells) {
  double min_x = kInf, max_x = -kInf, min_y = kInf, max_y = -kInf;
  for (const auto& c : cells) {
    min_x = std::min(min_x, c.x);
    max_x = std::max(max_x, c.x);
    min_y = std::min(min_y, c.y);
    max_y = std::max(max_y, c.y);
  }
  Extents e;
  e.x = max_x - min_x;
  e.y = max_y - min_y;
  e.diag = std::hypot(e.x, e.y);
  const double fallback = e.diag > 0.0 ? 1e-3 * e.diag : 1.0;
  e.x = std::max(e.x, fallback);
  e.y = std::max(e.y, fallback);
  e.diag = std::max(e.diag, fallback);
  return e;
}

}  // namespace

double reml_negloglik(const CovarianceParams& theta, const Eigen::VectorXd& y,
                      const Eigen::MatrixXd& x, std::span<const Location> cells) {
  const Eigen::Index n = y.size();
  const Eigen::Index p = x.cols();
  if (x.rows() != n || static_cast<Eigen::Index>(cells.size()) != n) {
    throw DomainError("y, X, and cells must agree in length");
  }
  if (n <= p) throw DomainError("need more observations than fixed effects");

  Eigen::MatrixXd v = build_cov_matrix(cells, theta);
  v.diagonal().array() += conditioning_jitter(theta);

  Eigen::LLT<Eigen::MatrixXd> llt(v);
  if (llt.info() != Eigen::Success) {
    throw IllConditionedError(
        "covariance factorization failed at " +
        std::visit([](const auto& m) { return m.describe(); }, theta));
  }

  const auto l = llt.matrixL();
  const double logdet_v = 2.0 * llt.matrixLLT().diagonal().array().log().sum();

  const Eigen::MatrixXd a = l.solve(x);   // L^-1 X
  const Eigen::VectorXd b = l.solve(y);   // L^-1 y
  const Eigen::MatrixXd g = a.transpose() * a;
  Eigen::LLT<Eigen::MatrixXd> llt_g(g);
  if (llt_g.info() != Eigen::Success) {
    throw RankError("X'V^-1 X is singular; is the design matrix full rank?");
  }
  const double logdet_g = 2.0 * llt_g.matrixLLT().diagonal().array().log().sum();

  const Eigen::VectorXd atb = a.transpose() * b;
  const Eigen::VectorXd beta = llt_g.solve(atb);
  const double quad = std::max(0.0, b.squaredNorm() - atb.dot(beta));

  const double np = static_cast<double>(n - p);
  return 0.5 * (np * kLog2Pi + logdet_v + logdet_g + quad);
}

GlsResult gls_beta(const Eigen::MatrixXd& v, const Eigen::MatrixXd& x,
                   const Eigen::VectorXd& y) {
  Eigen::LLT<Eigen::MatrixXd> llt(v);
  if (llt.info() != Eigen::Success) {
    throw IllConditionedError("covariance matrix is not positive definite");
  }
  const auto l = llt.matrixL();
  const Eigen::MatrixXd a = l.solve(x);
  const Eigen::VectorXd b = l.solve(y);
  const Eigen::MatrixXd g = a.transpose() * a;
  Eigen::LLT<Eigen::MatrixXd> llt_g(g);
  if (llt_g.info() != Eigen::Success) {
    throw RankError("X'V^-1 X is singular");
  }
  GlsResult result;
  result.beta = llt_g.solve(a.transpose() * b);
  result.cov_beta = llt_g.solve(Eigen::MatrixXd::Identity(x.cols(), x.cols()));
  return result;
}

OlsFit fit_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw DomainError("y and X must agree in length");
  if (n <= p) throw DomainError("need more observations than fixed effects");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p) throw RankError("design matrix is rank deficient");

  OlsFit fit;
  fit.beta = qr.solve(y);
  const double rss = (y - x * fit.beta).squaredNorm();
  fit.sigma2 = rss / static_cast<double>(n - p);
  const Eigen::MatrixXd xtx_inv =
      (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.se = (fit.sigma2 * xtx_inv.diagonal().array()).sqrt();
  if (p < 2) {
    fit.p_value = std::numeric_limits<double>::quiet_NaN();
  } else if (fit.se(1) > 0.0) {
    fit.p_value = wald_test(fit.beta(1), fit.se(1)).p_two_sided;
  } else {
    // zero residual variance: the z-test limit
    fit.p_value = fit.beta(1) == 0.0 ? 1.0 : 0.0;
  }
  return fit;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

WaldTest wald_test(double beta_j, double se_j) {
  if (!(se_j > 0.0)) throw DomainError("wald_test requires a positive standard error");
  WaldTest t;
  t.z = beta_j / se_j;
  t.p_two_sided = std::erfc(std::fabs(t.z) / std::sqrt(2.0));
  return t;
}

double aic(double restricted_loglik, int k) {
  if (k < 1) throw DomainError("aic needs k >= 1");
  return -2.0 * restricted_loglik + 2.0 * static_cast<double>(k);
}

const RemlFit& select_model(std::span<const RemlFit> fits) {
  if (fits.size() < 2) throw DomainError("select_model compares at least two fits");
  const RemlFit* best = &fits[0];
  for (const auto& fit : fits.subspan(1)) {
    if (fit.aic < best->aic || (fit.aic == best->aic && fit.k < best->k)) {
      best = &fit;
    }
  }
  return *best;
}

std::vector<CovarianceParams> default_starts(ModelKind kind, const Eigen::VectorXd& y,
                                             std::span<const Location> cells, int n_starts) {
  const double s2 = std::max(sample_variance(y), 1e-12);
  const Extents e = cell_extents(cells);
  const double nugget_fracs[] = {0.1, 0.5};
  const double range_fracs[] = {0.1, 0.3, 0.6, 1.0};

  std::vector<CovarianceParams> starts;
  for (const double nf : nugget_fracs) {
    for (const double rf : range_fracs) {
      if (kind == ModelKind::kIsotropic) {
        starts.push_back(IsoExpParams{nf * s2, (1.0 - nf) * s2, rf * e.diag});
      } else {
        SumMetricParams p;
        p.c0 = nf * s2;
        p.cx1 = p.cy1 = p.cxy1 = (1.0 - nf) * s2 / 3.0;
        p.ax = rf * e.x;
        p.ay = rf * e.y;
        p.axy = rf * e.diag;
        p.alpha = 1.0;
        starts.push_back(p);
      }
    }
  }
  n_starts = std::clamp(n_starts, 1, static_cast<int>(starts.size()));
  starts.resize(n_starts);
  return starts;
}

RemlFit fit_reml(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                 std::span<const Location> cells, ModelKind kind,
                 std::span<const CovarianceParams> starts, const FitOptions& options) {
  if (starts.empty()) throw DomainError("fit_reml needs at least one start");
  for (const auto& s : starts) {
    if (kind_of(s) != kind) throw DomainError("start parameter kind does not match model kind");
  }

  const double c0_floor = 1e-8 * std::max(sample_variance(y), 1e-12);
  auto objective = [&](const Eigen::VectorXd& t) -> double {
    try {
      const double value = reml_negloglik(from_log(kind, t, c0_floor), y, x, cells);
      return std::isfinite(value) ? value : kInf;
    } catch (const IllConditionedError&) {
      return kInf;
    } catch (const DomainError&) {
      return kInf;
    }
  };

  NelderMeadOptions nm;
  nm.max_iterations = options.max_iterations;
  nm.diameter_tol = options.diameter_tol;
  nm.initial_step = options.initial_step;

  const int n_starts = static_cast<int>(starts.size());
  std::vector<NelderMeadResult> results(n_starts);
  std::vector<std::string> errors(n_starts);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n_starts; i = next.fetch_add(1)) {
      try {
        results[i] = nelder_mead(objective, to_log(starts[i], c0_floor), nm);
      } catch (const std::exception& ex) {
        results[i].value = kInf;
        errors[i] = ex.what();
      }
      if (!std::isfinite(results[i].value) && errors[i].empty()) {
        errors[i] = "objective non-finite for every visited parameter value";
      }
    }
  };

  const int n_threads = std::max(1, std::min(options.threads, n_starts));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  int best = -1;
  for (int i = 0; i < n_starts; ++i) {
    if (std::isfinite(results[i].value) &&
        (best < 0 || results[i].value < results[best].value)) {
      best = i;
    }
  }
  if (best < 0) {
    std::string detail = "all " + std::to_string(n_starts) + " REML starts failed:";
    for (int i = 0; i < n_starts; ++i) {
      detail += "\n  start " + std::to_string(i) + ": " + errors[i];
    }
    throw FitError(detail);
  }

  RemlFit fit;
  fit.model_kind = kind;
  fit.params = from_log(kind, results[best].x, c0_floor);
  fit.n_starts = n_starts;
  fit.best_start_index = best;
  fit.converged = results[best].converged;
  fit.restricted_loglik = -results[best].value;
  fit.k = parameter_count(kind) + static_cast<int>(x.cols());
  fit.aic = aic(fit.restricted_loglik, fit.k);

  Eigen::MatrixXd v = build_cov_matrix(cells, fit.params);
  v.diagonal().array() += conditioning_jitter(fit.params);
  const GlsResult gls = gls_beta(v, x, y);
  fit.beta = gls.beta;
  fit.se = gls.cov_beta.diagonal().array().sqrt();

  fit.starts.resize(n_starts);
  for (int i = 0; i < n_starts; ++i) {
    fit.starts[i].objective = results[i].value;
    fit.starts[i].iterations = results[i].iterations;
    fit.starts[i].converged = results[i].converged;
    fit.starts[i].error = errors[i];
  }
  return fit;
}

}  // namespace onfarm
