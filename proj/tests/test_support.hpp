// Shared test helpers and independent oracles. Everything here deliberately
// avoids the library's factorized code paths: covariances are evaluated by
// direct formula, determinants via eigendecomposition, inverses explicitly.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "onfarm/covariance.hpp"
#include "onfarm/types.hpp"

namespace testsupport {

inline std::vector<onfarm::Location> make_lattice(int nx, int ny, double dx = 1.0,
                                                  double dy = 1.0) {
  std::vector<onfarm::Location> cells;
  cells.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      cells.push_back({(i + 0.5) * dx, (j + 0.5) * dy});
  return cells;
}

// Direct-formula covariance entry, independent of onfarm::build_cov_matrix.
inline double naive_cov_entry(const onfarm::Location& p, const onfarm::Location& q,
                              const onfarm::CovarianceParams& model) {
  const double hx = std::fabs(p.x - q.x);
  const double hy = std::fabs(p.y - q.y);
  if (const auto* iso = std::get_if<onfarm::IsoExpParams>(&model)) {
    const double h = std::sqrt(hx * hx + hy * hy);
    if (h == 0.0) return iso->c0 + iso->c1;
    return iso->c1 * std::exp(-h / iso->a);
  }
  const auto& sm = std::get<onfarm::SumMetricParams>(model);
  if (hx == 0.0 && hy == 0.0) return sm.c0 + sm.cx1 + sm.cy1 + sm.cxy1;
  const double hxy = std::sqrt(hx * hx + sm.alpha * hy * hy);
  return sm.cx1 * std::exp(-hx / sm.ax) + sm.cy1 * std::exp(-hy / sm.ay) +
         sm.cxy1 * std::exp(-hxy / sm.axy);
}

inline Eigen::MatrixXd naive_cov_matrix(std::span<const onfarm::Location> cells,
                                        const onfarm::CovarianceParams& model) {
  const Eigen::Index n = static_cast<Eigen::Index>(cells.size());
  Eigen::MatrixXd v(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) v(i, j) = naive_cov_entry(cells[i], cells[j], model);
  return v;
}

// Naive restricted negative log-likelihood: explicit inverses and an
// eigendecomposition for log|V|. Mirrors the library's diagonal
// conditioning (the jitter is part of the model definition).
inline double naive_reml_negloglik(const onfarm::CovarianceParams& theta,
                                   const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                   std::span<const onfarm::Location> cells) {
  const double n = static_cast<double>(y.size());
  const double p = static_cast<double>(x.cols());

  Eigen::MatrixXd v = naive_cov_matrix(cells, theta);
  v.diagonal().array() += onfarm::conditioning_jitter(theta);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v);
  const double logdet_v = eig.eigenvalues().array().log().sum();

  const Eigen::MatrixXd v_inv = v.inverse();
  const Eigen::MatrixXd xtvx = x.transpose() * v_inv * x;
  const double logdet_xtvx = std::log(xtvx.determinant());
  const Eigen::MatrixXd proj =
      v_inv - v_inv * x * xtvx.inverse() * x.transpose() * v_inv;
  const double quad = y.dot(proj * y);

  const double loglik = -0.5 * ((n - p) * std::log(2.0 * M_PI) + logdet_v + logdet_xtvx + quad);
  return -loglik;
}

// Deterministic uniform helpers for test data.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

}  // namespace testsupport
