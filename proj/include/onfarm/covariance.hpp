#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "onfarm/types.hpp"

namespace onfarm {

// Isotropic exponential covariance model:
//   c(0) = c0 + c1,   c(h) = c1 * exp(-h / a)  for h > 0.
struct IsoExpParams {
  double c0 = 0.0;  // nugget variance, (t/ha)^2
  double c1 = 1.0;  // partial sill variance, (t/ha)^2
  double a = 1.0;   // distance parameter, m

  void validate() const;
  std::string describe() const;
};

// Anisotropic sum-metric model: two axis-specific exponential components
// plus one joint component on the alpha-rescaled combined lag,
//   c(hx, hy) = cx(hx) + cy(hy) + cxy(sqrt(hx^2 + alpha * hy^2)),
// with a single shared nugget c0 that appears only at zero total lag.
// Eight parameters in all.
struct SumMetricParams {
  double c0 = 0.0;    // shared nugget, (t/ha)^2
  double cx1 = 1.0;   // across-operations sill, (t/ha)^2
  double ax = 1.0;    // across-operations distance parameter, m
  double cy1 = 1.0;   // along-travel sill, (t/ha)^2
  double ay = 1.0;    // along-travel distance parameter, m
  double cxy1 = 1.0;  // joint-component sill, (t/ha)^2
  double axy = 1.0;   // joint-component distance parameter, m
  double alpha = 1.0; // geometric anisotropy ratio applied to hy^2

  double total_sill() const { return cx1 + cy1 + cxy1; }
  void validate() const;
  std::string describe() const;
};

using CovarianceParams = std::variant<IsoExpParams, SumMetricParams>;

enum class ModelKind { kIsotropic, kAnisotropic };

inline const char* model_kind_name(ModelKind k) {
  return k == ModelKind::kIsotropic ? "isotropic" : "anisotropic";
}

/// Covariance at separation h >= 0.
double iso_cov(double h, const IsoExpParams& params);

/// Theoretical semivariance r(h) = c0 + c1 (1 - exp(-h/a)); defined for h > 0
/// only. Satisfies r(h) + iso_cov(h) = c0 + c1 identically.
double iso_variogram(double h, const IsoExpParams& params);

/// Sum-metric covariance at axis lags (hx, hy); symmetric in lag sign.
double summetric_cov(double hx, double hy, const SumMetricParams& params);

/// Covariance at zero lag (the model variance) for either model.
double zero_lag_cov(const CovarianceParams& model);

/// Covariance between two locations under either model. Isotropic models use
/// the Euclidean separation; sum-metric models use axis-aligned |dx|, |dy| in
/// the rotated frame.
double cov_between(const Location& p, const Location& q, const CovarianceParams& model);

/// Assembles the n x n covariance matrix over the given cell centroids, in
/// the order supplied. Entries are exact model covariances; use
/// conditioning_jitter() on the diagonal before factorizing.
Eigen::MatrixXd build_cov_matrix(std::span<const Location> cells,
                                 const CovarianceParams& model);

/// Diagonal conditioning added before Cholesky: 1e-10 * (c0 + total sill).
/// Lattice centroids never coincide, but REML search can visit parameter
/// values that make V numerically singular.
double conditioning_jitter(const CovarianceParams& model);

/// Lag at which the exponential variogram reaches 95% of its sill: 3a.
double effective_range(const IsoExpParams& params);

int parameter_count(ModelKind kind);  // 3 or 8
ModelKind kind_of(const CovarianceParams& model);

}  // namespace onfarm
