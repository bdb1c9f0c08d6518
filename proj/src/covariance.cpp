#include "onfarm/covariance.hpp"

#include <cmath>
#include <cstdio>

#include "onfarm/errors.hpp"

namespace onfarm {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }
bool finite_pos(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void IsoExpParams::validate() const {
  if (!finite_nonneg(c0) || !finite_pos(c1) || !finite_pos(a)) {
    throw DomainError("isotropic parameters require c0 >= 0, c1 > 0, a > 0; got " + describe());
  }
}

std::string IsoExpParams::describe() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "iso(c0=%g, c1=%g, a=%g)", c0, c1, a);
  return buf;
}

void SumMetricParams::validate() const {
  const bool sills_ok =
      finite_nonneg(cx1) && finite_nonneg(cy1) && finite_nonneg(cxy1) && total_sill() > 0.0;
  if (!finite_nonneg(c0) || !sills_ok || !finite_pos(ax) || !finite_pos(ay) ||
      !finite_pos(axy) || !finite_pos(alpha)) {
    throw DomainError(
        "sum-metric parameters require c0 >= 0, nonnegative sills with a positive total, "
        "positive ranges and alpha; got " +
        describe());
  }
}

std::string SumMetricParams::describe() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "summetric(c0=%g, cx1=%g, ax=%g, cy1=%g, ay=%g, cxy1=%g, axy=%g, alpha=%g)",
                c0, cx1, ax, cy1, ay, cxy1, axy, alpha);
  return buf;
}

double iso_cov(double h, const IsoExpParams& params) {
  if (!(h >= 0.0)) throw DomainError("iso_cov requires h >= 0");
  if (h == 0.0) return params.c0 + params.c1;
  return params.c1 * std::exp(-h / params.a);
}

double iso_variogram(double h, const IsoExpParams& params) {
  if (!(h > 0.0)) throw DomainError("variogram is defined for positive lags only");
  return params.c0 + params.c1 * (1.0 - std::exp(-h / params.a));
}

double summetric_cov(double hx, double hy, const SumMetricParams& params) {
  hx = std::fabs(hx);
  hy = std::fabs(hy);
  if (!(hx >= 0.0) || !(hy >= 0.0)) throw DomainError("summetric_cov requires finite lags");
  if (hx == 0.0 && hy == 0.0) return params.c0 + params.total_sill();
  const double hxy = std::sqrt(hx * hx + params.alpha * hy * hy);
  return params.cx1 * std::exp(-hx / params.ax) + params.cy1 * std::exp(-hy / params.ay) +
         params.cxy1 * std::exp(-hxy / params.axy);
}

double zero_lag_cov(const CovarianceParams& model) {
  if (const auto* iso = std::get_if<IsoExpParams>(&model)) return iso->c0 + iso->c1;
  const auto& sm = std::get<SumMetricParams>(model);
  return sm.c0 + sm.total_sill();
}

double cov_between(const Location& p, const Location& q, const CovarianceParams& model) {
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  if (const auto* iso = std::get_if<IsoExpParams>(&model)) {
    return iso_cov(std::sqrt(dx * dx + dy * dy), *iso);
  }
  return summetric_cov(dx, dy, std::get<SumMetricParams>(model));
}

Eigen::MatrixXd build_cov_matrix(std::span<const Location> cells, const CovarianceParams& model) {
  if (cells.size() < 2) throw DomainError("covariance matrix needs at least 2 cells");
  std::visit([](const auto& p) { p.validate(); }, model);

  const Eigen::Index n = static_cast<Eigen::Index>(cells.size());
  Eigen::MatrixXd v(n, n);
  const double diag = zero_lag_cov(model);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i, i) = diag;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double c = cov_between(cells[static_cast<std::size_t>(i)],
                                   cells[static_cast<std::size_t>(j)], model);
      v(i, j) = c;
      v(j, i) = c;
    }
  }
  return v;
}

double conditioning_jitter(const CovarianceParams& model) {
  return 1e-10 * zero_lag_cov(model);
}

double effective_range(const IsoExpParams& params) {
  params.validate();
  return 3.0 * params.a;
}

int parameter_count(ModelKind kind) { return kind == ModelKind::kIsotropic ? 3 : 8; }

ModelKind kind_of(const CovarianceParams& model) {
  return std::holds_alternative<IsoExpParams>(model) ? ModelKind::kIsotropic
                                                     : ModelKind::kAnisotropic;
}

}  // namespace onfarm
