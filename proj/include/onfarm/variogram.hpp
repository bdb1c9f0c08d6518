#pragma once

#include <span>
#include <vector>

#include "onfarm/covariance.hpp"
#include "onfarm/types.hpp"

namespace onfarm {

// Directional empirical variogram: semivariance per exact lattice lag.
struct EmpiricalVariogram {
  Axis direction = Axis::X;
  struct Bin {
    double lag = 0.0;          // mean lag, meters
    double semivariance = 0.0; // (t/ha)^2
    std::size_t pairs = 0;
  };
  std::vector<Bin> bins;  // lags strictly increasing
};

// Display rule from the residual-variogram figures: bins with fewer than
// 30 pairs are suppressed.
inline constexpr std::size_t kDefaultMinPairs = 30;

/// Empirical semivariance along one axis from per-cell residuals. Only
/// pairs separated exactly along the chosen axis (zero offset on the other
/// axis) contribute; the lattice makes lags exact, so no angular or lag
/// tolerance is involved beyond a 1e-9 m quantization. Bins beyond max_lag
/// or with fewer than min_pairs pairs are dropped; if nothing remains an
/// EmptyVariogramError is thrown.
EmpiricalVariogram empirical_variogram(std::span<const double> values,
                                       std::span<const Location> cells, Axis direction,
                                       double max_lag,
                                       std::size_t min_pairs = kDefaultMinPairs);

/// Model semivariance along one axis: gamma(h) = c(0,0) - c(h e_axis).
/// Isotropic models give identical curves for both axes.
std::vector<std::pair<double, double>> fitted_curve(const CovarianceParams& model,
                                                    Axis direction,
                                                    std::span<const double> lags);

}  // namespace onfarm
