#include "onfarm/variogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include "onfarm/errors.hpp"

namespace onfarm {

namespace {

// Coordinates arrive as lattice centroids; quantizing differences at 1e-9 m
// groups lags that differ only by floating-point noise.
std::int64_t quantize(double v) { return std::llround(v * 1e9); }

}  // namespace

EmpiricalVariogram empirical_variogram(std::span<const double> values,
                                       std::span<const Location> cells, Axis direction,
                                       double max_lag, std::size_t min_pairs) {
  if (cells.size() < 2) throw DomainError("empirical variogram needs at least 2 cells");
  if (values.size() != cells.size()) throw DomainError("values and cells must align");
  if (!(max_lag > 0.0)) throw DomainError("max_lag must be positive");

  struct Accum {
    double sum_sq_half = 0.0;
    double sum_lag = 0.0;
    std::size_t pairs = 0;
  };
  std::map<std::int64_t, Accum> bins;

  const std::size_t n = cells.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = cells[i].x - cells[j].x;
      const double dy = cells[i].y - cells[j].y;
      const double along = direction == Axis::X ? dx : dy;
      const double across = direction == Axis::X ? dy : dx;
      if (quantize(across) != 0) continue;
      const double lag = std::fabs(along);
      if (quantize(lag) == 0 || lag > max_lag) continue;
      const double diff = values[i] - values[j];
      Accum& acc = bins[quantize(lag)];
      acc.sum_sq_half += 0.5 * diff * diff;
      acc.sum_lag += lag;
      acc.pairs += 1;
    }
  }

  EmpiricalVariogram result;
  result.direction = direction;
  for (const auto& [key, acc] : bins) {
    if (acc.pairs < min_pairs) continue;
    const double count = static_cast<double>(acc.pairs);
    result.bins.push_back({acc.sum_lag / count, acc.sum_sq_half / count, acc.pairs});
  }
  if (result.bins.empty()) {
    throw EmptyVariogramError("no lag bin along " + std::string(axis_name(direction)) +
                              " has at least " + std::to_string(min_pairs) + " pairs");
  }
  return result;
}

std::vector<std::pair<double, double>> fitted_curve(const CovarianceParams& model,
                                                    Axis direction,
                                                    std::span<const double> lags) {
  std::visit([](const auto& p) { p.validate(); }, model);
  const double sill = zero_lag_cov(model);
  std::vector<std::pair<double, double>> curve;
  curve.reserve(lags.size());
  for (const double h : lags) {
    if (!(h > 0.0)) throw DomainError("fitted_curve lags must be positive");
    const Location origin{0.0, 0.0};
    const Location at = direction == Axis::X ? Location{h, 0.0} : Location{0.0, h};
    curve.emplace_back(h, sill - cov_between(origin, at, model));
  }
  return curve;
}

}  // namespace onfarm
