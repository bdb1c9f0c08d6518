#include "onfarm/design.hpp"

#include <cmath>
#include <limits>

#include "onfarm/errors.hpp"

namespace onfarm {

namespace {

constexpr double kBinEps = 1e-9;

int band_index(double coord, double anchor, double width) {
  return static_cast<int>(std::floor((coord - anchor) / width + kBinEps));
}

bool uses_passes(DesignKind k) {
  return k == DesignKind::kStrip || k == DesignKind::kStripSplit;
}

bool uses_splits(DesignKind k) {
  return k == DesignKind::kSplitPlot || k == DesignKind::kStripSplit ||
         k == DesignKind::kSystematic;
}

}  // namespace

const char* design_kind_name(DesignKind k) {
  switch (k) {
    case DesignKind::kStrip: return "strip";
    case DesignKind::kSplitPlot: return "split_plot";
    case DesignKind::kStripSplit: return "strip_split";
    case DesignKind::kSystematic: return "systematic";
  }
  return "?";
}

DesignKind design_kind_from_name(const std::string& name) {
  if (name == "strip") return DesignKind::kStrip;
  if (name == "split_plot") return DesignKind::kSplitPlot;
  if (name == "strip_split") return DesignKind::kStripSplit;
  if (name == "systematic") return DesignKind::kSystematic;
  throw DesignError("unknown design kind: " + name);
}

void DesignLayout::validate() const {
  if (!(pass_width > 0.0)) throw DesignError("pass_width must be positive");
  if (uses_passes(kind) && n_passes < 2) {
    throw DesignError("strip designs need at least 2 passes");
  }
  if (uses_splits(kind) && !(split_length > 0.0)) {
    throw DesignError("split designs need a positive split_length");
  }
}

TreatmentMask assign_design(const YieldGrid& grid, const DesignLayout& layout) {
  layout.validate();

  TreatmentMask mask;
  mask.nx = grid.nx;
  mask.ny = grid.ny;
  mask.labels.assign(grid.cell_count(), 0);

  // Anchor bands/blocks at the minimum edge of the valid area.
  double min_cx = std::numeric_limits<double>::infinity();
  double min_cy = std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      if (grid.mask[grid.index(i, j)]) {
        const Location c = grid.centroid(i, j);
        min_cx = std::min(min_cx, c.x);
        min_cy = std::min(min_cy, c.y);
      }
  if (!std::isfinite(min_cx)) throw DesignError("grid has no valid cells");
  const double x0 = min_cx - 0.5 * grid.dx;
  const double y0 = min_cy - 0.5 * grid.dy;

  const int phase_offset = layout.phase == Phase::kControl ? 0 : 1;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t k = grid.index(i, j);
      if (!grid.mask[k]) continue;
      const Location c = grid.centroid(i, j);
      int parity = 0;
      switch (layout.kind) {
        case DesignKind::kStrip:
          parity = band_index(c.x, x0, layout.pass_width);
          break;
        case DesignKind::kSplitPlot:
          parity = band_index(c.y, y0, layout.split_length);
          break;
        case DesignKind::kStripSplit:
        case DesignKind::kSystematic:
          parity = band_index(c.x, x0, layout.pass_width) +
                   band_index(c.y, y0, layout.split_length);
          break;
      }
      const std::uint8_t label = static_cast<std::uint8_t>((parity + phase_offset) & 1);
      mask.labels[k] = label;
      if (label) ++mask.n_treated; else ++mask.n_control;
    }
  }

  if (mask.n_control == 0 || mask.n_treated == 0) {
    throw DesignError("layout '" + layout.name + "' assigns a single label; the treatment "
                      "effect would be unidentifiable");
  }
  return mask;
}

Eigen::MatrixXd build_design_matrix(const YieldGrid& grid, const TreatmentMask& mask) {
  if (mask.nx != grid.nx || mask.ny != grid.ny) {
    throw DesignError("mask is not aligned to the grid");
  }
  const auto idx = grid.valid_indices();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(idx.size()), 2);
  bool any_control = false, any_treated = false;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const std::uint8_t label = mask.labels[idx[static_cast<std::size_t>(r)]];
    x(r, 0) = 1.0;
    x(r, 1) = label;
    (label ? any_treated : any_control) = true;
  }
  if (!any_control || !any_treated) {
    throw DesignError("design matrix is rank deficient: one treatment label is absent");
  }
  return x;
}

}  // namespace onfarm
