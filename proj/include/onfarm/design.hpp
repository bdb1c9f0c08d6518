#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "onfarm/field_data.hpp"

namespace onfarm {

enum class DesignKind { kStrip, kSplitPlot, kStripSplit, kSystematic };

const char* design_kind_name(DesignKind k);
DesignKind design_kind_from_name(const std::string& name);

enum class Phase { kControl, kTreatment };

// One experimental layout: treatments assigned by machinery pass bands
// across x, by split blocks along y, or by both.
struct DesignLayout {
  std::string name;  // e.g. "D1"
  DesignKind kind = DesignKind::kStrip;
  double pass_width = 0.0;    // meters, machinery working width
  int n_passes = 2;           // nominal pass count across the field
  double split_length = 0.0;  // meters, plot length along y for split kinds
  Phase phase = Phase::kControl;

  void validate() const;
};

// Per-cell 0/1 treatment labels aligned to a YieldGrid. Only labels of
// valid cells are meaningful.
struct TreatmentMask {
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> labels;  // nx * ny

  std::size_t n_control = 0;  // over valid cells
  std::size_t n_treated = 0;
};

/// Assigns treatment labels to the valid cells of the grid. Bands and
/// blocks are anchored at the minimum edge of the valid area. Throws
/// DesignError when only one label would be present.
TreatmentMask assign_design(const YieldGrid& grid, const DesignLayout& layout);

/// Fixed-effects design matrix over valid cells in canonical order:
/// column 0 intercept, column 1 treatment indicator.
Eigen::MatrixXd build_design_matrix(const YieldGrid& grid, const TreatmentMask& mask);

}  // namespace onfarm
