#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "onfarm/types.hpp"

namespace onfarm {

// One raw yield observation (remote-sensing pixel or yield-monitor point).
struct YieldPoint {
  double x = 0.0;      // meters, across farming operations
  double y = 0.0;      // meters, direction of travel
  double value = 0.0;  // yield, t/ha
};

// Regular lattice of aggregated yield values. Cells are stored row-major
// with x fastest: index(i, j) = j * nx + i. The centroid of cell (i, j) is
// origin + ((i + 0.5) dx, (j + 0.5) dy). Invalid cells carry NaN values.
struct YieldGrid {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double dx = 1.0;
  double dy = 1.0;
  int nx = 0;
  int ny = 0;
  std::vector<double> values;       // nx * ny
  std::vector<std::uint8_t> mask;   // nx * ny, 1 = valid
  std::vector<int> counts;          // nx * ny, source points per cell

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) +
           static_cast<std::size_t>(i);
  }
  Location centroid(int i, int j) const {
    return {origin_x + (i + 0.5) * dx, origin_y + (j + 0.5) * dy};
  }
  std::size_t cell_count() const { return values.size(); }
  std::size_t valid_count() const;

  // Valid-cell views in canonical order (row-major, x fastest).
  std::vector<Location> valid_centroids() const;
  std::vector<double> valid_values() const;
  std::vector<std::size_t> valid_indices() const;

  // Checks the structural invariants (positive spacing, at least a 2x2
  // lattice, finite values with counts >= 1 on every valid cell).
  void validate() const;
};

// Field extents, heading, and edge-exclusion margins.
struct FieldGeometry {
  double width_x = 0.0;          // meters across operations
  double length_y = 0.0;         // meters along travel
  double heading = 0.0;          // radians, +y-axis to travel direction, CCW
  double headland_margin = 0.0;  // meters trimmed at min/max y
  double side_margin = 0.0;      // meters trimmed at min/max x

  void validate() const;
};

struct LoadReport {
  std::vector<YieldPoint> points;
  struct BadRow {
    std::size_t line = 0;  // 1-based line number in the stream
    std::string reason;
  };
  std::vector<BadRow> bad_rows;
};

/// Parses comma-delimited text with header columns x, y, value (any order,
/// extra columns ignored). Rows with missing, non-numeric, non-finite, or
/// negative yield fields are reported, not loaded.
LoadReport load_yield_points(std::istream& source);

/// Rigid rotation of every point by -heading, so that the direction of
/// travel maps onto the +y axis. Values are untouched and all pairwise
/// distances are preserved.
std::vector<YieldPoint> rotate_coordinates(std::span<const YieldPoint> points, double heading);

/// Snaps each point to the center of its machinery row. Rows are found by
/// binning x at row_width pitch anchored at the minimum x; output x values
/// are (row + 0.5) * row_width, re-expressed relative to that minimum, so
/// the operation is idempotent on its own output.
std::vector<YieldPoint> align_rows(std::span<const YieldPoint> points, double row_width);

/// Averages points into dx-by-dy cells over their bounding box. A point on
/// a cell boundary joins the lower-index cell; cells with no points are
/// mask-invalid. The grid origin is the minimum-coordinate corner.
YieldGrid aggregate_to_grid(std::span<const YieldPoint> points, double dx, double dy);

/// Invalidates cells whose centroid lies within headland_margin of the
/// min/max y boundary or side_margin of the min/max x boundary of the grid
/// bounding box. Idempotent. Throws EmptyInteriorError if nothing survives.
YieldGrid trim_edges(const YieldGrid& grid, const FieldGeometry& geometry);

}  // namespace onfarm
