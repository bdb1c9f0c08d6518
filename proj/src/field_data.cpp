#include "onfarm/field_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <set>

#include "onfarm/errors.hpp"

namespace onfarm {

namespace {

constexpr double kBinEps = 1e-9;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string trimmed(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lowered(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool parse_double(const std::string& field, double& out) {
  const std::string t = trimmed(field);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = begin + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

// Bin index with the boundary point joining the lower-index cell.
int lower_tiebreak_bin(double t, int n_bins) {
  const int idx = static_cast<int>(std::ceil(t - kBinEps)) - 1;
  return std::clamp(idx, 0, n_bins - 1);
}

}  // namespace

std::size_t YieldGrid::valid_count() const {
  std::size_t n = 0;
  for (const auto m : mask) n += (m != 0);
  return n;
}

std::vector<Location> YieldGrid::valid_centroids() const {
  std::vector<Location> out;
  out.reserve(valid_count());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (mask[index(i, j)]) out.push_back(centroid(i, j));
  return out;
}

std::vector<double> YieldGrid::valid_values() const {
  std::vector<double> out;
  out.reserve(valid_count());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (mask[index(i, j)]) out.push_back(values[index(i, j)]);
  return out;
}

std::vector<std::size_t> YieldGrid::valid_indices() const {
  std::vector<std::size_t> out;
  out.reserve(valid_count());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (mask[index(i, j)]) out.push_back(index(i, j));
  return out;
}

void YieldGrid::validate() const {
  if (!(dx > 0.0) || !(dy > 0.0)) throw DomainError("grid spacing must be positive");
  if (nx < 2 || ny < 2) throw DomainError("grid must be at least 2x2 cells");
  const std::size_t n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  if (values.size() != n || mask.size() != n || counts.size() != n) {
    throw DomainError("grid storage does not match nx * ny");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (mask[k] && (!std::isfinite(values[k]) || counts[k] < 1)) {
      throw DomainError("valid cell " + std::to_string(k) +
                        " must hold a finite value with count >= 1");
    }
  }
}

void FieldGeometry::validate() const {
  if (!(headland_margin >= 0.0) || !(side_margin >= 0.0)) {
    throw DomainError("margins must be nonnegative");
  }
  if (!(width_x > 2.0 * side_margin) || !(length_y > 2.0 * headland_margin)) {
    throw DomainError("field must be wider than twice each margin");
  }
  if (!std::isfinite(heading)) throw DomainError("heading must be finite");
}

LoadReport load_yield_points(std::istream& source) {
  std::string line;
  if (!std::getline(source, line)) throw EmptyInputError("input stream is empty");

  // strip a UTF-8 BOM if present
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_csv(line);
  int col_x = -1, col_y = -1, col_value = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = lowered(trimmed(header[c]));
    if (name == "x") col_x = static_cast<int>(c);
    else if (name == "y") col_y = static_cast<int>(c);
    else if (name == "value") col_value = static_cast<int>(c);
  }
  if (col_x < 0) throw SchemaError("missing required column: x");
  if (col_y < 0) throw SchemaError("missing required column: y");
  if (col_value < 0) throw SchemaError("missing required column: value");

  LoadReport report;
  std::size_t line_no = 1;
  const std::size_t needed =
      static_cast<std::size_t>(std::max({col_x, col_y, col_value})) + 1;
  while (std::getline(source, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() < needed) {
      report.bad_rows.push_back({line_no, "missing fields"});
      continue;
    }
    YieldPoint p;
    if (!parse_double(fields[static_cast<std::size_t>(col_x)], p.x) ||
        !parse_double(fields[static_cast<std::size_t>(col_y)], p.y) ||
        !parse_double(fields[static_cast<std::size_t>(col_value)], p.value)) {
      report.bad_rows.push_back({line_no, "non-numeric field"});
      continue;
    }
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.value)) {
      report.bad_rows.push_back({line_no, "non-finite field"});
      continue;
    }
    if (p.value < 0.0) {
      report.bad_rows.push_back({line_no, "negative yield"});
      continue;
    }
    report.points.push_back(p);
  }
  if (report.points.empty()) throw EmptyInputError("no data rows");
  return report;
}

std::vector<YieldPoint> rotate_coordinates(std::span<const YieldPoint> points, double heading) {
  if (!std::isfinite(heading)) throw DomainError("heading must be finite");
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  std::vector<YieldPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    // rotation by -heading
    out.push_back({p.x * c + p.y * s, -p.x * s + p.y * c, p.value});
  }
  return out;
}

std::vector<YieldPoint> align_rows(std::span<const YieldPoint> points, double row_width) {
  if (!(row_width > 0.0)) throw DomainError("row_width must be positive");
  if (points.empty()) return {};

  double min_x = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
  }

  std::vector<int> row_of(points.size());
  std::set<int> occupied;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double t = (points[k].x - min_x) / row_width;
    const int idx = static_cast<int>(std::floor(t + kBinEps));
    row_of[k] = idx;
    occupied.insert(idx);
  }

  // More occupied rows than the x extent can hold means the x scatter is
  // comparable to the row pitch and alignment would be meaningless.
  const int max_rows = static_cast<int>(std::floor((max_x - min_x) / row_width + kBinEps)) + 1;
  if (static_cast<int>(occupied.size()) > max_rows) {
    throw AlignmentError("found " + std::to_string(occupied.size()) + " rows where at most " +
                         std::to_string(max_rows) + " fit the x extent");
  }

  std::vector<YieldPoint> out;
  out.reserve(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    out.push_back({(row_of[k] + 0.5) * row_width, points[k].y, points[k].value});
  }
  return out;
}

YieldGrid aggregate_to_grid(std::span<const YieldPoint> points, double dx, double dy) {
  if (!(dx > 0.0) || !(dy > 0.0)) throw DomainError("cell sizes must be positive");
  if (points.empty()) throw EmptyInputError("no points to aggregate");

  double min_x = points[0].x, max_x = points[0].x;
  double min_y = points[0].y, max_y = points[0].y;
  for (const auto& p : points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }

  YieldGrid grid;
  grid.origin_x = min_x;
  grid.origin_y = min_y;
  grid.dx = dx;
  grid.dy = dy;
  grid.nx = std::max(1, static_cast<int>(std::ceil((max_x - min_x) / dx - kBinEps)));
  grid.ny = std::max(1, static_cast<int>(std::ceil((max_y - min_y) / dy - kBinEps)));
  const std::size_t n = static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny);
  grid.values.assign(n, std::numeric_limits<double>::quiet_NaN());
  grid.mask.assign(n, 0);
  grid.counts.assign(n, 0);

  std::vector<double> sums(n, 0.0);
  for (const auto& p : points) {
    const int i = lower_tiebreak_bin((p.x - min_x) / dx, grid.nx);
    const int j = lower_tiebreak_bin((p.y - min_y) / dy, grid.ny);
    const std::size_t k = grid.index(i, j);
    sums[k] += p.value;
    grid.counts[k] += 1;
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (grid.counts[k] > 0) {
      grid.values[k] = sums[k] / grid.counts[k];
      grid.mask[k] = 1;
    }
  }
  return grid;
}

YieldGrid trim_edges(const YieldGrid& grid, const FieldGeometry& geometry) {
  geometry.validate();
  const double x_lo = grid.origin_x;
  const double x_hi = grid.origin_x + grid.nx * grid.dx;
  const double y_lo = grid.origin_y;
  const double y_hi = grid.origin_y + grid.ny * grid.dy;

  YieldGrid out = grid;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const Location c = grid.centroid(i, j);
      const bool near_side = (c.x - x_lo) < geometry.side_margin || (x_hi - c.x) < geometry.side_margin;
      const bool near_headland =
          (c.y - y_lo) < geometry.headland_margin || (y_hi - c.y) < geometry.headland_margin;
      if (near_side || near_headland) out.mask[grid.index(i, j)] = 0;
    }
  }
  if (out.valid_count() == 0) {
    throw EmptyInteriorError("margins removed every valid cell");
  }
  return out;
}

}  // namespace onfarm
