#include "onfarm/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "onfarm/errors.hpp"

namespace onfarm {

namespace {

using nlohmann::json;

std::string csv_field(std::istringstream& row) {
  std::string field;
  if (!std::getline(row, field, ',')) throw SchemaError("grid row is missing fields");
  return field;
}

}  // namespace

std::string Provenance::comment_line() const {
  return "# " + tool + " " + version + " config=" + config_hash + " seed=" + std::to_string(seed);
}

std::uint64_t fnv1a_hash(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string to_hex(std::uint64_t value) {
  char buf[17];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, 16);
  return std::string(16 - (ptr - buf), '0') + std::string(buf, ptr);
}

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_grid_csv(std::ostream& out, const YieldGrid& grid, const Provenance& prov) {
  out << prov.comment_line() << "\n";
  out << "i,j,cx,cy,value,count,valid\n";
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t k = grid.index(i, j);
      const Location c = grid.centroid(i, j);
      out << i << ',' << j << ',' << format_double(c.x) << ',' << format_double(c.y) << ','
          << format_double(grid.values[k]) << ',' << grid.counts[k] << ','
          << int(grid.mask[k]) << "\n";
    }
  }
}

void write_grid_meta(std::ostream& out, const YieldGrid& grid, const Provenance& prov) {
  json meta;
  meta["provenance"] = {{"tool", prov.tool},
                        {"version", prov.version},
                        {"config_hash", prov.config_hash},
                        {"seed", prov.seed}};
  meta["origin"] = {grid.origin_x, grid.origin_y};
  meta["dx"] = grid.dx;
  meta["dy"] = grid.dy;
  meta["nx"] = grid.nx;
  meta["ny"] = grid.ny;
  out << meta.dump(2) << "\n";
}

YieldGrid read_grid(std::istream& csv, std::istream& meta) {
  json m;
  try {
    meta >> m;
  } catch (const json::exception& ex) {
    throw SchemaError(std::string("grid metadata is not valid JSON: ") + ex.what());
  }

  YieldGrid grid;
  try {
    grid.origin_x = m.at("origin").at(0).get<double>();
    grid.origin_y = m.at("origin").at(1).get<double>();
    grid.dx = m.at("dx").get<double>();
    grid.dy = m.at("dy").get<double>();
    grid.nx = m.at("nx").get<int>();
    grid.ny = m.at("ny").get<int>();
  } catch (const json::exception& ex) {
    throw SchemaError(std::string("grid metadata is missing a field: ") + ex.what());
  }
  if (grid.nx < 1 || grid.ny < 1 || !(grid.dx > 0.0) || !(grid.dy > 0.0)) {
    throw SchemaError("grid metadata has non-positive dimensions");
  }
  const std::size_t n = static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny);
  grid.values.assign(n, std::numeric_limits<double>::quiet_NaN());
  grid.mask.assign(n, 0);
  grid.counts.assign(n, 0);

  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(csv, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {  // column header
      header_seen = true;
      continue;
    }
    try {
      std::istringstream row(line);
      const int i = std::stoi(csv_field(row));
      const int j = std::stoi(csv_field(row));
      csv_field(row);  // cx, recomputed from the lattice
      csv_field(row);  // cy
      const std::string value_str = csv_field(row);
      const int count = std::stoi(csv_field(row));
      const int valid = std::stoi(csv_field(row));
      if (i < 0 || i >= grid.nx || j < 0 || j >= grid.ny) {
        throw SchemaError("grid cell index out of range");
      }
      const std::size_t k = grid.index(i, j);
      grid.counts[k] = count;
      grid.mask[k] = valid ? 1 : 0;
      if (valid) {
        double value = 0.0;
        auto [ptr, ec] =
            std::from_chars(value_str.data(), value_str.data() + value_str.size(), value);
        if (ec != std::errc{}) throw SchemaError("bad value field in grid row");
        grid.values[k] = value;
      }
    } catch (const std::logic_error&) {
      throw SchemaError("malformed grid row at line " + std::to_string(line_no));
    }
  }
  if (!header_seen) throw EmptyInputError("grid csv is empty");
  return grid;
}

void write_mask_csv(std::ostream& out, const YieldGrid& grid, const TreatmentMask& mask,
                    const Provenance& prov) {
  out << prov.comment_line() << "\n";
  out << "i,j,label\n";
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t k = grid.index(i, j);
      if (!grid.mask[k]) continue;
      out << i << ',' << j << ',' << int(mask.labels[k]) << "\n";
    }
  }
}

void write_empirical_variogram_csv(std::ostream& out, const EmpiricalVariogram& x_dir,
                                   const EmpiricalVariogram& y_dir, const Provenance& prov) {
  out << prov.comment_line() << "\n";
  out << "direction,lag,semivariance,pairs\n";
  for (const auto* vg : {&x_dir, &y_dir}) {
    for (const auto& bin : vg->bins) {
      out << axis_name(vg->direction) << ',' << format_double(bin.lag) << ','
          << format_double(bin.semivariance) << ',' << bin.pairs << "\n";
    }
  }
}

void write_fitted_variogram_csv(std::ostream& out,
                                std::span<const std::pair<double, double>> x_curve,
                                std::span<const std::pair<double, double>> y_curve,
                                const Provenance& prov) {
  out << prov.comment_line() << "\n";
  out << "direction,lag,semivariance\n";
  for (const auto& [lag, gamma] : x_curve) {
    out << "x," << format_double(lag) << ',' << format_double(gamma) << "\n";
  }
  for (const auto& [lag, gamma] : y_curve) {
    out << "y," << format_double(lag) << ',' << format_double(gamma) << "\n";
  }
}

}  // namespace onfarm
