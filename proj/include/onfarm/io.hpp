#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "onfarm/design.hpp"
#include "onfarm/field_data.hpp"
#include "onfarm/variogram.hpp"

namespace onfarm {

// Stamped on every output so a result can be traced to the exact run.
struct Provenance {
  std::string tool = "onfarm";
  std::string version;
  std::string config_hash;  // fnv1a-64 of the config file bytes, hex
  std::uint64_t seed = 0;

  std::string comment_line() const;  // "# onfarm <version> config=<hash> seed=<seed>"
};

std::uint64_t fnv1a_hash(std::string_view bytes);
std::string to_hex(std::uint64_t value);

/// Shortest decimal string that round-trips the double exactly.
std::string format_double(double value);

/// Grid cells as `i,j,cx,cy,value,count,valid`; invalid cells carry value
/// "nan". Pair with write_grid_meta for the lattice parameters.
void write_grid_csv(std::ostream& out, const YieldGrid& grid, const Provenance& prov);
void write_grid_meta(std::ostream& out, const YieldGrid& grid, const Provenance& prov);

/// Reads a grid written by write_grid_csv/write_grid_meta.
YieldGrid read_grid(std::istream& csv, std::istream& meta);

/// Treatment labels of valid cells as `i,j,label`.
void write_mask_csv(std::ostream& out, const YieldGrid& grid, const TreatmentMask& mask,
                    const Provenance& prov);

void write_empirical_variogram_csv(std::ostream& out, const EmpiricalVariogram& x_dir,
                                   const EmpiricalVariogram& y_dir, const Provenance& prov);
void write_fitted_variogram_csv(std::ostream& out,
                                std::span<const std::pair<double, double>> x_curve,
                                std::span<const std::pair<double, double>> y_curve,
                                const Provenance& prov);

}  // namespace onfarm
