#include <doctest.h>

#include <charconv>
#include <sstream>

#include "onfarm/errors.hpp"
#include "onfarm/field_data.hpp"
#include "onfarm/io.hpp"
#include "test_support.hpp"

using namespace onfarm;

namespace {

YieldGrid sample_grid() {
  YieldGrid g;
  g.origin_x = 1.5;
  g.origin_y = -2.0;
  g.dx = 2.5;
  g.dy = 3.0;
  g.nx = 3;
  g.ny = 2;
  g.values = {4.125, 0.1, 5.75, 6.0, std::nan(""), 7.3210987654321};
  g.mask = {1, 1, 1, 1, 0, 1};
  g.counts = {2, 1, 3, 1, 0, 4};
  return g;
}

Provenance test_prov() {
  Provenance p;
  p.version = "9.9.9";
  p.config_hash = "00000000deadbeef";
  p.seed = 7;
  return p;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  for (const double v : {0.1, 1.0 / 3.0, 12345.6789, 1e-300, -7.25, 0.0}) {
    const std::string s = format_double(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
}

TEST_CASE("fnv1a hash is stable") {
  CHECK(fnv1a_hash("") == 14695981039346656037ull);
  CHECK(fnv1a_hash("a") == fnv1a_hash("a"));
  CHECK(fnv1a_hash("a") != fnv1a_hash("b"));
  CHECK(to_hex(0xdeadbeefull) == "00000000deadbeef");
}

TEST_CASE("grid csv + meta round trip") {
  const YieldGrid g = sample_grid();
  const Provenance prov = test_prov();

  std::ostringstream csv, meta;
  write_grid_csv(csv, g, prov);
  write_grid_meta(meta, g, prov);

  CHECK(csv.str().rfind("# onfarm 9.9.9 config=00000000deadbeef seed=7\n", 0) == 0);

  std::istringstream csv_in(csv.str()), meta_in(meta.str());
  const YieldGrid back = read_grid(csv_in, meta_in);

  CHECK(back.origin_x == g.origin_x);
  CHECK(back.origin_y == g.origin_y);
  CHECK(back.dx == g.dx);
  CHECK(back.dy == g.dy);
  CHECK(back.nx == g.nx);
  CHECK(back.ny == g.ny);
  CHECK(back.mask == g.mask);
  CHECK(back.counts == g.counts);
  for (std::size_t k = 0; k < g.cell_count(); ++k) {
    if (g.mask[k]) CHECK(back.values[k] == g.values[k]);
  }
}

TEST_CASE("grid serialization is deterministic") {
  const YieldGrid g = sample_grid();
  const Provenance prov = test_prov();
  std::ostringstream a, b;
  write_grid_csv(a, g, prov);
  write_grid_csv(b, g, prov);
  CHECK(a.str() == b.str());
}

TEST_CASE("mask csv lists only valid cells") {
  const YieldGrid g = sample_grid();
  TreatmentMask mask;
  mask.nx = g.nx;
  mask.ny = g.ny;
  mask.labels = {0, 1, 0, 1, 0, 1};
  std::ostringstream out;
  write_mask_csv(out, g, mask, test_prov());

  int lines = 0;
  std::string line;
  std::istringstream in(out.str());
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 2 + 5);  // provenance + header + five valid cells
}
