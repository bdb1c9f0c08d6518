#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "onfarm/design.hpp"
#include "onfarm/simulation.hpp"

namespace onfarm {

// One run configuration drives every subcommand, so a result is fully
// described by (config file, seed). Command-line flags may override the
// seed, output directory, and thread count.
struct RunConfig {
  // I/O
  std::string input;       // raw points CSV (preprocess)
  std::string output_dir = "out";
  std::string grid_dir;    // where grid artifacts live; defaults to output_dir
  std::uint64_t seed = 0;
  int threads = 1;

  // preprocessing
  double dx = 2.5;
  double dy = 2.5;
  double heading = 0.0;     // radians
  double row_width = 0.0;   // 0 disables row alignment
  double side_margin = 0.0;
  double headland_margin = 0.0;
  double field_width_x = 0.0;   // 0 = take from the data extent
  double field_length_y = 0.0;

  // analysis
  std::vector<DesignLayout> designs;
  std::vector<ModelChoice> models;
  int n_starts = 8;
  int fit_max_iterations = 500;

  // variograms
  std::size_t min_pairs = 30;
  double max_lag = 0.0;  // 0 = half the valid-area extent per direction

  // simulation
  int n_reps = 1;
  double effect_mean = 0.3;
  double effect_sd = 0.10;
  double alpha_level = 0.05;
  std::vector<std::string> experiments;  // subset of {"null", "effect"}
  bool synthetic_field = false;
  SyntheticFieldSpec synthetic;

  std::string raw_bytes;  // config file contents, hashed into provenance
};

RunConfig load_run_config(const std::string& path);

}  // namespace onfarm
