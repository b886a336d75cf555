#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pmlab/field.hpp"
#include "pmlab/minimize.hpp"

namespace pmlab {

/// Settings for one CLI run.  Read from an INI-style file:
///
///   [experiment]  command, integrand, seed, output
///   [grid]        n, h, half_length
///   [relax]       max_iterations, gradient_tolerance, step_rule, initial_step,
///                 clamp_min, clamp_max, log_every
///   [initial]     kind (constant|ramp|logistic|member-bump|file), value, low,
///                 high, b, bump_amplitude, bump_radius, file
///   [tolerances]  order, foliation, match, envelope
///   [scan]        radius
///   [spot]        trials, radius, amplitude
///   [family]      omega, b_min, b_max, count, b_grid, write_members, verify_members
///   [envelope]    steps
///   [asymptote]   directions ("k1,k2,k3; ..."), steps
struct ExperimentConfig {
  std::string command;
  std::string integrand = "allen-cahn";
  std::uint64_t seed = 1;
  std::filesystem::path output = "out";

  std::size_t dimension = 1;
  double spacing = 0.01;
  double half_length = 20.0;

  RelaxOptions relax;

  std::string initial = "ramp";
  double initial_value = 0.0;
  double ramp_low = 0.0;
  double ramp_high = 1.0;
  double member_b = 0.0;
  double bump_amplitude = 0.01;
  double bump_radius = 2.0;
  std::filesystem::path initial_file;

  double order_tolerance = kOrderTolerance;
  double foliation_tolerance = 1e-6;
  double match_tolerance = 1e-3;
  double envelope_tolerance = 1e-6;

  long scan_radius = 3;

  std::size_t spot_trials = 100;
  double spot_radius = 2.0;
  double spot_amplitude = 0.5;

  Vec omega;
  double b_min = -5.0;
  double b_max = 5.0;
  std::size_t family_count = 101;
  std::vector<double> b_grid;
  bool write_members = true;
  bool verify_members = true;

  std::size_t envelope_steps = 40;

  std::vector<IntVec> directions;
  std::size_t asymptote_steps = 40;

  long resolution() const;
  /// Box [-L, L] on axis 1, unit periodic cells on the other axes.
  std::vector<Axis> layout() const;
};

/// Throws ConfigError with the offending key on any malformed or unknown entry.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace pmlab
