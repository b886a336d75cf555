#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pmlab/field.hpp"
#include "pmlab/integrand.hpp"

namespace pmlab {

/// Product of global node ranges [lo, hi), one per axis.  A periodic range may
/// wrap but must not exceed one period; a box range must stay inside the box.
struct Region {
  std::vector<std::pair<long, long>> ranges;

  static Region whole(const Field& u);
  bool empty() const;
};

/// Nodal quadrature of F(x, u, D+u) where D+ is the forward difference along
/// each axis (edge-centred gradient).  Box axes extend by their edge value, so
/// the last node of a box has zero slope along that axis.
double energy(const Field& u, const Integrand& f, const Region& region);
double energy(const Field& u, const Integrand& f);

/// g with E(u + s d) = E(u) + s <g, d> h^n + O(s^2) for every grid perturbation d.
Field energy_gradient(const Field& u, const Integrand& f);

/// E(u + delta) - E(u) over `region`, evaluated term by term so the result
/// keeps relative accuracy when delta is small.  `delta` is indexed like the
/// stored values of u.
double energy_change(const Field& u, std::span<const double> delta, const Integrand& f,
                     const Region& region);

enum class StepRule { fixed, adaptive };

struct RelaxOptions {
  std::size_t max_iterations = 5'000'000;
  double gradient_tolerance = 1e-10;
  StepRule step_rule = StepRule::adaptive;
  /// 0 selects a stable explicit step from the grid spacing.
  double initial_step = 0.0;
  std::optional<std::pair<double, double>> clamp;
  /// Hold the end nodes of every box axis fixed (Dirichlet data).
  bool pin_box_ends = true;
  /// Record every k-th accepted iteration in the log (the last one is always recorded).
  std::size_t log_every = 1000;

  void validate() const;
};

struct RelaxRecord {
  std::size_t iteration = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct RelaxResult {
  Field field;
  bool converged = false;
  std::size_t iterations = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  std::vector<RelaxRecord> log;
};

/// Explicit gradient descent; the step grows by 1.2 after an accepted
/// (energy non-increasing) update and halves otherwise.  Updates touch the
/// stored periodic part only, so slopes are preserved.
RelaxResult relax(const Field& u0, const Integrand& f, const RelaxOptions& options = {});

/// Compactly supported bump A (1 - |x - c|^2 / R^2)^k.
struct Perturbation {
  IntVec center;
  double radius = 0.0;
  double amplitude = 0.0;
  int exponent = 2;
};

/// Values of the bump at the stored nodes of `layout` (periodic axes use the
/// nearest image; radii along a periodic axis are capped below half a period).
std::vector<double> bump_values(const Field& layout, const Perturbation& p);
/// Region containing the support of the bump plus one node on each side.
Region bump_region(const Field& layout, const Perturbation& p);

struct SpotCheckOptions {
  double max_amplitude = 0.5;
  /// |amplitude| is drawn from [min_amplitude_fraction, 1] * max_amplitude.
  double min_amplitude_fraction = 0.1;
};

/// Sampled evidence for minimality, never a certificate.
struct MinimalityReport {
  std::size_t trials = 0;
  std::size_t failures = 0;
  /// Largest energy decrease observed, -(E(u + phi) - E(u)); <= tolerance passes.
  double worst_decrease = 0.0;
  std::size_t worst_trial = 0;
  std::uint64_t seed = 0;
  Perturbation witness;
  double witness_tolerance = 0.0;

  bool passed() const { return failures == 0; }
};

/// Balls of radius up to max_radius around random centres; periodic axes are
/// unrolled over whole periods first when a ball would not fit in one cell.
MinimalityReport minimality_spot_check(const Field& u, const Integrand& f, std::size_t trials,
                                       double max_radius, std::uint64_t seed,
                                       const SpotCheckOptions& options = {});

}  // namespace pmlab
