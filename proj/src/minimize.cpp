#include "pmlab/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "energy_kernel.hpp"
#include "pmlab/errors.hpp"

namespace pmlab {

Region Region::whole(const Field& u) {
  Region r;
  for (const auto& a : u.axes()) r.ranges.emplace_back(a.first, a.first + a.count);
  return r;
}

bool Region::empty() const {
  if (ranges.empty()) return true;
  return std::any_of(ranges.begin(), ranges.end(), [](const auto& r) { return r.second <= r.first; });
}

namespace {

void check_dimensions(const Field& u, const Integrand& f) {
  if (u.dimension() != f.dimension) {
    throw PreconditionError("field dimension " + std::to_string(u.dimension()) +
                            " does not match integrand dimension " + std::to_string(f.dimension));
  }
}

}  // namespace

double energy(const Field& u, const Integrand& f, const Region& region) {
  check_dimensions(u, f);
  const detail::Stencil s(u);
  return detail::energy(u.values(), s, detail::region_nodes(u, region), f);
}

double energy(const Field& u, const Integrand& f) {
  check_dimensions(u, f);
  const detail::Stencil s(u);
  return detail::energy(u.values(), s, detail::whole_cell(u), f);
}

Field energy_gradient(const Field& u, const Integrand& f) {
  check_dimensions(u, f);
  const detail::Stencil s(u);
  std::vector<double> g(u.size());
  detail::gradient(u.values(), s, detail::whole_cell(u), f, g);
  std::vector<Axis> axes = u.axes();
  for (auto& a : axes) a.rise = 0;
  return Field(std::move(axes), std::move(g));
}

double energy_change(const Field& u, std::span<const double> delta, const Integrand& f,
                     const Region& region) {
  check_dimensions(u, f);
  if (delta.size() != u.size()) throw PreconditionError("perturbation size mismatch");
  const detail::Stencil s(u);
  return detail::energy_change(u.values(), s, detail::region_nodes(u, region), delta, f);
}

void RelaxOptions::validate() const {
  if (!(gradient_tolerance > 0.0)) throw PreconditionError("gradient tolerance must be positive");
  if (initial_step < 0.0) throw PreconditionError("initial step must be non-negative");
  if (clamp && !(clamp->first < clamp->second)) throw PreconditionError("clamp range needs u_min < u_max");
  if (log_every == 0) throw PreconditionError("log_every must be positive");
}

RelaxResult relax(const Field& u0, const Integrand& f, const RelaxOptions& options) {
  options.validate();
  check_dimensions(u0, f);
  if (!u0.finite()) throw PreconditionError("initial field has non-finite values");

  const detail::Stencil stencil(u0);
  const detail::NodeSet whole = detail::whole_cell(u0);
  std::vector<double> values(u0.values().begin(), u0.values().end());
  std::vector<char> free(values.size(), 1);
  if (options.pin_box_ends) {
    for (std::size_t j = 0; j < free.size(); ++j) free[j] = stencil.box_end[j] ? 0 : 1;
  }

  double energy_value = detail::energy(values, stencil, whole, f);
  if (!std::isfinite(energy_value)) throw ConvergenceError("divergent energy at the initial field");

  std::vector<double> grad(values.size()), delta(values.size(), 0.0);
  std::vector<double> mask(values.size());
  for (std::size_t j = 0; j < mask.size(); ++j) mask[j] = free[j] ? 1.0 : 0.0;
  auto sup_norm = [&] {
    double m = 0.0;
    for (std::size_t j = 0; j < grad.size(); ++j) m = std::max(m, std::abs(grad[j]) * mask[j]);
    return m;
  };
  detail::gradient(values, stencil, whole, f, grad);
  double grad_norm = sup_norm();

  double step = options.initial_step;
  if (step == 0.0) {
    double lambda = 1.0;
    for (double ih : stencil.inv_h) lambda += 4.0 * ih * ih;
    step = 1.0 / (f.growth_constant * lambda);
  }

  RelaxResult result;
  result.log.push_back({0, energy_value, grad_norm, step});
  std::size_t attempts = 0;
  std::size_t accepted = 0;
  bool stalled = false;
  while (grad_norm > options.gradient_tolerance && attempts < options.max_iterations) {
    ++attempts;
    if (options.clamp) {
      const auto [lo, hi] = *options.clamp;
      for (std::size_t j = 0; j < values.size(); ++j) {
        delta[j] = free[j] ? std::clamp(values[j] - step * grad[j], lo, hi) - values[j] : 0.0;
      }
    } else {
      for (std::size_t j = 0; j < values.size(); ++j) delta[j] = -step * grad[j] * mask[j];
    }
    const double change = detail::energy_change(values, stencil, whole, delta, f);
    if (std::isfinite(change) && change <= 0.0) {
      for (std::size_t j = 0; j < values.size(); ++j) values[j] += delta[j];
      energy_value += change;
      ++accepted;
      detail::gradient(values, stencil, whole, f, grad);
      grad_norm = sup_norm();
      if (options.step_rule == StepRule::adaptive) step *= 1.2;
      if (accepted % options.log_every == 0) result.log.push_back({attempts, energy_value, grad_norm, step});
    } else {
      if (options.step_rule == StepRule::fixed || step < 1e-300) {
        stalled = true;
        break;
      }
      step *= 0.5;
    }
  }
  if (result.log.back().iteration != attempts) {
    result.log.push_back({attempts, energy_value, grad_norm, step});
  }
  result.field = u0.with_values(std::move(values));
  result.converged = !stalled && grad_norm <= options.gradient_tolerance;
  result.iterations = attempts;
  result.energy = energy_value;
  result.grad_norm = grad_norm;
  return result;
}

namespace {

double axis_radius(const Axis& a, double radius) {
  if (a.is_box()) return radius;
  return std::min(radius, 0.5 * static_cast<double>(a.period) - a.spacing());
}

long wrapped_offset(const Axis& a, long g, long c) {
  long d = g - c;
  if (a.is_box()) return d;
  d %= a.count;
  if (d < -a.count / 2) d += a.count;
  if (d >= a.count - a.count / 2) d -= a.count;
  return d;
}

// Same function on a window of whole periods wide enough to hold a ball of
// `radius` along every periodic axis (u is N P-periodic with rise N r).
Field unroll_for_radius(const Field& u, double radius) {
  std::vector<Axis> axes = u.axes();
  bool changed = false;
  for (Axis& a : axes) {
    if (a.is_box() || radius <= 0.5 * static_cast<double>(a.period) - a.spacing()) continue;
    const long copies =
        static_cast<long>(std::ceil((2.0 * radius + 2.0 * a.spacing()) / static_cast<double>(a.period)));
    Axis wide = Axis::periodic(a.period * copies, a.resolution, a.rise * copies);
    wide.first = a.first;
    a = wide;
    changed = true;
  }
  if (!changed) return u;
  return resample_on(u, Field::constant(axes, 0.0));
}

}  // namespace

std::vector<double> bump_values(const Field& layout, const Perturbation& p) {
  if (p.center.size() != layout.dimension()) throw PreconditionError("bump centre dimension mismatch");
  if (!(p.radius > 0.0)) throw PreconditionError("bump radius must be positive");
  std::vector<double> out(layout.size(), 0.0);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    const IntVec g = layout.global_index(flat);
    double r2 = 0.0;
    for (std::size_t i = 0; i < g.size() && r2 < 1.0; ++i) {
      const Axis& a = layout.axis(i);
      const double d = static_cast<double>(wrapped_offset(a, g[i], p.center[i])) * a.spacing();
      const double scaled = d / axis_radius(a, p.radius);
      r2 += scaled * scaled;
    }
    if (r2 < 1.0) out[flat] = p.amplitude * std::pow(1.0 - r2, p.exponent);
  }
  return out;
}

Region bump_region(const Field& layout, const Perturbation& p) {
  Region r;
  for (std::size_t i = 0; i < layout.dimension(); ++i) {
    const Axis& a = layout.axis(i);
    const long reach = static_cast<long>(std::ceil(axis_radius(a, p.radius) * static_cast<double>(a.resolution)));
    long lo = p.center[i] - reach - 1;
    long hi = p.center[i] + reach + 2;
    if (a.is_box()) {
      lo = std::max(lo, a.first);
      hi = std::min(hi, a.first + a.count);
    } else if (hi - lo >= a.count) {
      lo = a.first;
      hi = a.first + a.count;
    }
    r.ranges.emplace_back(lo, hi);
  }
  return r;
}

MinimalityReport minimality_spot_check(const Field& u0, const Integrand& f, std::size_t trials,
                                       double max_radius, std::uint64_t seed,
                                       const SpotCheckOptions& options) {
  if (trials < 1) throw PreconditionError("minimality spot check needs at least one trial");
  if (!(max_radius > 0.0)) throw PreconditionError("max_radius must be positive");
  if (!(options.max_amplitude > 0.0) || options.max_amplitude > 0.5) {
    throw PreconditionError("max_amplitude must lie in (0, 0.5]");
  }
  check_dimensions(u0, f);
  const Field u = unroll_for_radius(u0, max_radius);
  const detail::Stencil stencil(u);

  double h_max = 0.0;
  for (const auto& a : u.axes()) h_max = std::max(h_max, a.spacing());

  MinimalityReport report;
  report.trials = trials;
  report.seed = seed;
  report.worst_decrease = -std::numeric_limits<double>::infinity();

  for (std::size_t t = 0; t < trials; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Perturbation p;
    p.radius = std::max(2.0 * h_max, max_radius * (0.25 + 0.75 * unit(rng)));
    p.exponent = 2 + static_cast<int>(unit(rng) * 3.0) % 3;
    const double magnitude =
        options.max_amplitude * (options.min_amplitude_fraction + (1.0 - options.min_amplitude_fraction) * unit(rng));
    p.amplitude = unit(rng) < 0.5 ? -magnitude : magnitude;
    for (const auto& a : u.axes()) {
      long lo = a.first, hi = a.first + a.count - 1;
      if (a.is_box()) {
        const long reach = static_cast<long>(std::ceil(p.radius * static_cast<double>(a.resolution))) + 1;
        if (hi - lo > 2 * reach) {
          lo += reach;
          hi -= reach;
        } else {
          lo = hi = (lo + hi) / 2;
        }
      }
      p.center.push_back(lo + static_cast<long>(unit(rng) * static_cast<double>(hi - lo + 1)) % (hi - lo + 1));
    }

    std::vector<double> phi = bump_values(u, p);
    // Variations are compactly supported inside the box: Dirichlet data stays fixed.
    for (std::size_t j = 0; j < phi.size(); ++j) {
      if (stencil.box_end[j]) phi[j] = 0.0;
    }
    const Region region = bump_region(u, p);
    const detail::NodeSet nodes = detail::region_nodes(u, region);
    const double base = detail::energy(u.values(), stencil, nodes, f);
    const double change = detail::energy_change(u.values(), stencil, nodes, phi, f);
    const double tol = 1e-9 * (1.0 + std::abs(base));
    const double decrease = -change;
    if (decrease > tol) ++report.failures;
    if (decrease > report.worst_decrease) {
      report.worst_decrease = decrease;
      report.worst_trial = t;
      report.witness = p;
      report.witness_tolerance = tol;
    }
  }
  return report;
}

}  // namespace pmlab
