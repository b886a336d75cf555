#include "pmlab/foliation.hpp"

#include <algorithm>
#include <cmath>

#include "pmlab/errors.hpp"
#include "pmlab/heteroclinic.hpp"
#include "pmlab/lattice.hpp"
#include "pmlab/minimize.hpp"

namespace pmlab {

namespace {

constexpr std::size_t kBisectionSteps = 200;

/// b with v_b(x) = level; v_b(x) is strictly decreasing in b.
double solve_for_b(const FoliationFamily& fam, std::span<const long> node, double level, double lo, double hi,
                   std::size_t* extensions = nullptr) {
  double step = 1.0;
  for (int i = 0; i < 64 && fam.value(lo, node) < level; ++i, step *= 2.0) {
    lo -= step;
    if (extensions) ++*extensions;
  }
  step = 1.0;
  for (int i = 0; i < 64 && fam.value(hi, node) > level; ++i, step *= 2.0) {
    hi += step;
    if (extensions) ++*extensions;
  }
  for (std::size_t i = 0; i < kBisectionSteps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (fam.value(mid, node) > level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double el = std::abs(fam.value(lo, node) - level);
  const double eh = std::abs(fam.value(hi, node) - level);
  return el <= eh ? lo : hi;
}

IntVec window_centre(const Field& u) {
  IntVec x;
  for (const auto& a : u.axes()) x.push_back(a.is_box() ? a.first + (a.count - 1) / 2 : a.first + a.count / 2);
  return x;
}

}  // namespace

std::vector<Axis> FoliationFamily::layout() const {
  std::vector<Axis> axes;
  for (std::size_t i = 0; i < grid.dimension; ++i) {
    if (i == axis) {
      axes.push_back(Axis::box(-grid.half_length, grid.half_length, grid.resolution));
    } else {
      axes.push_back(Axis::periodic(1, grid.resolution, 0));
    }
  }
  return axes;
}

double FoliationFamily::value(double b, std::span<const long> global) const {
  const Axis box = Axis::box(-grid.half_length, grid.half_length, grid.resolution);
  const long g = std::clamp(global[axis], box.first, box.first + box.count - 1);
  const auto m = static_cast<double>(grid.resolution);
  // Computed as (sign g - b m) / m so that integer b reproduces translated leaves bit for bit.
  return logistic_profile((static_cast<double>(sign * g) - b * m) / m);
}

Field FoliationFamily::member(double b) const {
  Field layout_field = Field::constant(layout(), 0.0);
  std::vector<double> values(layout_field.size());
  for (std::size_t flat = 0; flat < values.size(); ++flat) values[flat] = value(b, layout_field.global_index(flat));
  return layout_field.with_values(std::move(values));
}

bool FoliationFamily::verified() const {
  return std::all_of(checks.begin(), checks.end(), [](const MemberCheck& c) { return c.minimal; });
}

FoliationFamily build_family(const Vec& omega, double b_min, double b_max, std::size_t count, const FamilyGrid& grid,
                             const FamilyOptions& options) {
  if (count < 2) throw PreconditionError("family needs at least two members");
  if (!(b_min < b_max)) throw PreconditionError("family needs b_min < b_max");
  std::vector<double> b_grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    b_grid[i] = b_min + (b_max - b_min) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return build_family(omega, std::move(b_grid), grid, options);
}

FoliationFamily build_family(const Vec& omega, std::vector<double> b_grid, const FamilyGrid& grid,
                             const FamilyOptions& options) {
  if (omega.size() != grid.dimension) throw PreconditionError("omega has the wrong dimension");
  if (grid.dimension < 1) throw PreconditionError("family needs n >= 1");
  std::size_t nonzero = 0, axis = 0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (!std::isfinite(omega[i])) throw PreconditionError("omega must be finite");
    if (omega[i] != 0.0) {
      ++nonzero;
      axis = i;
    }
  }
  if (nonzero == 0) throw PreconditionError("omega must be nonzero");
  if (nonzero > 1) {
    throw PreconditionError("grid incompatible with omega: only coordinate directions are representable");
  }
  if (b_grid.empty()) throw PreconditionError("family needs at least one member");

  FoliationFamily fam;
  fam.grid = grid;
  fam.axis = axis;
  fam.sign = omega[axis] > 0.0 ? 1 : -1;
  fam.omega.assign(grid.dimension, 0.0);
  fam.omega[axis] = fam.sign;
  fam.b_grid = std::move(b_grid);
  const std::vector<Axis> axes = fam.layout();
  fam.lower = Field::constant(axes, 0.0);
  fam.upper = Field::constant(axes, 1.0);
  for (double b : fam.b_grid) fam.members.push_back(fam.member(b));

  const std::size_t d = grid.dimension + 1;
  Vec e(d, 0.0), a2(d, 0.0);
  e[grid.dimension] = 1.0;
  for (std::size_t i = 0; i < grid.dimension; ++i) a2[i] = -fam.omega[i];
  fam.invariants.t = 2;
  fam.invariants.a = {e, a2};
  std::vector<IntVec> identity;
  for (std::size_t i = 0; i < d; ++i) {
    IntVec k(d, 0);
    k[i] = 1;
    identity.push_back(k);
  }
  fam.invariants.gamma_bases = {identity, lattice_in_orthocomplement({e}, d, 1),
                                lattice_in_orthocomplement({e, a2}, d, 1)};

  if (options.verify_members) {
    const Integrand f = allen_cahn(grid.dimension);
    for (std::size_t i = 0; i < fam.members.size(); ++i) {
      const Field& v = fam.members[i];
      MemberCheck c;
      c.b = fam.b_grid[i];
      const Field r = euler_lagrange_residual(v, f);
      for (double x : r.values()) c.residual = std::max(c.residual, std::abs(x));
      c.minimal = c.residual <= options.residual_bound &&
                  minimality_spot_check(v, f, options.spot_trials, options.spot_radius, options.seed + i).passed();
      fam.checks.push_back(c);
    }
  }
  return fam;
}

FoliationFamily without_member(const FoliationFamily& fam, std::size_t index) {
  if (index >= fam.members.size()) throw PreconditionError("member index out of range");
  FoliationFamily out = fam;
  out.b_grid.erase(out.b_grid.begin() + static_cast<long>(index));
  out.members.erase(out.members.begin() + static_cast<long>(index));
  if (index < out.checks.size()) out.checks.erase(out.checks.begin() + static_cast<long>(index));
  return out;
}

FoliationReport verify_foliation(const FoliationFamily& fam, double tol) {
  if (fam.members.empty()) throw PreconditionError("family is empty");
  if (!(tol > 0.0 && tol < 0.25)) throw PreconditionError("foliation tolerance must lie in (0, 1/4)");
  if (fam.members.size() != fam.b_grid.size()) throw PreconditionError("family members and b grid differ in size");
  for (std::size_t i = 1; i < fam.b_grid.size(); ++i) {
    if (fam.b_grid[i] < fam.b_grid[i - 1]) throw PreconditionError("non-monotone family: b grid decreases");
  }

  FoliationReport report;
  report.bounded = true;
  for (const auto& v : fam.members) {
    const OrderRelation lo = compare(fam.lower, v, tol);
    const OrderRelation hi = compare(v, fam.upper, tol);
    if (lo.order != Order::less || lo.max_above >= 0.0 || hi.order != Order::less || hi.max_above >= 0.0) {
      report.bounded = false;
    }
  }

  report.disjoint = true;
  for (std::size_t i = 0; i + 1 < fam.members.size(); ++i) {
    // Larger b, lower leaf.
    OrderRelation r = compare(fam.members[i + 1], fam.members[i], tol);
    ++report.pairs_checked;
    if (r.order != Order::less || !(r.max_above < 0.0)) {
      report.disjoint = false;
      report.overlap = std::pair{i, i + 1};
      report.overlap_relation = std::move(r);
      report.message = "members " + std::to_string(i) + " and " + std::to_string(i + 1) + " are not strictly ordered";
      break;
    }
  }

  const std::vector<double> levels = {1.5 * tol, 1e-3, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0 - 1e-3,
                                      1.0 - 1.5 * tol};
  report.covered = true;
  const Field& first = fam.members.front();
  const IntVec centre = window_centre(first);
  std::vector<double> column(fam.members.size());
  for (std::size_t flat = 0; flat < first.size() && report.covered; ++flat) {
    const IntVec g = first.global_index(flat);
    for (std::size_t i = 0; i < fam.members.size(); ++i) column[i] = fam.members[i].at(g);
    for (std::size_t i = 1; i < column.size(); ++i) {
      if (fam.b_grid[i] > fam.b_grid[i - 1] && !(column[i] < column[i - 1])) {
        report.covered = false;
        report.message = "b -> v_b(x) is not strictly decreasing at node " + std::to_string(flat);
      }
    }
    for (double level : levels) {
      double lo = fam.b_grid.front(), hi = fam.b_grid.back();
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        if (column[i] >= level && column[i + 1] <= level) {
          lo = fam.b_grid[i];
          hi = fam.b_grid[i + 1];
          break;
        }
      }
      const double b = solve_for_b(fam, g, level, lo, hi, &report.bracket_extensions);
      const double error = std::abs(fam.value(b, g) - level);
      ++report.levels_checked;
      report.worst_level_error = std::max(report.worst_level_error, error);
      if (error > tol) {
        report.covered = false;
        report.message = "no leaf reaches level " + std::to_string(level) + " at node " + std::to_string(flat);
      }
      if (g == centre) report.samples.push_back({g, level, b, error});
    }
  }
  report.passed = report.disjoint && report.bounded && report.covered;
  return report;
}

std::string to_string(MatchStatus status) {
  switch (status) {
    case MatchStatus::matched: return "MATCHED";
    case MatchStatus::not_matched: return "NOT_MATCHED";
    case MatchStatus::not_applicable: return "NOT_APPLICABLE";
  }
  return "?";
}

MatchResult rigidity_check(const Field& u, const FoliationFamily& fam, double tol, long radius) {
  MatchResult result;
  try {
    const OrderRelation lo = compare(fam.lower, u);
    const OrderRelation hi = compare(u, fam.upper);
    if (lo.order != Order::less || hi.order != Order::less) {
      result.hypothesis = "u1 < u < u2 fails (" + to_string(lo.order) + ", " + to_string(hi.order) + ")";
      return result;
    }
    result.invariants = extract_invariants(u, radius);
  } catch (const Error& e) {
    result.hypothesis = std::string("hypotheses could not be checked: ") + e.what();
    return result;
  }
  const auto& mine = result.invariants->a;
  const auto& theirs = fam.invariants.a;
  const std::size_t t = fam.invariants.t;
  if (mine.size() < t || !same_directions({mine.begin(), mine.begin() + static_cast<long>(t - 1)},
                                          {theirs.begin(), theirs.begin() + static_cast<long>(t - 1)})) {
    result.hypothesis = "a_i(u) differs from the family for some i < t";
    return result;
  }
  if (mine.size() != t || !same_directions(mine, theirs)) {
    result.hypothesis = "a_t(u) differs from the family's a_t";
    return result;
  }

  result.reference = window_centre(u);
  const double y = u.at(result.reference);
  result.b0 = solve_for_b(fam, result.reference, y, fam.b_grid.front(), fam.b_grid.back());
  const Field v = fam.member(result.b0);
  result.sup_error = sup_distance(u, v);
  result.relation = compare(u, v, tol);
  result.status = result.sup_error <= tol ? MatchStatus::matched : MatchStatus::not_matched;
  return result;
}

EnvelopeIdentityReport envelope_identity_check(const FoliationFamily& fam, double tol, std::size_t steps,
                                               long radius) {
  if (fam.members.empty()) throw PreconditionError("family is empty");
  EnvelopeIdentityReport report;
  report.passed = true;
  for (std::size_t i = 0; i < fam.members.size(); ++i) {
    const Field& v = fam.members[i];
    const InvariantSystem sys = extract_invariants(v, radius);
    if (sys.t < 2) throw PreconditionError("member " + std::to_string(i) + " has t < 2");
    const EnvelopeResult lo = envelope(v, sys, Sign::minus, steps, tol, radius);
    const EnvelopeResult hi = envelope(v, sys, Sign::plus, steps, tol, radius);
    EnvelopeSample s;
    s.b = fam.b_grid[i];
    s.lower_error = sup_distance(lo.field, fam.lower);
    s.upper_error = sup_distance(hi.field, fam.upper);
    s.invariants_match = lo.invariants_match && hi.invariants_match;
    report.worst = std::max({report.worst, s.lower_error, s.upper_error});
    if (s.lower_error > tol || s.upper_error > tol || !s.invariants_match) report.passed = false;
    report.samples.push_back(s);
  }
  return report;
}

std::string to_string(LimitClass c) {
  switch (c) {
    case LimitClass::lower: return "u1";
    case LimitClass::upper: return "u2";
    case LimitClass::member: return "member";
    case LimitClass::unclassified: return "UNCLASSIFIED";
    case LimitClass::not_found: return "not_found";
  }
  return "?";
}

double sup_gradient_distance(const Field& u, const Field& v) {
  if (u.axes() != v.axes()) throw PreconditionError("gradient distance needs identical layouts");
  double sup = 0.0;
  for (std::size_t flat = 0; flat < u.size(); ++flat) {
    IntVec g = u.global_index(flat);
    const double base = u.at(g) - v.at(g);
    for (std::size_t i = 0; i < u.dimension(); ++i) {
      const Axis& a = u.axis(i);
      if (a.is_box() && g[i] + 1 >= a.first + a.count) continue;
      ++g[i];
      const double next = u.at(g) - v.at(g);
      --g[i];
      sup = std::max(sup, std::abs(next - base) * static_cast<double>(a.resolution));
    }
  }
  return sup;
}

AsymptoticResult asymptotic_limit(const Field& u, const FoliationFamily& fam, const std::vector<IntVec>& gamma2_basis,
                                  const IntVec& direction, std::size_t steps, double tol, long radius) {
  if (direction.size() != u.dimension() + 1) throw PreconditionError("direction must lie in Z^{n+1}");
  if (!in_lattice(direction, gamma2_basis)) throw PreconditionError("direction is not in the given lattice");
  if (steps < 1) throw PreconditionError("asymptotic search needs at least one step");

  const TranslationVector step = TranslationVector::from_lattice(direction);
  std::vector<Field> iterates;
  iterates.push_back(resample_on(u, u));
  TranslationVector total = TranslationVector::from_lattice(IntVec(direction.size(), 0));
  for (std::size_t m = 1; m <= steps; ++m) {
    total = total + step;
    iterates.push_back(resample_on(translate(u, total), u));
  }

  AsymptoticResult result;
  result.steps = steps;
  const Field& last = iterates.back();
  const Field& before = iterates[iterates.size() - 2];
  result.value_change = sup_distance(last, before);
  result.gradient_change = sup_gradient_distance(last, before);
  result.limit = last;
  if (!(result.value_change < tol && result.gradient_change < tol)) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < iterates.size(); ++i) {
      for (std::size_t j = i + 1; j < iterates.size(); ++j) {
        const double d = sup_distance(iterates[i], iterates[j]);
        if (d < best) {
          best = d;
          result.closest = std::pair{i, j};
        }
      }
    }
    result.closest_distance = best;
    result.classification = LimitClass::not_found;
    return result;
  }
  result.lower_distance = sup_distance(last, fam.lower);
  result.upper_distance = sup_distance(last, fam.upper);
  if (result.lower_distance <= tol) {
    result.classification = LimitClass::lower;
  } else if (result.upper_distance <= tol) {
    result.classification = LimitClass::upper;
  } else {
    result.match = rigidity_check(last, fam, tol, radius);
    result.classification = result.match->matched() ? LimitClass::member : LimitClass::unclassified;
  }
  return result;
}

}  // namespace pmlab
