#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmlab/field.hpp"
#include "pmlab/integrand.hpp"
#include "pmlab/orbit.hpp"

namespace pmlab {

/// Layout of family members: a box [-L, L] along the front normal, unit
/// periodic cells (zero slope) along the other axes.
struct FamilyGrid {
  std::size_t dimension = 2;
  double half_length = 20.0;
  long resolution = 10;
};

struct MemberCheck {
  double b = 0.0;
  double residual = 0.0;
  bool minimal = false;
};

/// Leaves v_b(x) = u0(omega . x - b) of the Allen–Cahn slab foliation between
/// u1 = 0 and u2 = 1.  v_b is strictly decreasing in b.
struct FoliationFamily {
  Vec omega;
  std::size_t axis = 0;
  int sign = 1;
  FamilyGrid grid;
  std::vector<double> b_grid;
  std::vector<Field> members;
  Field lower;
  Field upper;
  /// Invariants shared by every leaf: (e_{n+1}, (-omega, 0)).
  InvariantSystem invariants;
  std::vector<MemberCheck> checks;

  /// Layout shared by members and bounding fields.
  std::vector<Axis> layout() const;
  /// Leaf for any real b (sampled from the closed form).
  Field member(double b) const;
  /// v_b at a global node (box clamping along the front normal).
  double value(double b, std::span<const long> global) const;
  /// Every leaf passed the residual and minimality checks.
  bool verified() const;
};

struct FamilyOptions {
  bool verify_members = true;
  double residual_bound = 1e-3;
  std::size_t spot_trials = 20;
  double spot_radius = 2.0;
  std::uint64_t seed = 1;
};

/// omega must be a nonzero multiple of a coordinate vector; other directions
/// are not representable on the axis-aligned grid.
FoliationFamily build_family(const Vec& omega, double b_min, double b_max, std::size_t count,
                             const FamilyGrid& grid = {}, const FamilyOptions& options = {});
/// Family on an explicit parameter list (non-decreasing; duplicates allowed so
/// that verify_foliation can reject them).
FoliationFamily build_family(const Vec& omega, std::vector<double> b_grid, const FamilyGrid& grid = {},
                             const FamilyOptions& options = {});

/// Removes member `index` (b value and field) from the family.
FoliationFamily without_member(const FoliationFamily& fam, std::size_t index);

struct CoverageSample {
  IntVec node;
  double level = 0.0;
  double b = 0.0;
  double error = 0.0;
};

struct FoliationReport {
  bool passed = false;
  bool disjoint = false;
  bool bounded = false;
  bool covered = false;
  std::size_t pairs_checked = 0;
  /// First consecutive pair (indices) that is not strictly ordered.
  std::optional<std::pair<std::size_t, std::size_t>> overlap;
  OrderRelation overlap_relation;
  std::size_t levels_checked = 0;
  std::size_t bracket_extensions = 0;
  double worst_level_error = 0.0;
  std::vector<CoverageSample> samples;
  std::string message;
};

/// (a) consecutive leaves strictly ordered (compare = LESS and a positive gap
/// at every node), all leaves strictly between u1 and u2; (b) every sampled
/// level in (tol, 1 - tol) at every node is hit by a leaf found by bisection in b.
FoliationReport verify_foliation(const FoliationFamily& fam, double tol = 1e-6);

enum class MatchStatus { matched, not_matched, not_applicable };
std::string to_string(MatchStatus status);

struct MatchResult {
  MatchStatus status = MatchStatus::not_applicable;
  double b0 = 0.0;
  double sup_error = 0.0;
  IntVec reference;
  std::string hypothesis;
  OrderRelation relation;  ///< compare(u, v_{b0}) when a candidate was found
  std::optional<InvariantSystem> invariants;

  bool matched() const { return status == MatchStatus::matched; }
};

/// Locates b0 with v_{b0}(x*) = u(x*) at the window centre x* and reports
/// sup |u - v_{b0}|.  Hypotheses (u1 < u < u2, invariants equal to the
/// family's) are checked first; a failure is NOT_APPLICABLE naming it.
MatchResult rigidity_check(const Field& u, const FoliationFamily& fam, double tol, long radius = 3);

struct EnvelopeSample {
  double b = 0.0;
  double lower_error = 0.0;
  double upper_error = 0.0;
  bool invariants_match = false;
};

struct EnvelopeIdentityReport {
  bool passed = false;
  double worst = 0.0;
  std::vector<EnvelopeSample> samples;
};

/// For each member: sup distance of its envelopes to u1 and u2.
EnvelopeIdentityReport envelope_identity_check(const FoliationFamily& fam, double tol = 1e-6,
                                               std::size_t steps = 40, long radius = 3);

enum class LimitClass { lower, upper, member, unclassified, not_found };
std::string to_string(LimitClass c);

struct AsymptoticResult {
  Field limit;
  LimitClass classification = LimitClass::not_found;
  std::size_t steps = 0;
  double value_change = 0.0;     ///< last successive sup distance
  double gradient_change = 0.0;  ///< last successive sup distance of forward differences
  double lower_distance = 0.0;
  double upper_distance = 0.0;
  std::optional<MatchResult> match;
  /// Closest pair of iterates when no Cauchy tail was found.
  std::optional<std::pair<std::size_t, std::size_t>> closest;
  double closest_distance = 0.0;
};

/// Iterates T_{m k} u on u's window (k = direction, required to lie in the
/// lattice spanned by gamma2_basis) and classifies the limit as u1, u2, a
/// leaf, or unclassified.  A negative search is reported as not_found.
AsymptoticResult asymptotic_limit(const Field& u, const FoliationFamily& fam,
                                  const std::vector<IntVec>& gamma2_basis, const IntVec& direction,
                                  std::size_t steps = 40, double tol = 1e-6, long radius = 3);

/// sup over the joint window of the forward differences of u - v.
double sup_gradient_distance(const Field& u, const Field& v);

}  // namespace pmlab
