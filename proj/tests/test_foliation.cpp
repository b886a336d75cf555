#include <cmath>

#include "doctest.h"
#include "pmlab/errors.hpp"
#include "pmlab/foliation.hpp"
#include "pmlab/heteroclinic.hpp"
#include "pmlab/minimize.hpp"

using namespace pmlab;

namespace {

FoliationFamily small_family(double lo = -2.0, double hi = 2.0, std::size_t count = 21, bool verify = false) {
  FamilyOptions o;
  o.verify_members = verify;
  return build_family({1.0, 0.0}, lo, hi, count, {}, o);
}

}  // namespace

TEST_CASE("leaves are closed-form fronts") {
  const FoliationFamily fam = small_family();
  CHECK(fam.members.size() == 21);
  CHECK(fam.b_grid.front() == -2.0);
  CHECK(fam.b_grid.back() == 2.0);
  const Field& v = fam.members[5];
  const double b = fam.b_grid[5];
  for (std::size_t j = 0; j < v.size(); j += 37) {
    const IntVec g = v.global_index(j);
    CHECK(v.values()[j] == doctest::Approx(logistic_profile(g[0] / 10.0 - b)).epsilon(1e-15));
  }
  CHECK(fam.invariants.t == 2);
  CHECK(fam.invariants.a[0] == Vec{0, 0, 1});
  CHECK(fam.invariants.a[1] == Vec{-1, 0, 0});
}

TEST_CASE("integer parameter shifts are translations") {
  const FoliationFamily fam = small_family();
  const Field moved = translate(fam.member(0.0), {{2, 0}, 0});
  const Field target = fam.member(2.0);
  std::size_t compared = 0;
  for_each_difference(moved, target, [&](std::span<const long> g, double d) {
    if (g[0] < -180 || g[0] > 200) return;
    ++compared;
    CHECK(d == 0.0);
  });
  CHECK(compared > 0);
}

TEST_CASE("leaves decrease strictly in b") {
  const FoliationFamily fam = small_family();
  for (std::size_t i = 1; i < fam.members.size(); ++i) {
    const OrderRelation r = compare(fam.members[i], fam.members[i - 1]);
    CHECK(r.order == Order::less);
    CHECK(r.margin > 0.0);
  }
}

TEST_CASE("member checks") {
  const FoliationFamily fam = small_family(-1.0, 1.0, 5, true);
  CHECK(fam.verified());
  REQUIRE(fam.checks.size() == 5);
  // h = 0.1: the closed form misses the discrete equation by O(h^2).
  for (const auto& c : fam.checks) {
    CHECK(c.residual < 1e-3);
    CHECK(c.minimal);
  }
}

TEST_CASE("foliation verification") {
  const FoliationFamily fam = small_family();
  const FoliationReport r = verify_foliation(fam);
  CHECK(r.passed);
  CHECK(r.disjoint);
  CHECK(r.bounded);
  CHECK(r.covered);
  CHECK(r.worst_level_error <= 1e-6);

  // Bisection still reaches every level with a leaf removed.
  const FoliationReport gap = verify_foliation(without_member(fam, 10));
  CHECK(gap.passed);

  FamilyOptions o;
  o.verify_members = false;
  const FoliationFamily twice = build_family({1.0, 0.0}, {0.0, 0.5, 0.5, 1.0}, {}, o);
  const FoliationReport dup = verify_foliation(twice);
  CHECK_FALSE(dup.passed);
  CHECK_FALSE(dup.disjoint);
  REQUIRE(dup.overlap.has_value());
  CHECK(dup.overlap->first == 1);
}

TEST_CASE("family preconditions") {
  CHECK_THROWS_AS(build_family({1.0, 1.0}, -1.0, 1.0, 5), PreconditionError);
  FamilyOptions o;
  o.verify_members = false;
  CHECK_THROWS_AS(verify_foliation(build_family({1.0, 0.0}, {1.0, 0.0}, {}, o)), PreconditionError);
  CHECK_THROWS_AS(without_member(small_family(), 99), PreconditionError);
}

TEST_CASE("family along the second axis") {
  FamilyOptions o;
  o.verify_members = false;
  const FoliationFamily fam = build_family({0.0, 1.0}, -1.0, 1.0, 5, {}, o);
  CHECK(fam.axis == 1);
  CHECK(fam.invariants.a[1] == Vec{0, -1, 0});
  CHECK(verify_foliation(fam).passed);
}

TEST_CASE("rigidity after a small perturbation") {
  const FoliationFamily fam = small_family();
  const Field v = fam.member(0.37);
  Perturbation p;
  p.center = {4, 3};
  p.radius = 2.0;
  p.amplitude = 0.01;
  const std::vector<double> bump = bump_values(v, p);
  std::vector<double> w(v.values().begin(), v.values().end());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] += bump[j];
  const RelaxResult r = relax(v.with_values(w), allen_cahn(2));
  REQUIRE(r.converged);
  const MatchResult m = rigidity_check(r.field, fam, 1e-3);
  CHECK(m.matched());
  CHECK(m.sup_error < 1e-3);
  CHECK(std::abs(m.b0 - 0.37) < 0.1);
}

TEST_CASE("rigidity refuses a front with another direction") {
  const FoliationFamily fam = small_family();
  FamilyOptions o;
  o.verify_members = false;
  const Field other = build_family({0.0, 1.0}, {0.37, 0.5}, {}, o).members.front();
  const MatchResult m = rigidity_check(other, fam, 1e-3);
  CHECK(m.status == MatchStatus::not_applicable);
  CHECK_FALSE(m.hypothesis.empty());
}

TEST_CASE("rigidity refuses the pure phases") {
  const FoliationFamily fam = small_family();
  const MatchResult m = rigidity_check(fam.upper, fam, 1e-3);
  CHECK(m.status == MatchStatus::not_applicable);
}

TEST_CASE("envelopes do not depend on the leaf") {
  const FoliationFamily fam = small_family(-1.0, 1.0, 5);
  const EnvelopeIdentityReport r = envelope_identity_check(fam, 1e-6);
  CHECK(r.passed);
  CHECK(r.samples.size() == 5);
  const FoliationFamily sub = small_family(0.2, 0.6, 3);
  const EnvelopeResult a = envelope(fam.members[0], fam.invariants, Sign::plus);
  const EnvelopeResult b = envelope(sub.members[2], sub.invariants, Sign::plus);
  // Limits sit on the clamped box edge, u0(L - b), so they differ by O(e^-L).
  CHECK(sup_distance(a.field, b.field) < 1e-8);
}

TEST_CASE("asymptotic limits of a leaf") {
  const FoliationFamily fam = small_family();
  const Field& v = fam.members[12];
  const std::vector<IntVec> gamma2 = {{1, 0, 0}, {0, 1, 0}};
  const AsymptoticResult up = asymptotic_limit(v, fam, gamma2, {-1, 0, 0});
  CHECK(up.classification == LimitClass::upper);
  const AsymptoticResult down = asymptotic_limit(v, fam, gamma2, {1, 0, 0});
  CHECK(down.classification == LimitClass::lower);
  const AsymptoticResult same = asymptotic_limit(v, fam, gamma2, {0, 1, 0});
  CHECK(same.classification == LimitClass::member);
  REQUIRE(same.match.has_value());
  CHECK(same.match->b0 == doctest::Approx(fam.b_grid[12]).epsilon(1e-6));
  CHECK(same.value_change == 0.0);
  CHECK_THROWS_AS(asymptotic_limit(v, fam, {{1, 0, 0}}, {0, 1, 0}), PreconditionError);
}

TEST_CASE("gradient distance") {
  const FoliationFamily fam = small_family();
  CHECK(sup_gradient_distance(fam.members[0], fam.members[0]) == 0.0);
  CHECK(sup_gradient_distance(fam.members[0], fam.members[5]) > 0.0);
}
