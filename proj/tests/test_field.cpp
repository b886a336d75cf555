#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "pmlab/errors.hpp"
#include "pmlab/field.hpp"
#include "pmlab/heteroclinic.hpp"

using namespace pmlab;

namespace {

Field random_field(std::mt19937_64& rng, std::size_t n, long rise_limit = 2) {
  std::uniform_int_distribution<long> res(4, 6), rise(-rise_limit, rise_limit);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  std::vector<Axis> axes;
  for (std::size_t i = 0; i < n; ++i) axes.push_back(Axis::periodic(1, res(rng), rise(rng)));
  std::vector<double> v(Field::constant(axes, 0.0).size());
  for (double& x : v) x = val(rng);
  return Field(axes, v, 0);
}

TranslationVector random_shift(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<long> d(-4, 4);
  TranslationVector k;
  for (std::size_t i = 0; i < n; ++i) k.shift.push_back(d(rng));
  k.lift = d(rng);
  return k;
}

}  // namespace

TEST_CASE("axis construction and lookup") {
  const Axis p = Axis::periodic(2, 4, 1);
  CHECK(p.count == 8);
  CHECK(p.slope() == Rational::make(1, 2));
  // Node 9 is node 1 of the next cell, lifted by the rise.
  const Axis::Site s = p.locate(9);
  CHECK(s.local == 1);
  CHECK(s.lift == 1);
  CHECK(p.locate(-1).local == 7);
  CHECK(p.locate(-1).lift == -1);

  const Axis b = Axis::box(-1.0, 1.0, 4);
  CHECK(b.count == 9);
  CHECK(b.first == -4);
  CHECK(b.locate(-100).local == 0);
  CHECK(b.locate(100).local == 8);

  CHECK_THROWS_AS(Axis::periodic(1, 3), PreconditionError);
  CHECK_THROWS_AS(Axis::box(-1.0, 1.05, 10), PreconditionError);
}

TEST_CASE("rational slopes are reduced") {
  CHECK(Rational::make(2, -4).num == -1);
  CHECK(Rational::make(2, -4).den == 2);
  CHECK(Rational::make(0, 5) == Rational::make(0, 1));
}

TEST_CASE("twisted periodic extension") {
  // u(x) = x on a unit cell with rise 1 is the identity line.
  const Field u = Field::sample({Axis::periodic(1, 8, 1)}, [](std::span<const double> x) { return x[0]; });
  for (long g = -20; g <= 20; ++g) {
    const long idx[] = {g};
    CHECK(u.at(idx) == doctest::Approx(g / 8.0).epsilon(1e-15));
  }
}

TEST_CASE("sine crosses zero") {
  const Field u = Field::sample({Axis::periodic(1, 16, 0)}, [](std::span<const double> x) {
    return std::sin(2.0 * std::numbers::pi * x[0]);
  });
  const Field zero = Field::constant(u.axes(), 0.0);
  const OrderRelation r = compare(u, zero, 1e-8);
  CHECK(r.order == Order::crossing);
  CHECK(u.at(r.witness_above) > 1e-8);
  CHECK(u.at(r.witness_below) < -1e-8);
  CHECK(r.max_above == doctest::Approx(1.0));
  CHECK(r.max_below == doctest::Approx(1.0));
}

TEST_CASE("shifted logistic fronts") {
  const std::vector<Axis> axes = {Axis::box(-20.0, 20.0, 100)};
  const Field u = Field::sample(axes, [](std::span<const double> x) { return logistic_profile(x[0]); });
  const Field v = Field::sample(axes, [](std::span<const double> x) { return logistic_profile(x[0] - 0.1); });
  const double expected = 2.0 * (1.0 / (1.0 + std::exp(-0.05)) - 0.5);
  CHECK(sup_distance(u, v) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(compare(v, u).order == Order::less);
  CHECK(compare(u, v).order == Order::greater);
  CHECK(compare(u, u).order == Order::equal);
}

TEST_CASE("one-signed difference below tolerance is EQUAL") {
  const Field u = Field::constant({Axis::periodic(1, 4)}, 0.3);
  const Field v = Field::constant({Axis::periodic(1, 4)}, 0.3 + 1e-10);
  CHECK(compare(u, v).order == Order::equal);
  CHECK(compare(u, v, 1e-12).order == Order::less);
}

TEST_CASE("ordering needs equal slopes") {
  const Field u = Field::constant({Axis::periodic(1, 4, 0)}, 0.0);
  const Field v = Field::constant({Axis::periodic(1, 4, 1)}, 0.0);
  CHECK_THROWS_AS(compare(u, v), OrderingUndefined);
}

TEST_CASE("group action is exact") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const Field u = random_field(rng, n);
    const TranslationVector j = random_shift(rng, n), k = random_shift(rng, n);
    const Field a = translate(translate(u, j), k);
    const Field b = translate(u, j + k);
    for_each_difference(a, b, [](std::span<const long>, double d) { REQUIRE(d == 0.0); });
  }
}

TEST_CASE("order preservation keeps margins") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> up(0.01, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 2;
    const Field u = random_field(rng, n);
    std::vector<double> w(u.values().begin(), u.values().end());
    for (double& x : w) x += up(rng);
    const Field v = u.with_values(w);
    const TranslationVector k = random_shift(rng, n);
    const OrderRelation before = compare(u, v);
    const OrderRelation after = compare(translate(u, k), translate(v, k));
    REQUIRE(before.order == Order::less);
    CHECK(after.order == Order::less);
    CHECK(after.margin == before.margin);
  }
}

TEST_CASE("unit lift lies strictly above") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const Field u = random_field(rng, n);
    TranslationVector one{IntVec(n, 0), 1};
    CHECK(compare(u, translate(u, one)).order == Order::less);
  }
}

TEST_CASE("sup distance is a metric") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial % 2;
    const Field u = random_field(rng, n, 0);
    std::normal_distribution<double> nd;
    auto jitter = [&](const Field& f) {
      std::vector<double> w(f.values().begin(), f.values().end());
      for (double& x : w) x += nd(rng);
      return f.with_values(w);
    };
    const Field v = jitter(u), w = jitter(u);
    CHECK(sup_distance(u, v) == sup_distance(v, u));
    CHECK(sup_distance(u, w) <= sup_distance(u, v) + sup_distance(v, w) + 1e-15);
    CHECK(sup_distance(u, u) == 0.0);
  }
}

TEST_CASE("pointwise min and max") {
  const std::vector<Axis> axes = {Axis::periodic(1, 8)};
  const Field u = Field::sample(axes, [](std::span<const double> x) { return std::sin(2 * std::numbers::pi * x[0]); });
  const Field z = Field::constant(axes, 0.0);
  const Field lo = pointwise_min(u, z), hi = pointwise_max(u, z);
  for (std::size_t j = 0; j < u.size(); ++j) {
    CHECK(lo.values()[j] == std::min(u.values()[j], 0.0));
    CHECK(hi.values()[j] == std::max(u.values()[j], 0.0));
  }
}

TEST_CASE("resampling a translate onto the original window") {
  const std::vector<Axis> axes = {Axis::periodic(1, 8, 1)};
  const Field u = Field::sample(axes, [](std::span<const double> x) { return x[0] + 0.1 * std::sin(2 * std::numbers::pi * x[0]); });
  // T_{(1,1)} fixes u(x) = x + periodic.
  const Field moved = resample_on(translate(u, {{1}, 1}), u);
  CHECK(sup_distance(moved, u) == 0.0);
}
