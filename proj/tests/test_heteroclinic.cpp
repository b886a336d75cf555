#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "pmlab/errors.hpp"
#include "pmlab/heteroclinic.hpp"

using namespace pmlab;

TEST_CASE("logistic profile values and tails") {
  CHECK(logistic_profile(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(logistic_profile(0.0) == 0.5);
  CHECK(logistic_profile(-20.0) < 1e-8);
  CHECK(1.0 - logistic_profile(20.0) < 1e-8);
  CHECK(logistic_profile(-800.0) >= 0.0);
  CHECK(logistic_profile(800.0) == 1.0);
  // First integral u' = u (1 - u).
  for (double t = -10.0; t <= 10.0; t += 0.37) {
    const double e = 1e-5;
    const double du = (logistic_profile(t + e) - logistic_profile(t - e)) / (2 * e);
    const double u = logistic_profile(t);
    CHECK(du == doctest::Approx(u * (1 - u)).epsilon(1e-8));
  }
}

TEST_CASE("closed form satisfies the discrete ODE to second order") {
  for (double h : {0.05, 0.02, 0.01}) {
    const Profile1D p = Profile1D::closed_form(20.0, h);
    double worst = 0.0;
    for (std::size_t j = 1; j + 1 < p.size(); ++j) {
      const double u = p.values[j];
      const double d2 = (p.values[j + 1] - 2 * u + p.values[j - 1]) / (h * h);
      worst = std::max(worst, std::abs(d2 - (u - 3 * u * u + 2 * u * u * u)));
    }
    CHECK(worst / (h * h) < 0.1);
  }
}

TEST_CASE("Newton solve matches the closed form at second order") {
  const Profile1D coarse = solve_heteroclinic_bvp(20.0, 0.01);
  const Profile1D fine = solve_heteroclinic_bvp(20.0, 0.005);
  CHECK(coarse.source == Profile1D::Source::bvp);
  CHECK(profile_residual(coarse) <= 1e-8);
  const double e1 = logistic_error(coarse), e2 = logistic_error(fine);
  CHECK(e1 <= 5e-4);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e1 / e2 <= 4.5);
  CHECK(profile_energy(coarse) == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
  CHECK(std::abs(profile_center(coarse)) < 1e-8);
  for (std::size_t j = 1; j < coarse.size(); ++j) CHECK(coarse.values[j] > coarse.values[j - 1]);
}

TEST_CASE("Newton preconditions") {
  CHECK_THROWS_AS(solve_heteroclinic_bvp(5.0, 0.01), PreconditionError);
  CHECK_THROWS_AS(solve_heteroclinic_bvp(20.0, 0.2), PreconditionError);
}

TEST_CASE("equipartition residual") {
  CHECK(equipartition_residual(Profile1D::closed_form(20.0, 0.01)) <= 1e-3);
  Profile1D ramp;
  ramp.half_length = 20.0;
  ramp.spacing = 0.01;
  for (std::size_t j = 0; j <= 4000; ++j) ramp.values.push_back(static_cast<double>(j) / 4000.0);
  // Slope 1/40 against the well's peak 1/16.
  CHECK(equipartition_residual(ramp) == doctest::Approx(0.0625 - 1.0 / 1600.0).epsilon(1e-3));
  Profile1D flat = ramp;
  flat.values.assign(flat.values.size(), 0.5);
  CHECK_THROWS_AS(equipartition_residual(flat), PreconditionError);
}

TEST_CASE("profile center and shifted error") {
  Profile1D p = Profile1D::closed_form(20.0, 0.01);
  for (std::size_t j = 0; j < p.size(); ++j) p.values[j] = logistic_profile(p.node(j) - 0.25);
  CHECK(profile_center(p) == doctest::Approx(0.25).epsilon(1e-4));
  CHECK(logistic_error(p, 0.25) < 1e-14);
  CHECK(logistic_error(p) > 0.05);
}

TEST_CASE("interpolation and field round trip") {
  const Profile1D p = Profile1D::closed_form(10.0, 0.1);
  CHECK(p.at(-100.0) == p.values.front());
  CHECK(p.at(0.05) == doctest::Approx(0.5 * (p.values[100] + p.values[101])));
  const Profile1D q = Profile1D::from_field(p.to_field());
  CHECK(q.values == p.values);
  CHECK(q.half_length == 10.0);
}

TEST_CASE("profile CSV round trip") {
  const auto path = std::filesystem::temp_directory_path() / "pmlab_profile_test.csv";
  const Profile1D p = Profile1D::closed_form(10.0, 0.05);
  write_profile(path, p);
  const Profile1D q = read_profile(path);
  CHECK(q.values == p.values);
  CHECK(q.spacing == doctest::Approx(p.spacing).epsilon(1e-14));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_profile(path), IoError);
}
