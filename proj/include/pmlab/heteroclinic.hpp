#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pmlab/field.hpp"

namespace pmlab {

/// u0(t) = 1 / (1 + e^{-t}), the monotone connection between the pure phases
/// 0 and 1 of the Allen–Cahn well.  Evaluated without cancellation in both tails.
double logistic_profile(double t);

/// Samples of a 1-D profile on the nodes t_j = -L + j h, j = 0..2L/h.
struct Profile1D {
  enum class Source { closed_form, bvp, relaxed, file };

  double half_length = 0.0;
  double spacing = 0.0;
  std::vector<double> values;
  Source source = Source::closed_form;

  std::size_t size() const { return values.size(); }
  double node(std::size_t j) const { return -half_length + static_cast<double>(j) * spacing; }
  /// Piecewise linear interpolation, constant beyond the ends.
  double at(double t) const;

  /// 1-D box field on [-L, L].
  Field to_field() const;

  static Profile1D closed_form(double half_length, double spacing);
  /// Accepts a 1-D field whose single axis is a box symmetric about 0.
  static Profile1D from_field(const Field& u, Source source = Source::relaxed);
};

std::string to_string(Profile1D::Source source);

struct BvpOptions {
  double residual_tolerance = 1e-10;
  std::size_t max_iterations = 200;
};

/// Solves -2 u'' + W'(u) = 0 on the grid by damped Newton, with u(-L), u(L)
/// fixed at the closed-form tail values and u(0) = 1/2.  The answer is the
/// discrete heteroclinic that relax also targets, reached along an unrelated path.
Profile1D solve_heteroclinic_bvp(double half_length, double spacing, const BvpOptions& options = {});

/// Sup norm of -2 u'' + W'(u) over interior nodes (second differences).
double profile_residual(const Profile1D& p);

/// sup over interior nodes of |u'^2 - W(u)| with central-difference u'.
double equipartition_residual(const Profile1D& p);

/// Discrete Allen–Cahn energy of the profile on [-L, L].
double profile_energy(const Profile1D& p);

/// Shift c with u(c) = 1/2 (linear interpolation between bracketing nodes).
double profile_center(const Profile1D& p);

/// sup_j |u(t_j) - u0(t_j - shift)|.
double logistic_error(const Profile1D& p, double shift = 0.0);

/// CSV with header "t,u".
void write_profile(const std::filesystem::path& csv, const Profile1D& p);
Profile1D read_profile(const std::filesystem::path& csv);

}  // namespace pmlab
