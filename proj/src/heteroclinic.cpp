#include "pmlab/heteroclinic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pmlab/errors.hpp"
#include "pmlab/field_io.hpp"
#include "pmlab/integrand.hpp"
#include "pmlab/minimize.hpp"

namespace pmlab {

double logistic_profile(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

long resolution_of(double spacing) {
  if (!(spacing > 0.0)) throw PreconditionError("spacing must be positive");
  const long m = std::lround(1.0 / spacing);
  if (m < 4 || std::abs(1.0 / static_cast<double>(m) - spacing) > 1e-12) {
    throw PreconditionError("spacing must be 1/m with integer m >= 4");
  }
  return m;
}

long half_nodes(double half_length, long m) {
  const double scaled = half_length * static_cast<double>(m);
  const long k = std::lround(scaled);
  if (k < 1 || std::abs(scaled - static_cast<double>(k)) > 1e-9) {
    throw PreconditionError("half length must be a positive multiple of the spacing");
  }
  return k;
}

double well_second(double u) {
  const double s = u - std::floor(u);
  return 2.0 - 12.0 * s + 12.0 * s * s;
}

/// -2 u'' + W'(u) at interior node j.
double node_residual(const std::vector<double>& u, std::size_t j, double inv_h2) {
  return -2.0 * (u[j + 1] - 2.0 * u[j] + u[j - 1]) * inv_h2 + double_well_derivative(u[j]);
}

}  // namespace

double Profile1D::at(double t) const {
  if (values.empty()) throw PreconditionError("empty profile");
  const double s = (t + half_length) / spacing;
  if (s <= 0.0) return values.front();
  const auto last = static_cast<double>(values.size() - 1);
  if (s >= last) return values.back();
  const auto j = static_cast<std::size_t>(s);
  const double w = s - static_cast<double>(j);
  return (1.0 - w) * values[j] + w * values[j + 1];
}

Field Profile1D::to_field() const {
  const long m = resolution_of(spacing);
  const long k = half_nodes(half_length, m);
  if (values.size() != static_cast<std::size_t>(2 * k + 1)) {
    throw PreconditionError("profile has " + std::to_string(values.size()) + " values, grid needs " +
                            std::to_string(2 * k + 1));
  }
  return Field({Axis::box_nodes(-k, 2 * k + 1, m)}, values);
}

Profile1D Profile1D::closed_form(double half_length, double spacing) {
  const long m = resolution_of(spacing);
  const long k = half_nodes(half_length, m);
  Profile1D p;
  p.half_length = static_cast<double>(k) / static_cast<double>(m);
  p.spacing = 1.0 / static_cast<double>(m);
  p.source = Source::closed_form;
  for (long g = -k; g <= k; ++g) p.values.push_back(logistic_profile(static_cast<double>(g) / static_cast<double>(m)));
  return p;
}

Profile1D Profile1D::from_field(const Field& u, Source source) {
  if (u.dimension() != 1 || !u.axis(0).is_box()) throw PreconditionError("profile needs a 1-D box field");
  const Axis& a = u.axis(0);
  if (a.count % 2 == 0 || a.first != -(a.count - 1) / 2) {
    throw PreconditionError("profile box must be symmetric about 0");
  }
  Profile1D p;
  p.spacing = a.spacing();
  p.half_length = static_cast<double>(-a.first) * p.spacing;
  p.source = source;
  for (long g = a.first; g < a.first + a.count; ++g) {
    const long idx[1] = {g};
    p.values.push_back(u.at(idx));
  }
  return p;
}

std::string to_string(Profile1D::Source source) {
  switch (source) {
    case Profile1D::Source::closed_form: return "closed-form";
    case Profile1D::Source::bvp: return "bvp";
    case Profile1D::Source::relaxed: return "relaxed";
    case Profile1D::Source::file: return "file";
  }
  return "?";
}

Profile1D solve_heteroclinic_bvp(double half_length, double spacing, const BvpOptions& options) {
  if (half_length < 10.0) throw PreconditionError("BVP needs L >= 10");
  if (spacing > 0.1) throw PreconditionError("BVP needs h <= 0.1");
  const long m = resolution_of(spacing);
  const long k = half_nodes(half_length, m);
  const double h = 1.0 / static_cast<double>(m);
  const double inv_h2 = 1.0 / (h * h);
  const auto n = static_cast<std::size_t>(2 * k + 1);
  const auto centre = static_cast<std::size_t>(k);

  std::vector<double> u(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = (static_cast<double>(j) - static_cast<double>(k)) * h;
    u[j] = std::clamp(0.5 + t / 8.0, 0.0, 1.0);
  }
  u.front() = logistic_profile(-static_cast<double>(k) * h);
  u.back() = logistic_profile(static_cast<double>(k) * h);
  u[centre] = 0.5;

  auto free_node = [&](std::size_t j) { return j > 0 && j + 1 < n && j != centre; };
  std::vector<double> r(n, 0.0);
  auto evaluate = [&](const std::vector<double>& w) {
    double merit = 0.0, sup = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j) {
      r[j] = free_node(j) ? node_residual(w, j, inv_h2) : 0.0;
      merit += r[j] * r[j];
      sup = std::max(sup, std::abs(r[j]));
    }
    return std::pair{merit, sup};
  };

  auto [merit, sup] = evaluate(u);
  double mu = 1e-3;
  std::vector<double> lower(n), diag(n), upper(n), rhs(n), trial(n);
  std::size_t stalls = 0;
  for (std::size_t it = 0; it < options.max_iterations && sup > options.residual_tolerance; ++it) {
    // Tridiagonal (J + mu I) delta = -r; pinned nodes carry identity rows.
    for (std::size_t j = 0; j < n; ++j) {
      if (free_node(j)) {
        lower[j] = -2.0 * inv_h2;
        upper[j] = -2.0 * inv_h2;
        diag[j] = 4.0 * inv_h2 + well_second(u[j]) + mu;
        rhs[j] = -r[j];
      } else {
        lower[j] = upper[j] = 0.0;
        diag[j] = 1.0;
        rhs[j] = 0.0;
      }
    }
    for (std::size_t j = 1; j < n; ++j) {
      const double w = lower[j] / diag[j - 1];
      diag[j] -= w * upper[j - 1];
      rhs[j] -= w * rhs[j - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) rhs[j] = (rhs[j] - upper[j] * rhs[j + 1]) / diag[j];

    for (std::size_t j = 0; j < n; ++j) trial[j] = u[j] + rhs[j];
    const std::vector<double> saved = r;
    const auto [trial_merit, trial_sup] = evaluate(trial);
    if (std::isfinite(trial_merit) && trial_merit < merit) {
      u.swap(trial);
      merit = trial_merit;
      sup = trial_sup;
      mu = std::max(mu * 0.3, 1e-12);
      stalls = 0;
    } else {
      r = saved;
      mu *= 10.0;
      if (++stalls > 30) break;
    }
  }
  if (!(sup <= 1e-8)) {
    throw ConvergenceError("heteroclinic BVP did not converge (residual " + format_exact(sup) + ")");
  }
  Profile1D p;
  p.half_length = static_cast<double>(k) * h;
  p.spacing = h;
  p.values = std::move(u);
  p.source = Profile1D::Source::bvp;
  return p;
}

double profile_residual(const Profile1D& p) {
  if (p.size() < 3) throw PreconditionError("profile needs at least 3 nodes");
  const double inv_h2 = 1.0 / (p.spacing * p.spacing);
  double sup = 0.0;
  for (std::size_t j = 1; j + 1 < p.size(); ++j) sup = std::max(sup, std::abs(node_residual(p.values, j, inv_h2)));
  return sup;
}

double equipartition_residual(const Profile1D& p) {
  if (p.size() < 3) throw PreconditionError("profile needs at least 3 nodes");
  for (std::size_t j = 1; j < p.size(); ++j) {
    if (!(p.values[j] > p.values[j - 1])) {
      throw PreconditionError("equipartition needs a strictly increasing profile (fails at node " +
                              std::to_string(j) + ")");
    }
  }
  double sup = 0.0;
  for (std::size_t j = 1; j + 1 < p.size(); ++j) {
    const double du = (p.values[j + 1] - p.values[j - 1]) / (2.0 * p.spacing);
    sup = std::max(sup, std::abs(du * du - double_well(p.values[j])));
  }
  return sup;
}

double profile_energy(const Profile1D& p) { return energy(p.to_field(), allen_cahn(1)); }

double profile_center(const Profile1D& p) {
  for (std::size_t j = 1; j < p.size(); ++j) {
    const double a = p.values[j - 1], b = p.values[j];
    if ((a - 0.5) * (b - 0.5) <= 0.0 && a != b) {
      return p.node(j - 1) + (0.5 - a) / (b - a) * p.spacing;
    }
  }
  throw PreconditionError("profile never crosses 1/2");
}

double logistic_error(const Profile1D& p, double shift) {
  double sup = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    sup = std::max(sup, std::abs(p.values[j] - logistic_profile(p.node(j) - shift)));
  }
  return sup;
}

void write_profile(const std::filesystem::path& csv, const Profile1D& p) {
  std::ofstream out(csv);
  if (!out) throw IoError("cannot write " + csv.string());
  out << "t,u\n";
  for (std::size_t j = 0; j < p.size(); ++j) out << format_exact(p.node(j)) << ',' << format_exact(p.values[j]) << '\n';
  if (!out) throw IoError("write failed for " + csv.string());
}

Profile1D read_profile(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw IoError("cannot read " + csv.string());
  std::string line;
  if (!std::getline(in, line) || line != "t,u") throw IoError(csv.string() + ": expected header 't,u'");
  std::vector<double> t, u;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError(csv.string() + ": malformed row '" + line + "'");
    char* end = nullptr;
    const double tv = std::strtod(line.c_str(), &end);
    const double uv = std::strtod(line.c_str() + comma + 1, &end);
    if (*end != '\0' && *end != '\r') throw IoError(csv.string() + ": malformed row '" + line + "'");
    t.push_back(tv);
    u.push_back(uv);
  }
  if (t.size() < 3) throw IoError(csv.string() + ": profile needs at least 3 rows");
  Profile1D p;
  try {
    const long m = resolution_of(t[1] - t[0]);
    p.spacing = 1.0 / static_cast<double>(m);
    p.half_length = static_cast<double>(half_nodes(-t[0], m)) * p.spacing;
  } catch (const PreconditionError& e) {
    throw IoError(csv.string() + ": " + e.what());
  }
  p.values = std::move(u);
  p.source = Profile1D::Source::file;
  if (p.size() != static_cast<std::size_t>(std::lround(2.0 * p.half_length / p.spacing)) + 1) {
    throw IoError(csv.string() + ": node count does not match a symmetric grid");
  }
  return p;
}

}  // namespace pmlab
