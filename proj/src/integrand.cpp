#include "pmlab/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "energy_kernel.hpp"
#include "pmlab/errors.hpp"

namespace pmlab {

double double_well(double u) {
  const double s = u - std::floor(u);
  const double t = s * (1.0 - s);
  return t * t;
}

double double_well_derivative(double u) {
  const double s = u - std::floor(u);
  return 2.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
}

double allen_cahn_density(double u, std::span<const double> p) {
  double sum = 0.0;
  for (double pi : p) sum += pi * pi;
  return sum + double_well(u);
}

Integrand allen_cahn(std::size_t dimension) {
  Integrand f;
  f.name = "allen-cahn";
  f.dimension = dimension;
  // F_pp = 2 Id; the mixed bounds need |W''| <= 2 <= c (1 + |p|^2).
  f.growth_constant = 2.0;
  f.kind = Integrand::Kind::allen_cahn;
  f.density = [](std::span<const double>, double u, std::span<const double> p) {
    return allen_cahn_density(u, p);
  };
  f.d_u = [](std::span<const double>, double u, std::span<const double>) {
    return double_well_derivative(u);
  };
  f.d_p = [](std::span<const double>, double, std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = 2.0 * p[i];
  };
  return f;
}

Integrand make_integrand(std::string name, std::size_t dimension, double growth_constant,
                         Integrand::Density density, Integrand::Density d_u, Integrand::Flux d_p) {
  if (!density) throw PreconditionError("integrand needs a density");
  if (growth_constant < 1.0) throw PreconditionError("growth constant must be >= 1");
  constexpr double step = 1e-6;
  Integrand f;
  f.name = std::move(name);
  f.dimension = dimension;
  f.growth_constant = growth_constant;
  f.density = density;
  if (d_u) {
    f.d_u = std::move(d_u);
  } else {
    f.d_u = [density](std::span<const double> x, double u, std::span<const double> p) {
      return (density(x, u + step, p) - density(x, u - step, p)) / (2.0 * step);
    };
  }
  if (d_p) {
    f.d_p = std::move(d_p);
  } else {
    f.d_p = [density](std::span<const double> x, double u, std::span<const double> p,
                      std::span<double> out) {
      Vec q(p.begin(), p.end());
      for (std::size_t i = 0; i < q.size(); ++i) {
        q[i] = p[i] + step;
        const double plus = density(x, u, q);
        q[i] = p[i] - step;
        const double minus = density(x, u, q);
        q[i] = p[i];
        out[i] = (plus - minus) / (2.0 * step);
      }
    };
  }
  return f;
}

Integrand integrand_by_name(std::string_view name, std::size_t dimension) {
  if (name == "allen-cahn") return allen_cahn(dimension);
  if (name == "dirichlet") {
    return make_integrand(
        "dirichlet", dimension, 2.0,
        [](std::span<const double>, double, std::span<const double> p) {
          double sum = 0.0;
          for (double pi : p) sum += pi * pi;
          return sum;
        },
        [](std::span<const double>, double, std::span<const double>) { return 0.0; },
        [](std::span<const double>, double, std::span<const double> p, std::span<double> out) {
          for (std::size_t i = 0; i < p.size(); ++i) out[i] = 2.0 * p[i];
        });
  }
  throw ConfigError("unknown integrand '" + std::string(name) + "'");
}

Integrand as_generic(Integrand f) {
  f.kind = Integrand::Kind::generic;
  return f;
}

namespace {

double checked(const Integrand& f, std::span<const double> x, double u, std::span<const double> p) {
  const double value = f.density(x, u, p);
  if (!std::isfinite(value)) {
    std::string where = "x=(";
    for (std::size_t i = 0; i < x.size(); ++i) where += (i ? "," : "") + std::to_string(x[i]);
    where += "), u=" + std::to_string(u) + ", p=(";
    for (std::size_t i = 0; i < p.size(); ++i) where += (i ? "," : "") + std::to_string(p[i]);
    throw EvaluationError("non-finite density at " + where + ")");
  }
  return value;
}

/// F_p by central differences of the density.
Vec flux(const Integrand& f, std::span<const double> x, double u, std::span<const double> p, double h) {
  Vec q(p.begin(), p.end()), out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    q[i] = p[i] + h;
    const double plus = checked(f, x, u, q);
    q[i] = p[i] - h;
    const double minus = checked(f, x, u, q);
    q[i] = p[i];
    out[i] = (plus - minus) / (2.0 * h);
  }
  return out;
}

double second_difference(const std::function<double(double)>& g, double h) {
  return (g(h) - 2.0 * g(0.0) + g(-h)) / (h * h);
}

}  // namespace

GrowthReport check_growth(const Integrand& f, std::size_t sample_count, std::uint64_t seed,
                          const GrowthOptions& options) {
  if (sample_count < 1) throw PreconditionError("check_growth needs at least one sample");
  const std::size_t n = f.dimension;
  const double h = options.step;
  const double c = f.growth_constant;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> slope(-options.p_range, options.p_range);
  std::normal_distribution<double> gauss(0.0, 1.0);

  GrowthReport report;
  report.samples = sample_count;
  report.min_quotient = std::numeric_limits<double>::infinity();
  report.max_quotient = -std::numeric_limits<double>::infinity();
  double worst_excess = -1.0;

  Vec x(n), p(n), xi(n);
  for (std::size_t k = 0; k < sample_count; ++k) {
    for (auto& xi_ : x) xi_ = unit(rng);
    const double u = unit(rng);
    for (auto& pi : p) pi = slope(rng);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& v : xi) {
        v = gauss(rng);
        norm += v * v;
      }
    } while (norm < 1e-12);
    norm = std::sqrt(norm);
    for (auto& v : xi) v /= norm;

    const double q = second_difference(
        [&](double s) {
          Vec ps(p);
          for (std::size_t i = 0; i < n; ++i) ps[i] += s * xi[i];
          return checked(f, x, u, ps);
        },
        h);
    report.min_quotient = std::min(report.min_quotient, q);
    report.max_quotient = std::max(report.max_quotient, q);

    double pnorm2 = 0.0;
    for (double pi : p) pnorm2 += pi * pi;

    // Mixed derivatives of F_p with respect to u and x (max-abs entries).
    double f_pu = 0.0, f_px = 0.0;
    {
      const Vec up = flux(f, x, u + h, p, h);
      const Vec um = flux(f, x, u - h, p, h);
      for (std::size_t i = 0; i < n; ++i) f_pu = std::max(f_pu, std::abs(up[i] - um[i]) / (2.0 * h));
      for (std::size_t a = 0; a < n; ++a) {
        Vec xp(x), xm(x);
        xp[a] += h;
        xm[a] -= h;
        const Vec fp = flux(f, xp, u, p, h);
        const Vec fm = flux(f, xm, u, p, h);
        for (std::size_t i = 0; i < n; ++i) f_px = std::max(f_px, std::abs(fp[i] - fm[i]) / (2.0 * h));
      }
    }
    double f_uu = std::abs(second_difference([&](double s) { return checked(f, x, u + s, p); }, h));
    double f_ux = 0.0, f_xx = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      auto at = [&](double du, double dx) {
        Vec xs(x);
        xs[a] += dx;
        return checked(f, xs, u + du, p);
      };
      f_ux = std::max(f_ux, std::abs((at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h)));
      f_xx = std::max(f_xx, std::abs(second_difference([&](double s) { return at(0.0, s); }, h)));
    }
    const double first = (f_pu + f_px) / (1.0 + std::sqrt(pnorm2));
    const double second = (f_uu + f_ux + f_xx) / (1.0 + pnorm2);
    report.first_order_constant = std::max(report.first_order_constant, first);
    report.second_order_constant = std::max(report.second_order_constant, second);

    const bool elliptic_ok = q >= 1.0 / c - options.tolerance && q <= c + options.tolerance;
    const bool mixed_ok = first <= c + options.tolerance && second <= c + options.tolerance;
    if (!elliptic_ok) report.ellipticity_violation = true;
    if (!mixed_ok) report.mixed_violation = true;
    const double excess = std::max({1.0 / c - q, q - c, first - c, second - c});
    if (excess > worst_excess) {
      worst_excess = excess;
      report.worst_x = x;
      report.worst_u = u;
      report.worst_p = p;
    }
  }
  return report;
}

Field euler_lagrange_residual(const Field& u, const Integrand& f) {
  if (u.dimension() != f.dimension) {
    throw PreconditionError("field and integrand dimensions differ");
  }
  for (std::size_t i = 0; i < u.dimension(); ++i) {
    if (u.axis(i).count < 3) throw PreconditionError("grid too small for the stencil (< 3 points per axis)");
  }
  const detail::Stencil stencil(u);
  const detail::NodeSet whole = detail::whole_cell(u);
  std::vector<double> out(u.size());
  detail::gradient(u.values(), stencil, whole, f, out);
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (stencil.box_end[j]) out[j] = 0.0;
  }
  std::vector<Axis> axes = u.axes();
  for (auto& a : axes) a.rise = 0;
  return Field(std::move(axes), std::move(out));
}

}  // namespace pmlab
