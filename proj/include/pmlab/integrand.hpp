#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>

#include "pmlab/field.hpp"

namespace pmlab {

/// Variational density F(x, u, p), Z-periodic in x and u, with its partial
/// derivatives and the growth constant c of the ellipticity bounds.
struct Integrand {
  enum class Kind { generic, allen_cahn };

  using Density = std::function<double(std::span<const double> x, double u, std::span<const double> p)>;
  using Flux = std::function<void(std::span<const double> x, double u, std::span<const double> p,
                                  std::span<double> out)>;

  std::string name;
  std::size_t dimension = 1;
  double growth_constant = 1.0;
  Density density;
  Density d_u;
  Flux d_p;
  /// Allen–Cahn densities get specialized energy kernels; results agree with
  /// the generic path.
  Kind kind = Kind::generic;
};

/// W(u) = s^2 (1 - s)^2 with s = u - floor(u).
double double_well(double u);
double double_well_derivative(double u);

/// |p|^2 + W(u).
double allen_cahn_density(double u, std::span<const double> p);

Integrand allen_cahn(std::size_t dimension);

/// Builds an integrand from a density alone; missing derivatives are
/// approximated by central differences with step 1e-6.
Integrand make_integrand(std::string name, std::size_t dimension, double growth_constant,
                         Integrand::Density density, Integrand::Density d_u = {},
                         Integrand::Flux d_p = {});

/// Registry of built-in integrands ("allen-cahn", "dirichlet").
Integrand integrand_by_name(std::string_view name, std::size_t dimension);

/// Same integrand, evaluated through the generic callback kernels only.
Integrand as_generic(Integrand f);

struct GrowthOptions {
  double p_range = 10.0;     ///< p sampled uniformly from [-p_range, p_range]^n
  double step = 1e-4;        ///< central second-difference step
  double tolerance = 1e-3;
};

struct GrowthReport {
  std::size_t samples = 0;
  double min_quotient = 0.0;  ///< min over samples of xi^T F_pp xi, |xi| = 1
  double max_quotient = 0.0;
  double first_order_constant = 0.0;   ///< max (|F_pu| + |F_px|) / (1 + |p|)
  double second_order_constant = 0.0;  ///< max (|F_uu| + |F_ux| + |F_xx|) / (1 + |p|^2)
  bool ellipticity_violation = false;
  bool mixed_violation = false;
  Vec worst_x;
  double worst_u = 0.0;
  Vec worst_p;

  bool violation() const { return ellipticity_violation || mixed_violation; }
};

GrowthReport check_growth(const Integrand& f, std::size_t sample_count, std::uint64_t seed,
                          const GrowthOptions& options = {});

/// Discrete Euler–Lagrange operator -div F_p + F_u (the variational
/// derivative of the discrete energy).  Zero on truncated-box end nodes,
/// where the stencil is not defined.
Field euler_lagrange_residual(const Field& u, const Integrand& f);

}  // namespace pmlab
