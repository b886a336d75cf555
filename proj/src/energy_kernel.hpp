#pragma once

// Discrete energy machinery shared by the integrand and minimize modules.

#include <cstdint>
#include <span>
#include <vector>

#include "pmlab/field.hpp"
#include "pmlab/integrand.hpp"
#include "pmlab/minimize.hpp"

namespace pmlab::detail {

/// Forward-neighbour tables for the stored nodes of a field layout.
struct Stencil {
  explicit Stencil(const Field& u);

  std::size_t n = 0;
  std::size_t size = 0;
  Vec inv_h;
  std::vector<std::size_t> stride;
  std::vector<std::size_t> count;
  double volume = 1.0;
  std::vector<std::vector<std::uint32_t>> forward;
  std::vector<std::vector<std::int32_t>> forward_lift;
  /// Stored node lies on an end of some box axis.
  std::vector<char> box_end;
};

/// Nodes of a region: stored index, integer lift and position.
struct NodeSet {
  std::size_t n = 0;
  std::vector<std::uint32_t> flat;
  std::vector<long> lift;
  std::vector<double> x;
  /// flat[k] == k for every k.
  bool identity = false;

  std::size_t count() const { return flat.size(); }
  std::span<const double> position(std::size_t k) const { return {x.data() + k * n, n}; }
};

NodeSet whole_cell(const Field& u);
NodeSet region_nodes(const Field& u, const Region& region);

// `values` are the stored values of a field with the stencil's layout.
double energy(std::span<const double> values, const Stencil& s, const NodeSet& nodes,
              const Integrand& f);
/// (1/h^n) dE/du over the whole cell, written into `out`.
void gradient(std::span<const double> values, const Stencil& s, const NodeSet& whole,
              const Integrand& f, std::span<double> out);
double energy_change(std::span<const double> values, const Stencil& s, const NodeSet& nodes,
                     std::span<const double> delta, const Integrand& f);

/// W(s + d) - W(s) for the periodic well, accurate for small d.
double double_well_change(double u, double d);

}  // namespace pmlab::detail
