#pragma once

#include <vector>

#include "pmlab/field.hpp"

namespace pmlab {

/// Tolerance for "k . a = 0" and for span membership tests.
inline constexpr double kLatticeTolerance = 1e-10;

/// Row-style Hermite normal form of the lattice generated by `generators`
/// (zero rows dropped).  Equal lattices give identical bases.
std::vector<IntVec> hermite_basis(std::vector<IntVec> generators);

/// Integer vectors k with |k|_inf <= radius, in lexicographic order.
std::vector<IntVec> enumerate_box(std::size_t dimension, long radius);

/// Sublattice of Z^d orthogonal to every direction, from the vectors of the
/// box |k|_inf <= radius with |k . a| <= 1e-10.  Throws PreconditionError when
/// the directions are dependent and ExtractionError when the box spans less
/// than d - #directions (radius too small for the true lattice).
std::vector<IntVec> lattice_in_orthocomplement(const std::vector<Vec>& directions, std::size_t dimension,
                                               long radius);

/// Rank of a set of real vectors (Gram–Schmidt with relative tolerance).
std::size_t rank_of(const std::vector<Vec>& vectors);

/// Distance from `a` to the real span of `basis`.
double distance_to_span(const Vec& a, const std::vector<IntVec>& basis);

/// `k` is an integer combination of `basis`.
bool in_lattice(const IntVec& k, const std::vector<IntVec>& basis);

double dot(const IntVec& k, const Vec& a);
Vec to_real(const IntVec& k);

}  // namespace pmlab
