#include "pmlab/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "pmlab/errors.hpp"

namespace pmlab {

namespace {

long floor_div(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

void subtract_multiple(IntVec& row, const IntVec& pivot, long q) {
  for (std::size_t i = 0; i < row.size(); ++i) row[i] -= q * pivot[i];
}

bool is_zero(const IntVec& k) {
  return std::all_of(k.begin(), k.end(), [](long v) { return v == 0; });
}

std::vector<Vec> orthonormal_basis(const std::vector<Vec>& vectors) {
  double scale = 0.0;
  for (const auto& v : vectors) {
    for (double x : v) scale = std::max(scale, std::abs(x));
  }
  std::vector<Vec> basis;
  for (Vec v : vectors) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : basis) {
        double c = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) c += v[i] * e[i];
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * e[i];
      }
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 1e-9 * std::max(scale, 1e-300)) {
      for (double& x : v) x /= norm;
      basis.push_back(std::move(v));
    }
  }
  return basis;
}

}  // namespace

double dot(const IntVec& k, const Vec& a) {
  if (k.size() != a.size()) throw PreconditionError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) s += static_cast<double>(k[i]) * a[i];
  return s;
}

Vec to_real(const IntVec& k) { return Vec(k.begin(), k.end()); }

std::vector<IntVec> hermite_basis(std::vector<IntVec> rows) {
  rows.erase(std::remove_if(rows.begin(), rows.end(), is_zero), rows.end());
  if (rows.empty()) return {};
  const std::size_t d = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != d) throw PreconditionError("lattice generators have different dimensions");
  }
  std::size_t p = 0;
  for (std::size_t col = 0; col < d && p < rows.size(); ++col) {
    bool found = false;
    while (true) {
      std::size_t best = rows.size();
      for (std::size_t r = p; r < rows.size(); ++r) {
        if (rows[r][col] != 0 && (best == rows.size() || std::abs(rows[r][col]) < std::abs(rows[best][col]))) best = r;
      }
      if (best == rows.size()) break;
      found = true;
      std::swap(rows[p], rows[best]);
      bool remaining = false;
      for (std::size_t r = p + 1; r < rows.size(); ++r) {
        if (rows[r][col] == 0) continue;
        subtract_multiple(rows[r], rows[p], floor_div(rows[r][col], rows[p][col]));
        remaining = remaining || rows[r][col] != 0;
      }
      if (!remaining) break;
    }
    if (!found) continue;
    if (rows[p][col] < 0) {
      for (long& v : rows[p]) v = -v;
    }
    for (std::size_t r = 0; r < p; ++r) subtract_multiple(rows[r], rows[p], floor_div(rows[r][col], rows[p][col]));
    ++p;
  }
  rows.resize(p);
  return rows;
}

std::vector<IntVec> enumerate_box(std::size_t dimension, long radius) {
  if (radius < 0) throw PreconditionError("radius must be non-negative");
  std::vector<IntVec> out;
  IntVec k(dimension, -radius);
  while (true) {
    out.push_back(k);
    std::size_t i = dimension;
    while (i > 0) {
      --i;
      if (++k[i] <= radius) break;
      k[i] = -radius;
      if (i == 0) return out;
    }
    if (dimension == 0) return out;
  }
}

std::size_t rank_of(const std::vector<Vec>& vectors) { return orthonormal_basis(vectors).size(); }

double distance_to_span(const Vec& a, const std::vector<IntVec>& basis) {
  std::vector<Vec> real;
  for (const auto& k : basis) real.push_back(to_real(k));
  Vec r = a;
  for (const auto& e : orthonormal_basis(real)) {
    double c = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) c += r[i] * e[i];
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c * e[i];
  }
  double norm = 0.0;
  for (double x : r) norm += x * x;
  return std::sqrt(norm);
}

bool in_lattice(const IntVec& k, const std::vector<IntVec>& basis) {
  auto extended = basis;
  extended.push_back(k);
  return hermite_basis(extended) == hermite_basis(basis);
}

std::vector<IntVec> lattice_in_orthocomplement(const std::vector<Vec>& directions, std::size_t dimension,
                                               long radius) {
  if (radius < 1) throw PreconditionError("lattice radius must be >= 1");
  for (const auto& a : directions) {
    if (a.size() != dimension) throw PreconditionError("direction has the wrong dimension");
  }
  if (rank_of(directions) != directions.size()) throw PreconditionError("directions are linearly dependent");
  if (directions.size() >= dimension) return {};

  std::vector<IntVec> kept;
  for (auto& k : enumerate_box(dimension, radius)) {
    if (is_zero(k)) continue;
    const bool orthogonal = std::all_of(directions.begin(), directions.end(),
                                        [&](const Vec& a) { return std::abs(dot(k, a)) <= kLatticeTolerance; });
    if (orthogonal) kept.push_back(std::move(k));
  }
  const std::size_t expected = dimension - directions.size();
  std::vector<Vec> real;
  for (const auto& k : kept) real.push_back(to_real(k));
  const std::size_t found = rank_of(real);
  if (found < expected) {
    throw ExtractionError("radius " + std::to_string(radius) + " too small: orthogonal lattice vectors span " +
                          std::to_string(found) + " of " + std::to_string(expected) + " dimensions");
  }
  return hermite_basis(std::move(kept));
}

}  // namespace pmlab
