#include "energy_kernel.hpp"

#include <cmath>
#include <limits>

#include "pmlab/errors.hpp"

namespace pmlab::detail {

namespace {

// u - floor(u) without a libm call; valid for |u| < 2^63.
inline double frac(double u) {
  double t = static_cast<double>(static_cast<long long>(u));
  if (t > u) t -= 1.0;
  return u - t;
}

inline double well(double s) {
  const double t = s * (1.0 - s);
  return t * t;
}

inline double well_d1(double s) { return 2.0 * s * (1.0 - s) * (1.0 - 2.0 * s); }
inline double well_d2(double s) { return 2.0 - 12.0 * s + 12.0 * s * s; }
inline double well_d3(double s) { return -12.0 + 24.0 * s; }

[[noreturn]] void non_finite(std::span<const double> x, double u) {
  std::string where = "x=(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) where += ",";
    where += std::to_string(x[i]);
  }
  throw EvaluationError("non-finite density at " + where + "), u=" + std::to_string(u));
}

inline double well_change(double u, double d) {
  const double s = frac(u);
  const double t = s + d;
  if (t >= 0.0 && t < 1.0) {
    // a^2 - b^2 with a - b = d (1 - s - t) factored out exactly.
    return d * (1.0 - s - t) * (t * (1.0 - t) + s * (1.0 - s));
  }
  return well(frac(t)) - well(s);
}

}  // namespace

double double_well_change(double u, double d) { return well_change(u, d); }

Stencil::Stencil(const Field& u) : n(u.dimension()), size(u.size()) {
  if (size > std::numeric_limits<std::uint32_t>::max()) {
    throw PreconditionError("grid too large");
  }
  inv_h.resize(n);
  stride.resize(n);
  count.resize(n);
  forward.assign(n, std::vector<std::uint32_t>(size));
  forward_lift.assign(n, std::vector<std::int32_t>(size, 0));
  box_end.assign(size, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Axis& a = u.axis(i);
    inv_h[i] = static_cast<double>(a.resolution);
    volume *= a.spacing();
    stride[i] = u.strides()[i];
    count[i] = static_cast<std::size_t>(a.count);
    const std::size_t stride = this->stride[i];
    const std::size_t count = this->count[i];
    for (std::size_t flat = 0; flat < size; ++flat) {
      const std::size_t local = (flat / stride) % count;
      if (local + 1 < count) {
        forward[i][flat] = static_cast<std::uint32_t>(flat + stride);
      } else if (a.is_box()) {
        forward[i][flat] = static_cast<std::uint32_t>(flat);
      } else {
        forward[i][flat] = static_cast<std::uint32_t>(flat - (count - 1) * stride);
        forward_lift[i][flat] = static_cast<std::int32_t>(a.rise);
      }
      if (a.is_box() && (local == 0 || local + 1 == count)) box_end[flat] = 1;
    }
  }
}

NodeSet whole_cell(const Field& u) {
  NodeSet nodes;
  nodes.n = u.dimension();
  nodes.identity = true;
  nodes.flat.resize(u.size());
  nodes.lift.assign(u.size(), u.lift());
  nodes.x.resize(u.size() * nodes.n);
  for (std::size_t flat = 0; flat < u.size(); ++flat) {
    nodes.flat[flat] = static_cast<std::uint32_t>(flat);
    const IntVec g = u.global_index(flat);
    for (std::size_t i = 0; i < nodes.n; ++i) nodes.x[flat * nodes.n + i] = u.axis(i).position(g[i]);
  }
  return nodes;
}

NodeSet region_nodes(const Field& u, const Region& region) {
  const std::size_t n = u.dimension();
  if (region.ranges.size() != n) throw PreconditionError("region dimension mismatch");
  if (region.empty()) throw PreconditionError("region is empty");
  std::vector<std::vector<Axis::Site>> sites(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Axis& a = u.axis(i);
    const auto [lo, hi] = region.ranges[i];
    if (a.is_box()) {
      if (lo < a.first || hi > a.first + a.count) {
        throw PreconditionError("region leaves the box along axis " + std::to_string(i + 1));
      }
    } else if (hi - lo > a.count) {
      throw PreconditionError("region exceeds one period along axis " + std::to_string(i + 1));
    }
    for (long g = lo; g < hi; ++g) sites[i].push_back(a.locate(g));
  }
  NodeSet nodes;
  nodes.n = n;
  IntVec offset(n, 0);
  while (true) {
    std::size_t flat = 0;
    long lift = u.lift();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& site = sites[i][static_cast<std::size_t>(offset[i])];
      flat += static_cast<std::size_t>(site.local) * u.strides()[i];
      lift += site.lift;
      nodes.x.push_back(u.axis(i).position(region.ranges[i].first + offset[i]));
    }
    nodes.flat.push_back(static_cast<std::uint32_t>(flat));
    nodes.lift.push_back(lift);
    std::size_t axis = n;
    bool done = false;
    while (axis > 0) {
      --axis;
      if (++offset[axis] < region.ranges[axis].second - region.ranges[axis].first) break;
      offset[axis] = 0;
      if (axis == 0) done = true;
    }
    if (done) break;
  }
  return nodes;
}

double energy(std::span<const double> values, const Stencil& s, const NodeSet& nodes,
              const Integrand& f) {
  double sum = 0.0;
  if (f.kind == Integrand::Kind::allen_cahn) {
    for (std::size_t k = 0; k < nodes.count(); ++k) {
      const std::uint32_t j = nodes.flat[k];
      const double uj = values[j];
      double term = well(frac(uj));
      for (std::size_t i = 0; i < s.n; ++i) {
        const double d = ((values[s.forward[i][j]] - uj) + s.forward_lift[i][j]) * s.inv_h[i];
        term += d * d;
      }
      sum += term;
    }
  } else {
    Vec p(s.n);
    for (std::size_t k = 0; k < nodes.count(); ++k) {
      const std::uint32_t j = nodes.flat[k];
      const double uj = values[j];
      for (std::size_t i = 0; i < s.n; ++i) {
        p[i] = ((values[s.forward[i][j]] - uj) + s.forward_lift[i][j]) * s.inv_h[i];
      }
      const double u = uj + static_cast<double>(nodes.lift[k]);
      const double term = f.density(nodes.position(k), u, p);
      if (!std::isfinite(term)) non_finite(nodes.position(k), u);
      sum += term;
    }
  }
  return sum * s.volume;
}

void gradient(std::span<const double> values, const Stencil& s, const NodeSet& whole,
              const Integrand& f, std::span<double> out) {
  if (f.kind == Integrand::Kind::allen_cahn) {
    for (std::size_t j = 0; j < s.size; ++j) out[j] = well_d1(frac(values[j]));
    thread_local std::vector<double> flux;
    flux.resize(s.size);
    for (std::size_t i = 0; i < s.n; ++i) {
      const std::size_t st = s.stride[i];
      const std::size_t block = st * s.count[i];
      const std::size_t inner = block - st;
      const double c = 2.0 * s.inv_h[i] * s.inv_h[i];
      const double* v = values.data();
      for (std::size_t b0 = 0; b0 < s.size; b0 += block) {
        for (std::size_t j = b0; j < b0 + inner; ++j) flux[j] = c * (v[j + st] - v[j]);
        for (std::size_t j = b0; j < b0 + inner; ++j) out[j] -= flux[j];
        for (std::size_t j = b0; j < b0 + inner; ++j) out[j + st] += flux[j];
        for (std::size_t j = b0 + inner; j < b0 + block; ++j) {
          const std::uint32_t nb = s.forward[i][j];
          const double w = c * ((v[nb] - v[j]) + s.forward_lift[i][j]);
          out[j] -= w;
          out[nb] += w;
        }
      }
    }
    return;
  }
  std::fill(out.begin(), out.end(), 0.0);
  Vec p(s.n), fp(s.n);
  for (std::size_t k = 0; k < whole.count(); ++k) {
    const std::uint32_t j = whole.flat[k];
    const double uj = values[j];
    for (std::size_t i = 0; i < s.n; ++i) {
      p[i] = ((values[s.forward[i][j]] - uj) + s.forward_lift[i][j]) * s.inv_h[i];
    }
    const double u = uj + static_cast<double>(whole.lift[k]);
    const auto x = whole.position(k);
    const double fu = f.d_u(x, u, p);
    f.d_p(x, u, p, fp);
    if (!std::isfinite(fu)) non_finite(x, u);
    out[j] += fu;
    for (std::size_t i = 0; i < s.n; ++i) {
      const std::uint32_t nb = s.forward[i][j];
      if (nb == j) continue;
      const double flux = fp[i] * s.inv_h[i];
      out[j] -= flux;
      out[nb] += flux;
    }
  }
}

double energy_change(std::span<const double> values, const Stencil& s, const NodeSet& nodes,
                     std::span<const double> delta, const Integrand& f) {
  double sum = 0.0;
  if (f.kind == Integrand::Kind::allen_cahn && nodes.identity) {
    for (std::size_t j = 0; j < s.size; ++j) sum += well_change(values[j], delta[j]);
    for (std::size_t i = 0; i < s.n; ++i) {
      // Interior neighbours sit at j + stride; only the last slab of each block wraps.
      const std::size_t st = s.stride[i];
      const std::size_t block = st * s.count[i];
      const std::size_t inner = block - st;
      const double* v = values.data();
      const double* d = delta.data();
      double axis_sum = 0.0;
      for (std::size_t b0 = 0; b0 < s.size; b0 += block) {
        for (std::size_t j = b0; j < b0 + inner; ++j) {
          const double dd = d[j + st] - d[j];
          axis_sum += dd * (2.0 * (v[j + st] - v[j]) + dd);
        }
        for (std::size_t j = b0 + inner; j < b0 + block; ++j) {
          const std::uint32_t nb = s.forward[i][j];
          const double dd = d[nb] - d[j];
          axis_sum += dd * (2.0 * ((v[nb] - v[j]) + s.forward_lift[i][j]) + dd);
        }
      }
      sum += axis_sum * s.inv_h[i] * s.inv_h[i];
    }
    return sum * s.volume;
  }
  if (f.kind == Integrand::Kind::allen_cahn) {
    for (std::size_t k = 0; k < nodes.count(); ++k) {
      const std::uint32_t j = nodes.flat[k];
      const double dj = delta[j];
      double term = dj != 0.0 ? well_change(values[j], dj) : 0.0;
      for (std::size_t i = 0; i < s.n; ++i) {
        const std::uint32_t nb = s.forward[i][j];
        const double dd = (delta[nb] - dj) * s.inv_h[i];
        if (dd == 0.0) continue;
        const double d = ((values[nb] - values[j]) + s.forward_lift[i][j]) * s.inv_h[i];
        term += dd * (2.0 * d + dd);
      }
      sum += term;
    }
    return sum * s.volume;
  }
  Vec p(s.n), q(s.n);
  for (std::size_t k = 0; k < nodes.count(); ++k) {
    const std::uint32_t j = nodes.flat[k];
    const double uj = values[j];
    const double dj = delta[j];
    bool touched = dj != 0.0;
    for (std::size_t i = 0; i < s.n; ++i) {
      const std::uint32_t nb = s.forward[i][j];
      p[i] = ((values[nb] - uj) + s.forward_lift[i][j]) * s.inv_h[i];
      q[i] = p[i] + (delta[nb] - dj) * s.inv_h[i];
      touched = touched || delta[nb] != 0.0;
    }
    if (!touched) continue;
    const double u = uj + static_cast<double>(nodes.lift[k]);
    const auto x = nodes.position(k);
    const double before = f.density(x, u, p);
    const double after = f.density(x, u + dj, q);
    if (!std::isfinite(before)) non_finite(x, u);
    if (!std::isfinite(after)) non_finite(x, u + dj);
    sum += after - before;
  }
  return sum * s.volume;
}

}  // namespace pmlab::detail
