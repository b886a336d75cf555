#include "pmlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pmlab/errors.hpp"

namespace pmlab {

namespace {

long floor_div(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

long checked_grid_index(double coordinate, long resolution, const char* what) {
  const double scaled = coordinate * static_cast<double>(resolution);
  const long index = std::lround(scaled);
  if (std::abs(scaled - static_cast<double>(index)) > 1e-9 * std::max(1.0, std::abs(scaled))) {
    throw PreconditionError(std::string(what) + " is not a multiple of the grid spacing");
  }
  return index;
}

void check_resolution(long resolution) {
  if (resolution < 4) {
    throw PreconditionError("grid spacing must be 1/m with integer m >= 4");
  }
}

/// Per-axis lookup table for a contiguous range of global indices.
struct SiteTable {
  std::vector<long> local;
  std::vector<long> lift;
};

SiteTable build_sites(const Axis& axis, long lo, long hi) {
  SiteTable table;
  table.local.reserve(static_cast<std::size_t>(hi - lo));
  table.lift.reserve(static_cast<std::size_t>(hi - lo));
  for (long g = lo; g < hi; ++g) {
    const auto site = axis.locate(g);
    table.local.push_back(site.local);
    table.lift.push_back(site.lift);
  }
  return table;
}

struct JointWindow {
  std::vector<long> lo;
  std::vector<long> hi;
};

JointWindow joint_window(const Field& u, const Field& v) {
  if (u.dimension() != v.dimension()) {
    throw PreconditionError("fields have different dimensions");
  }
  JointWindow w;
  for (std::size_t i = 0; i < u.dimension(); ++i) {
    const Axis& a = u.axis(i);
    const Axis& b = v.axis(i);
    if (a.resolution != b.resolution) {
      throw PreconditionError("fields live on different grids (axis " + std::to_string(i + 1) + ")");
    }
    if (!(a.slope() == b.slope())) {
      throw OrderingUndefined("fields have different slopes along axis " + std::to_string(i + 1));
    }
    if (a.is_box() || b.is_box()) {
      long lo = std::numeric_limits<long>::max();
      long hi = std::numeric_limits<long>::min();
      for (const Axis* ax : {&a, &b}) {
        if (!ax->is_box()) continue;
        lo = std::min(lo, ax->first);
        hi = std::max(hi, ax->first + ax->count);
      }
      w.lo.push_back(lo);
      w.hi.push_back(hi);
    } else {
      w.lo.push_back(0);
      w.hi.push_back(std::lcm(a.count, b.count));
    }
  }
  return w;
}

template <class Visit>
void joint_walk(const Field& u, const Field& v, Visit&& visit) {
  const JointWindow w = joint_window(u, v);
  const std::size_t n = u.dimension();
  std::vector<SiteTable> su, sv;
  for (std::size_t i = 0; i < n; ++i) {
    su.push_back(build_sites(u.axis(i), w.lo[i], w.hi[i]));
    sv.push_back(build_sites(v.axis(i), w.lo[i], w.hi[i]));
  }
  const auto uvals = u.values();
  const auto vvals = v.values();
  IntVec offset(n, 0);
  IntVec global(n);
  while (true) {
    std::size_t fu = 0, fv = 0;
    long lu = u.lift(), lv = v.lift();
    for (std::size_t i = 0; i < n; ++i) {
      const auto o = static_cast<std::size_t>(offset[i]);
      fu += static_cast<std::size_t>(su[i].local[o]) * u.strides()[i];
      fv += static_cast<std::size_t>(sv[i].local[o]) * v.strides()[i];
      lu += su[i].lift[o];
      lv += sv[i].lift[o];
      global[i] = w.lo[i] + offset[i];
    }
    const double diff = (uvals[fu] - vvals[fv]) + static_cast<double>(lu - lv);
    visit(std::span<const long>(global), diff);
    std::size_t axis = n;
    while (axis > 0) {
      --axis;
      if (++offset[axis] < w.hi[axis] - w.lo[axis]) break;
      offset[axis] = 0;
      if (axis == 0) return;
    }
    if (n == 0) return;
  }
}

}  // namespace

Rational Rational::make(long num, long den) {
  if (den == 0) throw PreconditionError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return {num, den};
}

Axis Axis::periodic(long period, long resolution, long rise) {
  check_resolution(resolution);
  if (period < 1) throw PreconditionError("period must be a positive integer");
  Axis a;
  a.kind = Kind::periodic;
  a.resolution = resolution;
  a.period = period;
  a.rise = rise;
  a.count = period * resolution;
  a.first = 0;
  return a;
}

Axis Axis::box(double lower, double upper, long resolution) {
  check_resolution(resolution);
  const long lo = checked_grid_index(lower, resolution, "box lower end");
  const long hi = checked_grid_index(upper, resolution, "box upper end");
  if (hi < lo) throw PreconditionError("box upper end below lower end");
  return box_nodes(lo, hi - lo + 1, resolution);
}

Axis Axis::box_nodes(long first, long count, long resolution) {
  check_resolution(resolution);
  if (count < 1) throw PreconditionError("box needs at least one node");
  Axis a;
  a.kind = Kind::box;
  a.resolution = resolution;
  a.first = first;
  a.count = count;
  a.period = 0;
  a.rise = 0;
  return a;
}

Rational Axis::slope() const {
  if (is_box()) return {0, 1};
  return Rational::make(rise, period);
}

std::pair<long, long> Axis::window() const {
  if (is_box()) return {first, first + count};
  return {0, count};
}

Axis::Site Axis::locate(long global) const {
  long local = global - first;
  if (is_box()) {
    return {std::clamp(local, 0L, count - 1), 0};
  }
  const long cell = floor_div(local, count);
  return {local - cell * count, cell * rise};
}

TranslationVector TranslationVector::from_lattice(const IntVec& k_bar) {
  if (k_bar.empty()) throw PreconditionError("empty lattice vector");
  TranslationVector t;
  t.shift.assign(k_bar.begin(), k_bar.end() - 1);
  t.lift = k_bar.back();
  return t;
}

IntVec TranslationVector::lattice() const {
  IntVec k = shift;
  k.push_back(lift);
  return k;
}

TranslationVector TranslationVector::operator+(const TranslationVector& other) const {
  if (shift.size() != other.shift.size()) throw PreconditionError("translation dimensions differ");
  TranslationVector t = *this;
  for (std::size_t i = 0; i < shift.size(); ++i) t.shift[i] += other.shift[i];
  t.lift += other.lift;
  return t;
}

TranslationVector TranslationVector::operator-() const {
  TranslationVector t = *this;
  for (auto& s : t.shift) s = -s;
  t.lift = -t.lift;
  return t;
}

Field::Field(std::vector<Axis> axes, std::vector<double> values, long lift)
    : axes_(std::move(axes)), values_(std::move(values)), lift_(lift) {
  std::size_t total = 1;
  for (auto& a : axes_) {
    check_resolution(a.resolution);
    if (a.kind == Axis::Kind::periodic) {
      if (a.count != a.period * a.resolution) {
        throw PreconditionError("periodic axis node count must equal period * resolution");
      }
      const long cells = floor_div(a.first, a.count);
      a.first -= cells * a.count;
      lift_ -= cells * a.rise;
    }
    total *= static_cast<std::size_t>(a.count);
  }
  if (axes_.empty()) throw PreconditionError("field needs at least one axis");
  if (values_.size() != total) {
    throw PreconditionError("value array has " + std::to_string(values_.size()) +
                            " entries, grid has " + std::to_string(total));
  }
  strides_.assign(axes_.size(), 1);
  for (std::size_t i = axes_.size() - 1; i > 0; --i) {
    strides_[i - 1] = strides_[i] * static_cast<std::size_t>(axes_[i].count);
  }
}

Field Field::constant(std::vector<Axis> axes, double value) {
  std::size_t total = 1;
  for (const auto& a : axes) total *= static_cast<std::size_t>(a.count);
  return Field(std::move(axes), std::vector<double>(total, value));
}

Field Field::sample(std::vector<Axis> axes,
                    const std::function<double(std::span<const double>)>& f) {
  Field layout = constant(std::move(axes), 0.0);
  std::vector<double> values(layout.size());
  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    const IntVec g = layout.global_index(flat);
    const Vec x = layout.position(g);
    values[flat] = f(x);
  }
  return layout.with_values(std::move(values));
}

Field Field::with_values(std::vector<double> values) const {
  return Field(axes_, std::move(values), lift_);
}

std::vector<Rational> Field::slope() const {
  std::vector<Rational> rho;
  for (const auto& a : axes_) rho.push_back(a.slope());
  return rho;
}

double Field::at(std::span<const long> global) const {
  if (global.size() != axes_.size()) throw PreconditionError("index dimension mismatch");
  std::size_t flat = 0;
  long lift = lift_;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const auto site = axes_[i].locate(global[i]);
    flat += static_cast<std::size_t>(site.local) * strides_[i];
    lift += site.lift;
  }
  return values_[flat] + static_cast<double>(lift);
}

Vec Field::position(std::span<const long> global) const {
  Vec x(global.size());
  for (std::size_t i = 0; i < global.size(); ++i) x[i] = axes_[i].position(global[i]);
  return x;
}

IntVec Field::global_index(std::size_t flat) const {
  IntVec g(axes_.size());
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const auto local = static_cast<long>(flat / strides_[i]);
    flat %= strides_[i];
    g[i] = axes_[i].first + local;
  }
  return g;
}

bool Field::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field translate(const Field& u, const TranslationVector& k) {
  if (k.shift.size() != u.dimension()) {
    throw PreconditionError("translation has dimension " + std::to_string(k.shift.size()) +
                            ", field has " + std::to_string(u.dimension()));
  }
  std::vector<Axis> axes = u.axes();
  for (std::size_t i = 0; i < axes.size(); ++i) {
    axes[i].first += k.shift[i] * axes[i].resolution;
  }
  std::vector<double> values(u.values().begin(), u.values().end());
  return Field(std::move(axes), std::move(values), u.lift() + k.lift);
}

Field resample_on(const Field& source, const Field& layout) {
  if (source.dimension() != layout.dimension()) {
    throw PreconditionError("resample: dimension mismatch");
  }
  for (std::size_t i = 0; i < source.dimension(); ++i) {
    if (source.axis(i).resolution != layout.axis(i).resolution) {
      throw PreconditionError("resample: grids differ");
    }
  }
  std::vector<double> values(layout.size());
  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    values[flat] = source.at(layout.global_index(flat));
  }
  return Field(layout.axes(), std::move(values), 0);
}

namespace {

template <class Pick>
Field pointwise(const Field& u, const Field& v, Pick pick) {
  if (u.axes() != v.axes()) throw PreconditionError("pointwise: layouts differ");
  std::vector<double> values(u.size());
  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    const IntVec g = u.global_index(flat);
    values[flat] = pick(u.at(g), v.at(g));
  }
  return Field(u.axes(), std::move(values), 0);
}

}  // namespace

Field pointwise_min(const Field& u, const Field& v) {
  return pointwise(u, v, [](double a, double b) { return std::min(a, b); });
}

Field pointwise_max(const Field& u, const Field& v) {
  return pointwise(u, v, [](double a, double b) { return std::max(a, b); });
}

std::string to_string(Order order) {
  switch (order) {
    case Order::less: return "LESS";
    case Order::greater: return "GREATER";
    case Order::equal: return "EQUAL";
    case Order::crossing: return "CROSSING";
  }
  return "?";
}

OrderRelation compare(const Field& u, const Field& v, double tol) {
  if (!(tol >= 0.0)) throw PreconditionError("ordering tolerance must be non-negative");
  OrderRelation r;
  r.max_above = -std::numeric_limits<double>::infinity();
  r.max_below = -std::numeric_limits<double>::infinity();
  joint_walk(u, v, [&](std::span<const long> g, double diff) {
    if (diff > r.max_above) {
      r.max_above = diff;
      r.witness_above.assign(g.begin(), g.end());
    }
    if (-diff > r.max_below) {
      r.max_below = -diff;
      r.witness_below.assign(g.begin(), g.end());
    }
  });
  const bool above = r.max_above > tol;
  const bool below = r.max_below > tol;
  if (above && below) {
    r.order = Order::crossing;
    r.margin = std::min(r.max_above, r.max_below);
  } else if (above) {
    r.order = Order::greater;
    r.margin = std::max(0.0, -r.max_below);
  } else if (below) {
    r.order = Order::less;
    r.margin = std::max(0.0, -r.max_above);
  } else {
    r.order = Order::equal;
    r.margin = std::max({r.max_above, r.max_below, 0.0});
  }
  return r;
}

double sup_distance(const Field& u, const Field& v) {
  double sup = 0.0;
  joint_walk(u, v, [&](std::span<const long>, double diff) { sup = std::max(sup, std::abs(diff)); });
  return sup;
}

void for_each_difference(const Field& u, const Field& v,
                         const std::function<void(std::span<const long>, double)>& visit) {
  joint_walk(u, v, visit);
}

}  // namespace pmlab
