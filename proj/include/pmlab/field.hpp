#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pmlab {

using IntVec = std::vector<long>;
using Vec = std::vector<double>;

/// Default absolute tolerance for order relations between fields.
inline constexpr double kOrderTolerance = 1e-8;

struct Rational {
  long num = 0;
  long den = 1;

  /// Reduced form with positive denominator.
  static Rational make(long num, long den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num * b.den == b.num * a.den;
  }
};

/// One coordinate direction of a grid.  Node g (a global integer index) sits
/// at x = g / resolution.  Stored node j corresponds to global index first + j.
///
/// A periodic axis stores one cell of `period` length units and is extended by
/// u(x + period) = u(x) + rise.  A box axis stores a truncated interval and is
/// extended by its edge values.
struct Axis {
  enum class Kind { periodic, box };

  Kind kind = Kind::periodic;
  long resolution = 4;
  long count = 0;
  long first = 0;
  long period = 1;
  long rise = 0;

  static Axis periodic(long period, long resolution, long rise = 0);
  /// Box [lower, upper]; both ends must be multiples of 1/resolution.
  static Axis box(double lower, double upper, long resolution);
  static Axis box_nodes(long first, long count, long resolution);

  double spacing() const { return 1.0 / static_cast<double>(resolution); }
  double position(long global) const {
    return static_cast<double>(global) / static_cast<double>(resolution);
  }
  Rational slope() const;
  bool is_box() const { return kind == Kind::box; }

  /// Global index range [lo, hi) covering one fundamental cell.
  std::pair<long, long> window() const;

  struct Site {
    long local;
    long lift;
  };
  /// Stored node and integer lift representing global index `global`.
  Site locate(long global) const;

  friend bool operator==(const Axis&, const Axis&) = default;
};

/// Element (k, k_{n+1}) of Z^{n+1} acting by T u(x) = u(x - k) + k_{n+1}.
struct TranslationVector {
  IntVec shift;
  long lift = 0;

  static TranslationVector from_lattice(const IntVec& k_bar);
  IntVec lattice() const;
  TranslationVector operator+(const TranslationVector& other) const;
  TranslationVector operator-() const;
  friend bool operator==(const TranslationVector&, const TranslationVector&) = default;
};

/// Discrete function on a product grid.  Value at a global node is
/// values[local] + (lift + per-axis twist lifts); integer parts are kept apart
/// from the stored doubles so that lattice translations are exact.
class Field {
 public:
  Field() = default;
  Field(std::vector<Axis> axes, std::vector<double> values, long lift = 0);

  static Field constant(std::vector<Axis> axes, double value);
  static Field sample(std::vector<Axis> axes,
                      const std::function<double(std::span<const double>)>& f);

  std::size_t dimension() const { return axes_.size(); }
  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(std::size_t i) const { return axes_[i]; }
  std::span<const double> values() const { return values_; }
  long lift() const { return lift_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<std::size_t>& strides() const { return strides_; }

  /// Same layout and lift, new stored values.
  Field with_values(std::vector<double> values) const;

  std::vector<Rational> slope() const;

  /// Value at a global node multi-index.
  double at(std::span<const long> global) const;
  /// Position of a global node multi-index.
  Vec position(std::span<const long> global) const;

  /// Global index of a stored node (flat index) along every axis.
  IntVec global_index(std::size_t flat) const;

  /// Stored values are finite.
  bool finite() const;

  friend bool operator==(const Field&, const Field&) = default;

 private:
  std::vector<Axis> axes_;
  std::vector<double> values_;
  long lift_ = 0;
  std::vector<std::size_t> strides_;
};

Field translate(const Field& u, const TranslationVector& k);

/// Values of `source` at the window nodes of `layout`, stored on layout's axes.
Field resample_on(const Field& source, const Field& layout);

Field pointwise_min(const Field& u, const Field& v);
Field pointwise_max(const Field& u, const Field& v);

enum class Order { less, greater, equal, crossing };

std::string to_string(Order order);

/// Result of comparing u against v over the joint fundamental window.
struct OrderRelation {
  Order order = Order::equal;
  /// LESS/GREATER: smallest pointwise separation (clamped at 0).
  /// EQUAL: sup |u - v|.  CROSSING: smaller of the two one-sided excursions.
  double margin = 0.0;
  double max_above = 0.0;  ///< max (u - v)
  double max_below = 0.0;  ///< max (v - u)
  IntVec witness_above;    ///< global node attaining max_above
  IntVec witness_below;    ///< global node attaining max_below
};

OrderRelation compare(const Field& u, const Field& v, double tol = kOrderTolerance);
double sup_distance(const Field& u, const Field& v);

/// Visits every node of the joint window of u and v and reports u - v.
/// Grids must agree in resolution and slope.
void for_each_difference(const Field& u, const Field& v,
                         const std::function<void(std::span<const long>, double)>& visit);

}  // namespace pmlab
