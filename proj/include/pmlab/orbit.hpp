#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmlab/field.hpp"
#include "pmlab/integrand.hpp"
#include "pmlab/minimize.hpp"

namespace pmlab {

struct RotationFit {
  std::vector<Rational> rho;
  /// sup over the window of |u(x) - u(0) - rho . x|.
  double bound = 0.0;
  /// (-rho, 1) / sqrt(|rho|^2 + 1).
  Vec a1;
};

RotationFit rotation_fit(const Field& u);

/// compare(T_k u, u, tol).
OrderRelation classify_translation(const Field& u, const TranslationVector& k, double tol = kOrderTolerance);

struct IntersectionWitness {
  TranslationVector k;
  OrderRelation relation;
};

/// Every k in Z^{n+1} with |k|_inf <= radius whose translate crosses u.
/// k_{n+1} is only tried where the oscillation of u(x - k) - u(x) allows a crossing.
std::vector<IntersectionWitness> self_intersection_scan(const Field& u, long radius = 3,
                                                        double tol = kOrderTolerance);

/// t, the directions a_1..a_t in R^{n+1}, and integer bases of Gamma_1..Gamma_{t+1}
/// (Gamma_1 = Z^{n+1}, Gamma_{s+1} = Gamma_s restricted to a_s^perp).
struct InvariantSystem {
  std::size_t t = 0;
  std::vector<Vec> a;
  std::vector<std::vector<IntVec>> gamma_bases;
};

nlohmann::json to_json(const InvariantSystem& sys);
InvariantSystem invariants_from_json(const nlohmann::json& j);
nlohmann::json to_json(const IntersectionWitness& w, const Field& u);
nlohmann::json to_json(const OrderRelation& r);

/// Orders translations of u lexicographically:
///   T_k u > u  iff  k . a_s = 0 for s < r and k . a_r > 0 for some r <= t,
///   T_k u = u  iff  k lies in Gamma_{t+1}.
/// Requires an empty self-intersection scan.  `shuffle_seed` permutes the
/// order in which candidate generators are visited (the answer must not move).
InvariantSystem extract_invariants(const Field& u, long radius = 3, double tol = kOrderTolerance,
                                   std::optional<std::uint64_t> shuffle_seed = std::nullopt);

/// a_1 . e_{n+1} > 0, unit vectors, and a_s in span(Gamma_s) to 1e-10, with
/// Gamma_s recomputed from the directions.
bool is_admissible(const InvariantSystem& sys, long radius = 3);
bool is_admissible(const std::vector<Vec>& a, long radius = 3);

/// Direction lists agree entrywise to `tol` (same length).
bool same_directions(const std::vector<Vec>& a, const std::vector<Vec>& b, double tol = 1e-10);

enum class Sign { minus, plus };

struct EnvelopeResult {
  Field field;
  bool converged = false;
  /// sup distance between the last two iterates.
  double last_change = 0.0;
  std::size_t steps = 0;
  TranslationVector step;
  InvariantSystem invariants;
  /// The limit carries exactly (a_1 .. a_{t-1}).
  bool invariants_match = false;
};

/// Limit of T_{m k} u (m -> steps) for k in Gamma_t with sign(k . a_t) = sign,
/// evaluated on u's own window.  Throws ConvergenceError when the last step
/// still moves by tol or more.
EnvelopeResult envelope(const Field& u, const InvariantSystem& sys, Sign sign, std::size_t steps = 40,
                        double tol = 1e-6, long radius = 3, double order_tol = kOrderTolerance);

struct PairRelation {
  std::size_t i = 0;
  std::size_t j = 0;
  OrderRelation relation;
};

struct TotalOrderReport {
  bool passed = true;
  std::size_t pairs_checked = 0;
  std::vector<PairRelation> crossings;
};

TotalOrderReport total_order_check(const std::vector<Field>& fields, double tol = kOrderTolerance);

struct GapOptions {
  std::size_t envelope_steps = 40;
  double envelope_tolerance = 1e-6;
  long radius = 3;
  std::size_t spot_trials = 100;
  double spot_radius = 2.0;
  std::uint64_t seed = 1;
};

struct GapCandidate {
  OrderRelation above_lower;  ///< compare(u-, v)
  OrderRelation below_upper;  ///< compare(v, u+)
  bool strictly_between = false;
  bool in_class = false;      ///< invariants are exactly (a_1 .. a_{t-1})
  std::string class_note;
  MinimalityReport minimality;
  bool anomaly = false;
};

struct GapReport {
  bool passed = true;
  Field lower;
  Field upper;
  std::vector<GapCandidate> candidates;
};

/// Searches the candidates for a minimizer with invariants (a_1 .. a_{t-1})
/// strictly between the envelopes of u; any hit is an anomaly.
GapReport gap_check(const Field& u, const InvariantSystem& sys, const std::vector<Field>& candidates,
                    const Integrand& f, double tol = kOrderTolerance, const GapOptions& options = {});

}  // namespace pmlab
