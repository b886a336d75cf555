#include "pmlab/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "pmlab/errors.hpp"
#include "pmlab/field_io.hpp"
#include "pmlab/lattice.hpp"

namespace pmlab {

namespace {

std::string describe(const IntVec& k) {
  std::string s = "(";
  for (std::size_t i = 0; i < k.size(); ++i) s += (i ? "," : "") + std::to_string(k[i]);
  return s + ")";
}

Vec normalized(Vec v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

double real_dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool primitive(const IntVec& k) {
  long g = 0;
  for (long v : k) g = std::gcd(g, std::abs(v));
  if (g != 1) return false;
  for (long v : k) {
    if (v != 0) return v > 0;
  }
  return false;
}

std::vector<Vec> orthonormalize(const std::vector<Vec>& vectors) {
  std::vector<Vec> basis;
  for (Vec v : vectors) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : basis) {
        const double c = real_dot(v, e);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * e[i];
      }
    }
    double norm = std::sqrt(real_dot(v, v));
    if (norm > 1e-9) {
      for (double& x : v) x /= norm;
      basis.push_back(std::move(v));
    }
  }
  return basis;
}

/// Memoized compare(T_k u, u).
class Classifier {
 public:
  Classifier(const Field& u, double tol) : u_(u), tol_(tol) {}

  const OrderRelation& operator()(const IntVec& k) {
    auto it = cache_.find(k);
    if (it == cache_.end()) {
      it = cache_.emplace(k, classify_translation(u_, TranslationVector::from_lattice(k), tol_)).first;
    }
    return it->second;
  }

 private:
  const Field& u_;
  double tol_;
  std::map<IntVec, OrderRelation> cache_;
};

Order expected_order(const IntVec& k, const std::vector<Vec>& a) {
  for (const auto& dir : a) {
    const double d = dot(k, dir);
    if (d > kLatticeTolerance) return Order::greater;
    if (d < -kLatticeTolerance) return Order::less;
  }
  return Order::equal;
}

struct Candidate {
  Vec normal;
  std::size_t in_plane = 0;
};

/// Sign-consistent orientation of `normal` against the classified vectors, or
/// nullopt with the offending vector in `witness`.
std::optional<Candidate> check_candidate(Vec normal, const std::vector<IntVec>& vectors, Classifier& classify,
                                         IntVec& witness) {
  for (const auto& k : vectors) {
    const double d = dot(k, normal);
    if (std::abs(d) <= kLatticeTolerance) continue;
    const Order o = classify(k).order;
    if (o == Order::greater || o == Order::less) {
      if ((o == Order::greater) != (d > 0.0)) {
        for (double& x : normal) x = -x;
      }
      break;
    }
  }
  Candidate c;
  for (const auto& k : vectors) {
    const double d = dot(k, normal);
    const Order o = classify(k).order;
    if (std::abs(d) <= kLatticeTolerance) {
      ++c.in_plane;
      continue;
    }
    const Order want = d > 0.0 ? Order::greater : Order::less;
    if (o != want) {
      witness = k;
      return std::nullopt;
    }
  }
  c.normal = std::move(normal);
  return c;
}

/// Next direction inside span(gamma): a hyperplane normal separating GREATER
/// from LESS translations with every EQUAL translation on the plane.
Vec next_direction(const std::vector<IntVec>& gamma, const std::vector<IntVec>& vectors, Classifier& classify,
                   std::size_t level) {
  std::vector<Vec> span_real;
  for (const auto& k : gamma) span_real.push_back(to_real(k));
  const std::vector<Vec> q = orthonormalize(span_real);
  const std::size_t r = q.size();

  std::vector<IntVec> generators;
  for (const auto& k : vectors) {
    if (primitive(k)) generators.push_back(k);
  }

  std::vector<Vec> normals;
  auto add_normal = [&](const std::vector<IntVec>& subset) {
    std::vector<Vec> s;
    for (const auto& k : subset) s.push_back(to_real(k));
    const std::vector<Vec> sb = orthonormalize(s);
    if (sb.size() != subset.size()) return;
    Vec best;
    double best_norm = 0.0;
    for (const auto& e : q) {
      Vec v = e;
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : sb) {
          const double c = real_dot(v, b);
          for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
        }
      }
      const double norm = std::sqrt(real_dot(v, v));
      if (norm > best_norm) {
        best_norm = norm;
        best = std::move(v);
      }
    }
    if (best_norm < 1e-9) return;
    Vec n = normalized(std::move(best));
    for (const auto& m : normals) {
      if (std::abs(std::abs(real_dot(m, n)) - 1.0) < 1e-12) return;
    }
    normals.push_back(std::move(n));
  };

  if (r == 1) {
    add_normal({});
  } else {
    // All (r-1)-subsets of primitive generators, in visiting order.
    std::vector<std::size_t> idx(r - 1);
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t g = generators.size();
    if (g >= r - 1) {
      while (true) {
        std::vector<IntVec> subset;
        for (auto i : idx) subset.push_back(generators[i]);
        add_normal(subset);
        std::size_t pos = r - 1;
        while (pos > 0 && idx[pos - 1] == g - (r - 1) + (pos - 1)) --pos;
        if (pos == 0) break;
        ++idx[pos - 1];
        for (std::size_t j = pos; j < r - 1; ++j) idx[j] = idx[j - 1] + 1;
      }
    }
  }

  std::vector<Candidate> consistent;
  IntVec witness;
  for (const auto& n : normals) {
    IntVec w;
    if (auto c = check_candidate(n, vectors, classify, w)) {
      consistent.push_back(std::move(*c));
    } else if (witness.empty()) {
      witness = w;
    }
  }
  if (consistent.empty()) {
    std::string msg = "no direction a_" + std::to_string(level) + " orders the classified translations";
    if (!witness.empty()) {
      msg += "; e.g. k=" + describe(witness) + " classified " + to_string(classify(witness).order);
    }
    throw ExtractionError(msg);
  }
  std::stable_sort(consistent.begin(), consistent.end(),
                   [](const Candidate& a, const Candidate& b) { return a.in_plane > b.in_plane; });
  if (consistent.size() > 1 && consistent[0].in_plane == consistent[1].in_plane) {
    throw ExtractionError("direction a_" + std::to_string(level) +
                          " is ambiguous at this radius (several separating planes)");
  }
  return consistent.front().normal;
}

}  // namespace

RotationFit rotation_fit(const Field& u) {
  RotationFit fit;
  fit.rho = u.slope();
  const std::size_t n = u.dimension();
  const IntVec origin(n, 0);
  const double u0 = u.at(origin);
  for (std::size_t flat = 0; flat < u.size(); ++flat) {
    const IntVec g = u.global_index(flat);
    double linear = 0.0;
    for (std::size_t i = 0; i < n; ++i) linear += fit.rho[i].value() * u.axis(i).position(g[i]);
    fit.bound = std::max(fit.bound, std::abs(u.at(g) - u0 - linear));
  }
  Vec a(n + 1, 1.0);
  for (std::size_t i = 0; i < n; ++i) a[i] = -fit.rho[i].value();
  fit.a1 = normalized(std::move(a));
  return fit;
}

OrderRelation classify_translation(const Field& u, const TranslationVector& k, double tol) {
  return compare(translate(u, k), u, tol);
}

std::vector<IntersectionWitness> self_intersection_scan(const Field& u, long radius, double tol) {
  if (radius < 1) throw PreconditionError("scan radius must be >= 1");
  std::vector<IntersectionWitness> found;
  for (const auto& shift : enumerate_box(u.dimension(), radius)) {
    TranslationVector k{shift, 0};
    const OrderRelation base = classify_translation(u, k, tol);
    for (long lift = -radius; lift <= radius; ++lift) {
      // Adding lift moves every difference by exactly lift.
      if (!(base.max_above + static_cast<double>(lift) > tol && base.max_below - static_cast<double>(lift) > tol)) {
        continue;
      }
      k.lift = lift;
      OrderRelation r = classify_translation(u, k, tol);
      if (r.order == Order::crossing) found.push_back({k, std::move(r)});
    }
  }
  return found;
}

nlohmann::json to_json(const OrderRelation& r) {
  nlohmann::json j;
  j["order"] = to_string(r.order);
  j["margin"] = r.margin;
  j["max_above"] = r.max_above;
  j["max_below"] = r.max_below;
  j["witness_above"] = r.witness_above;
  j["witness_below"] = r.witness_below;
  return j;
}

nlohmann::json to_json(const InvariantSystem& sys) {
  nlohmann::json j;
  j["t"] = sys.t;
  j["a"] = sys.a;
  j["gamma_bases"] = sys.gamma_bases;
  return j;
}

InvariantSystem invariants_from_json(const nlohmann::json& j) {
  InvariantSystem sys;
  try {
    sys.t = j.at("t").get<std::size_t>();
    sys.a = j.at("a").get<std::vector<Vec>>();
    sys.gamma_bases = j.at("gamma_bases").get<std::vector<std::vector<IntVec>>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed invariant system: ") + e.what());
  }
  if (sys.a.size() != sys.t) throw IoError("invariant system: t disagrees with the number of directions");
  return sys;
}

nlohmann::json to_json(const IntersectionWitness& w, const Field& u) {
  nlohmann::json j;
  j["k"] = w.k.lattice();
  j["relation"] = to_json(w.relation);
  j["x_above"] = u.position(w.relation.witness_above);
  j["x_below"] = u.position(w.relation.witness_below);
  return j;
}

InvariantSystem extract_invariants(const Field& u, long radius, double tol, std::optional<std::uint64_t> shuffle_seed) {
  const auto crossings = self_intersection_scan(u, radius, tol);
  if (!crossings.empty()) {
    throw PreconditionError("field has self-intersections (e.g. k=" + describe(crossings.front().k.lattice()) +
                            "); invariants are undefined");
  }
  const std::size_t d = u.dimension() + 1;
  Classifier classify(u, tol);
  std::vector<IntVec> box = enumerate_box(d, radius);
  box.erase(std::remove(box.begin(), box.end(), IntVec(d, 0)), box.end());
  if (shuffle_seed) {
    std::mt19937_64 rng(*shuffle_seed);
    std::shuffle(box.begin(), box.end(), rng);
  }

  InvariantSystem sys;
  std::vector<IntVec> identity;
  for (std::size_t i = 0; i < d; ++i) {
    IntVec e(d, 0);
    e[i] = 1;
    identity.push_back(e);
  }
  sys.gamma_bases.push_back(identity);
  sys.a.push_back(rotation_fit(u).a1);

  while (true) {
    const std::size_t s = sys.a.size();
    std::vector<IntVec> gamma = lattice_in_orthocomplement(sys.a, d, radius);
    sys.gamma_bases.push_back(gamma);
    if (gamma.empty()) break;
    std::vector<IntVec> members;
    for (const auto& k : box) {
      const bool inside = std::all_of(sys.a.begin(), sys.a.end(),
                                      [&](const Vec& a) { return std::abs(dot(k, a)) <= kLatticeTolerance; });
      if (inside) members.push_back(k);
    }
    const bool all_equal =
        std::all_of(members.begin(), members.end(), [&](const IntVec& k) { return classify(k).order == Order::equal; });
    if (all_equal) break;
    if (s == d) throw ExtractionError("more than n+1 directions required");
    sys.a.push_back(next_direction(gamma, members, classify, s + 1));
  }
  sys.t = sys.a.size();

  for (const auto& k : box) {
    const Order want = expected_order(k, sys.a);
    const Order got = classify(k).order;
    if (want != got) {
      throw ExtractionError("translation k=" + describe(k) + " classified " + to_string(got) + " but the system " +
                            "predicts " + to_string(want));
    }
  }
  return sys;
}

bool same_directions(const std::vector<Vec>& a, const std::vector<Vec>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (a[s].size() != b[s].size()) return false;
    for (std::size_t i = 0; i < a[s].size(); ++i) {
      if (std::abs(a[s][i] - b[s][i]) > tol) return false;
    }
  }
  return true;
}

bool is_admissible(const std::vector<Vec>& a, long radius) {
  if (a.empty()) return false;
  const std::size_t d = a.front().size();
  if (d < 2) return false;
  for (const auto& v : a) {
    if (v.size() != d || std::abs(std::sqrt(real_dot(v, v)) - 1.0) > kLatticeTolerance) return false;
  }
  if (!(a.front().back() > 0.0)) return false;
  try {
    for (std::size_t s = 1; s < a.size(); ++s) {
      const std::vector<Vec> previous(a.begin(), a.begin() + static_cast<long>(s));
      const auto gamma = lattice_in_orthocomplement(previous, d, radius);
      if (distance_to_span(a[s], gamma) > kLatticeTolerance) return false;
    }
  } catch (const Error&) {
    return false;
  }
  return true;
}

bool is_admissible(const InvariantSystem& sys, long radius) { return is_admissible(sys.a, radius); }

EnvelopeResult envelope(const Field& u, const InvariantSystem& sys, Sign sign, std::size_t steps, double tol,
                        long radius, double order_tol) {
  if (sys.t < 2) throw PreconditionError("envelopes need t >= 2");
  if (steps < 1) throw PreconditionError("envelope needs at least one step");
  if (sys.gamma_bases.size() < sys.t) throw PreconditionError("invariant system lacks Gamma_t");
  const Vec& at = sys.a[sys.t - 1];
  IntVec chosen;
  long chosen_size = 0;
  for (const auto& k : sys.gamma_bases[sys.t - 1]) {
    const double d = dot(k, at);
    if (std::abs(d) <= kLatticeTolerance) continue;
    long size = 0;
    for (long v : k) size += std::abs(v);
    if (chosen.empty() || size < chosen_size) {
      chosen = k;
      chosen_size = size;
      if ((d > 0.0) != (sign == Sign::plus)) {
        for (long& v : chosen) v = -v;
      }
    }
  }
  if (chosen.empty()) throw PreconditionError("Gamma_t has no vector transverse to a_t");

  EnvelopeResult result;
  result.step = TranslationVector::from_lattice(chosen);
  Field previous = u;
  TranslationVector total = TranslationVector::from_lattice(IntVec(chosen.size(), 0));
  for (std::size_t m = 1; m <= steps; ++m) {
    total = total + result.step;
    Field next = resample_on(translate(u, total), u);
    result.last_change = sup_distance(next, previous);
    previous = std::move(next);
  }
  result.steps = steps;
  result.converged = result.last_change < tol;
  if (!result.converged) {
    throw ConvergenceError("envelope did not settle in " + std::to_string(steps) + " steps (last change " +
                           format_exact(result.last_change) + ")");
  }
  result.field = std::move(previous);
  result.invariants = extract_invariants(result.field, radius, order_tol);
  const std::vector<Vec> expected(sys.a.begin(), sys.a.end() - 1);
  result.invariants_match = same_directions(result.invariants.a, expected);
  return result;
}

TotalOrderReport total_order_check(const std::vector<Field>& fields, double tol) {
  TotalOrderReport report;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = i + 1; j < fields.size(); ++j) {
      OrderRelation r = compare(fields[i], fields[j], tol);
      ++report.pairs_checked;
      if (r.order == Order::crossing) {
        report.passed = false;
        report.crossings.push_back({i, j, std::move(r)});
      }
    }
  }
  return report;
}

GapReport gap_check(const Field& u, const InvariantSystem& sys, const std::vector<Field>& candidates,
                    const Integrand& f, double tol, const GapOptions& options) {
  if (sys.t < 2) throw PreconditionError("gap check needs t >= 2");
  GapReport report;
  report.lower = envelope(u, sys, Sign::minus, options.envelope_steps, options.envelope_tolerance, options.radius, tol).field;
  report.upper = envelope(u, sys, Sign::plus, options.envelope_steps, options.envelope_tolerance, options.radius, tol).field;
  const std::vector<Vec> chain(sys.a.begin(), sys.a.end() - 1);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const Field& v = candidates[c];
    GapCandidate g;
    g.above_lower = compare(report.lower, v, tol);
    g.below_upper = compare(v, report.upper, tol);
    g.strictly_between = g.above_lower.order == Order::less && g.below_upper.order == Order::less;
    try {
      const InvariantSystem vs = extract_invariants(v, options.radius, tol);
      g.in_class = same_directions(vs.a, chain);
      g.class_note = "t=" + std::to_string(vs.t);
    } catch (const Error& e) {
      g.in_class = false;
      g.class_note = e.what();
    }
    g.minimality = minimality_spot_check(v, f, options.spot_trials, options.spot_radius, options.seed + c);
    g.anomaly = g.strictly_between && g.in_class && g.minimality.passed();
    if (g.anomaly) report.passed = false;
    report.candidates.push_back(std::move(g));
  }
  return report;
}

}  // namespace pmlab
