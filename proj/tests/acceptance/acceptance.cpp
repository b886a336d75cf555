// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pmlab/cli.hpp"
#include "pmlab/field.hpp"
#include "pmlab/field_io.hpp"
#include "pmlab/foliation.hpp"
#include "pmlab/heteroclinic.hpp"
#include "pmlab/integrand.hpp"
#include "pmlab/minimize.hpp"
#include "pmlab/orbit.hpp"

using namespace pmlab;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs `body`; an exception counts as FAIL with its message.
void criterion(int id, const std::string& what, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [ok, detail] = body();
    verdict(id, ok, what, detail);
  } catch (const std::exception& e) {
    verdict(id, false, what, std::string("exception: ") + e.what());
  }
}

// Relaxed heteroclinic shared by criteria 1-3.
struct Heteroclinic {
  RelaxResult result;
  double seconds = 0.0;
};

Heteroclinic relax_ramp(double half_length, double h) {
  const auto m = std::lround(1.0 / h);
  // Linear ramp from 0 to 1 across the box; both end values stay pinned.
  const Field u0 = Field::sample({Axis::box(-half_length, half_length, m)}, [&](std::span<const double> x) {
    return (x[0] + half_length) / (2.0 * half_length);
  });
  const auto t0 = std::chrono::steady_clock::now();
  Heteroclinic out;
  out.result = relax(u0, allen_cahn(1));
  out.seconds = seconds_since(t0);
  return out;
}

double sup_logistic_error(const Field& u) {
  double worst = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const IntVec g = u.global_index(j);
    const double t = u.axis(0).position(g[0]);
    worst = std::max(worst, std::abs(u.values()[j] - 1.0 / (1.0 + std::exp(-t))));
  }
  return worst;
}

// Simpson rule for 2 * int_0^1 u (1 - u) du.
double energy_oracle() {
  const int n = 1000;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * 2.0 * u * (1.0 - u);
  }
  return s / (3.0 * n);
}

Field random_periodic(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<long> res(4, 8), rise(-2, 2), period(1, 2);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  std::vector<Axis> axes;
  for (std::size_t i = 0; i < n; ++i) axes.push_back(Axis::periodic(period(rng), res(rng), rise(rng)));
  Field layout = Field::constant(axes, 0.0);
  std::vector<double> v(layout.size());
  for (double& x : v) x = val(rng);
  return Field(axes, std::move(v), std::uniform_int_distribution<long>(-3, 3)(rng));
}

TranslationVector random_translation(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<long> d(-5, 5);
  TranslationVector k;
  for (std::size_t i = 0; i < n; ++i) k.shift.push_back(d(rng));
  k.lift = d(rng);
  return k;
}

// Largest |u - v| over the joint window; 0 means identical values.
double exact_gap(const Field& u, const Field& v) {
  double worst = 0.0;
  for_each_difference(u, v, [&](std::span<const long>, double d) { worst = std::max(worst, std::abs(d)); });
  return worst;
}

}  // namespace

int main() {
  const Integrand ac1 = allen_cahn(1);
  Heteroclinic het;
  bool have_het = false;

  criterion(1, "heteroclinic oracle", [&] {
    het = relax_ramp(20.0, 0.01);
    have_het = true;
    const double err = sup_logistic_error(het.result.field);
    // The half-spacing solution is the same discrete equation solved by Newton;
    // agreement at h = 0.01 ties the two solvers together.
    const Profile1D coarse = solve_heteroclinic_bvp(20.0, 0.01);
    const Profile1D fine = solve_heteroclinic_bvp(20.0, 0.005);
    const double solver_gap = sup_distance(coarse.to_field(), het.result.field);
    const double ratio = err / sup_logistic_error(fine.to_field());
    const bool ok = het.result.converged && err < 5e-4 && het.seconds < 30.0 && solver_gap < 1e-8 &&
                    ratio >= 3.5 && ratio <= 4.5;
    return std::pair{ok, fmt("converged=%d iterations=%zu sup_err=%.3e runtime=%.1fs relax_vs_newton=%.1e "
                             "order_ratio=%.3f",
                             het.result.converged, het.result.iterations, err, het.seconds, solver_gap, ratio)};
  });

  criterion(2, "energy identity", [&] {
    if (!have_het) throw std::runtime_error("no relaxed heteroclinic");
    const double e = energy(het.result.field, ac1);
    const double oracle = energy_oracle();
    return std::pair{std::abs(e - oracle) <= 1e-3, fmt("E=%.9f oracle=%.9f diff=%.2e", e, oracle, e - oracle)};
  });

  criterion(3, "equipartition", [&] {
    if (!have_het) throw std::runtime_error("no relaxed heteroclinic");
    const auto v = het.result.field.values();
    const double h = het.result.field.axis(0).spacing();
    double worst = 0.0;
    for (std::size_t j = 1; j + 1 < v.size(); ++j) {
      const double du = (v[j + 1] - v[j - 1]) / (2.0 * h);
      const double w = v[j] * v[j] * (1.0 - v[j]) * (1.0 - v[j]);
      worst = std::max(worst, std::abs(du * du - w));
    }
    const double lib = equipartition_residual(Profile1D::from_field(het.result.field));
    return std::pair{worst <= 1e-3 && lib <= 1e-3, fmt("sup|u'^2-W|=%.3e (library %.3e)", worst, lib)};
  });

  criterion(4, "gradient check", [&] {
    std::mt19937_64 rng(4);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 1 + trial % 3;
      Field u = random_periodic(rng, n);
      if (trial % 4 == 3) {
        // Box layout: end nodes enter the energy through one-sided stencils.
        const Field b = Field::sample({Axis::box(-2.0, 2.0, 8)}, [](std::span<const double> x) {
          return std::tanh(x[0]);
        });
        u = b;
      }
      const Integrand f = trial % 2 ? as_generic(allen_cahn(u.dimension())) : allen_cahn(u.dimension());
      std::normal_distribution<double> nd;
      std::vector<double> d(u.size()), plus(u.size()), minus(u.size());
      for (double& x : d) x = nd(rng);
      const double eps = 1e-5;
      for (std::size_t j = 0; j < d.size(); ++j) {
        plus[j] = eps * d[j];
        minus[j] = -eps * d[j];
      }
      const Region whole = Region::whole(u);
      const double fd = (energy_change(u, plus, f, whole) - energy_change(u, minus, f, whole)) / (2.0 * eps);
      const Field g = energy_gradient(u, f);
      double volume = 1.0;
      for (const Axis& a : u.axes()) volume *= a.spacing();
      double analytic = 0.0;
      for (std::size_t j = 0; j < d.size(); ++j) analytic += g.values()[j] * d[j];
      analytic *= volume;
      worst = std::max(worst, std::abs(fd - analytic) / std::max(std::abs(analytic), 1e-300));
    }
    return std::pair{worst < 1e-6, fmt("20 pairs, worst relative error %.2e", worst)};
  });

  criterion(5, "invariant extraction", [&] {
    FamilyOptions opts;
    opts.verify_members = false;
    const FoliationFamily fam = build_family({1.0, 0.0}, {0.37, 0.37 + 0.1}, {}, opts);
    const Field& u = fam.members.front();
    const InvariantSystem sys = extract_invariants(u, 3);
    const std::vector<Vec> expected_a = {{0.0, 0.0, 1.0}, {-1.0, 0.0, 0.0}};
    const std::vector<IntVec> expected_gamma3 = {{0, 1, 0}};
    bool exact = sys.t == 2 && sys.a.size() == 2 && sys.gamma_bases.size() == 3 &&
                 sys.gamma_bases[2] == expected_gamma3;
    for (std::size_t s = 0; exact && s < 2; ++s) {
      for (std::size_t i = 0; i < 3; ++i) exact = exact && sys.a[s][i] == expected_a[s][i];
    }
    // Brute force: every k in the box, classified by direct comparison, must
    // follow the lexicographic rule of the expected directions.
    std::size_t disagreements = 0, visited = 0;
    for (long k1 = -3; k1 <= 3; ++k1) {
      for (long k2 = -3; k2 <= 3; ++k2) {
        for (long k3 = -3; k3 <= 3; ++k3) {
          const TranslationVector k{{k1, k2}, k3};
          const Field moved = translate(u, k);
          Order expected = Order::equal;
          if (k3 != 0) {
            expected = k3 > 0 ? Order::greater : Order::less;
          } else if (k1 != 0) {
            expected = -k1 > 0 ? Order::greater : Order::less;
          }
          ++visited;
          if (compare(moved, u).order != expected) ++disagreements;
        }
      }
    }
    return std::pair{exact && disagreements == 0,
                     fmt("t=%zu exact_match=%d brute_force=%zu/%zu agree", sys.t, exact, visited - disagreements,
                         visited)};
  });

  criterion(6, "group action and order preservation", [&] {
    std::mt19937_64 rng(6);
    std::size_t bad_action = 0, bad_order = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + trial % 3;
      const Field u = random_periodic(rng, n);
      const TranslationVector k = random_translation(rng, n), l = random_translation(rng, n);
      const TranslationVector zero{IntVec(n, 0), 0};
      if (exact_gap(translate(translate(u, l), k), translate(u, k + l)) != 0.0) ++bad_action;
      if (exact_gap(translate(translate(u, k), -k), u) != 0.0) ++bad_action;
      if (exact_gap(translate(u, zero), u) != 0.0) ++bad_action;
      // v >= u with equality on some nodes.
      std::vector<double> w(u.values().begin(), u.values().end());
      std::uniform_real_distribution<double> bump(0.0, 1.0);
      for (std::size_t j = 0; j < w.size(); ++j) w[j] += j % 3 ? bump(rng) : 0.0;
      const Field v = u.with_values(std::move(w));
      const OrderRelation before = compare(u, v, 0.0);
      const OrderRelation after = compare(translate(u, k), translate(v, k), 0.0);
      const bool strictly = compare(translate(u, k), translate(u, k + TranslationVector{IntVec(n, 0), 1}), 0.0).order ==
                            Order::less;
      if (before.order != after.order || before.max_above != after.max_above ||
          before.max_below != after.max_below || !strictly) {
        ++bad_order;
      }
    }
    return std::pair{bad_action == 0 && bad_order == 0,
                     fmt("100 trials, action mismatches=%zu order mismatches=%zu", bad_action, bad_order)};
  });

  FamilyOptions fam_opts;
  fam_opts.seed = 7;
  const auto fam_t0 = std::chrono::steady_clock::now();
  const FoliationFamily fam = build_family({1.0, 0.0}, -5.0, 5.0, 101, {}, fam_opts);
  const double fam_seconds = seconds_since(fam_t0);

  criterion(7, "foliation verification", [&] {
    const FoliationReport fr = verify_foliation(fam, 1e-6);
    const EnvelopeIdentityReport er = envelope_identity_check(fam, 1e-6);
    bool invariants = true;
    for (const auto& s : er.samples) invariants = invariants && s.invariants_match;
    const bool ok = fam.verified() && fr.passed && fr.disjoint && fr.bounded && fr.covered && er.passed &&
                    er.samples.size() == fam.members.size() && invariants;
    return std::pair{ok, fmt("members_verified=%d (%.1fs) disjoint=%d covered=%d levels=%zu worst_level=%.1e "
                             "envelopes=%zu worst=%.1e",
                             fam.verified(), fam_seconds, fr.disjoint, fr.covered, fr.levels_checked,
                             fr.worst_level_error, er.samples.size(), er.worst)};
  });

  criterion(8, "rigidity round-trip", [&] {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<std::size_t> pick(10, fam.members.size() - 11);
    std::uniform_int_distribution<long> cx(-30, 30), cy(0, 9);
    std::uniform_int_distribution<int> sgn(0, 1);
    const double cell = fam.b_grid[1] - fam.b_grid[0];
    std::size_t matched = 0;
    double worst_error = 0.0, worst_shift = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t index = pick(rng);
      const Field& v = fam.members[index];
      const double b = fam.b_grid[index];
      Perturbation p;
      p.center = {cx(rng) + std::lround(b * 10.0), cy(rng)};
      p.radius = 2.0;
      p.amplitude = sgn(rng) ? 0.01 : -0.01;
      const std::vector<double> bump = bump_values(v, p);
      std::vector<double> w(v.values().begin(), v.values().end());
      for (std::size_t j = 0; j < w.size(); ++j) w[j] += bump[j];
      const RelaxResult r = relax(v.with_values(std::move(w)), allen_cahn(2));
      const MatchResult m = rigidity_check(r.field, fam, 1e-3);
      worst_error = std::max(worst_error, m.sup_error);
      worst_shift = std::max(worst_shift, std::abs(m.b0 - b));
      if (r.converged && m.matched() && m.sup_error < 1e-3 && std::abs(m.b0 - b) <= cell) ++matched;
    }
    return std::pair{matched == 10, fmt("%zu/10 matched, worst sup_error=%.2e worst |b0-b|=%.2e (cell %.2f)", matched,
                                        worst_error, worst_shift, cell)};
  });

  criterion(9, "asymptotic trichotomy", [&] {
    const std::vector<IntVec> gamma2 = {{1, 0, 0}, {0, 1, 0}};
    const std::vector<IntVec> directions = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {2, -1, 0}, {-1, 3, 0}};
    std::size_t runs = 0, unclassified = 0, lower = 0, upper = 0, member = 0;
    for (const Field& u : fam.members) {
      for (const IntVec& k : directions) {
        const AsymptoticResult a = asymptotic_limit(u, fam, gamma2, k);
        ++runs;
        switch (a.classification) {
          case LimitClass::lower: ++lower; break;
          case LimitClass::upper: ++upper; break;
          case LimitClass::member: ++member; break;
          default: ++unclassified;
        }
      }
    }
    return std::pair{unclassified == 0, fmt("%zu runs: lower=%zu upper=%zu member=%zu unclassified=%zu", runs, lower,
                                            upper, member, unclassified)};
  });

  criterion(10, "anomaly honesty", [&] {
    std::vector<Field> fields = fam.members;
    fields.push_back(fam.lower);
    fields.push_back(fam.upper);
    const TotalOrderReport clean = total_order_check(fields);

    // A steeper front through the same centre crosses every nearby leaf.
    const Field steep = Field::sample(fam.layout(), [](std::span<const double> x) {
      return logistic_profile(3.0 * x[0]);
    });
    fields.push_back(steep);
    const TotalOrderReport dirty = total_order_check(fields);

    const auto dir = std::filesystem::temp_directory_path() / "pmlab_acceptance_order";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    std::vector<std::string> args = {"pmlab", "report", "--out", (dir / "out").string(), "--fields"};
    for (std::size_t i : {std::size_t{0}, std::size_t{50}, std::size_t{100}}) {
      const auto path = dir / ("member_" + std::to_string(i) + ".csv");
      write_field(path, fam.members[i]);
      args.push_back(path.string());
    }
    write_field(dir / "steep.csv", steep);
    args.push_back((dir / "steep.csv").string());
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    const bool ok = clean.passed && clean.crossings.empty() && !dirty.passed && !dirty.crossings.empty() && code == 2;
    return std::pair{ok, fmt("clean: %zu pairs, %zu crossings; injected: %zu crossings; cli exit=%d",
                             clean.pairs_checked, clean.crossings.size(), dirty.crossings.size(), code)};
  });

  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
