#include "pmlab/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmlab/config.hpp"
#include "pmlab/errors.hpp"
#include "pmlab/field_io.hpp"
#include "pmlab/foliation.hpp"
#include "pmlab/heteroclinic.hpp"
#include "pmlab/integrand.hpp"
#include "pmlab/minimize.hpp"
#include "pmlab/orbit.hpp"

namespace pmlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  fs::path config;
  fs::path out;
  std::optional<std::uint64_t> seed;
  fs::path field;
  std::vector<fs::path> fields;
};

const char* status(bool passed) { return passed ? "PASS" : "FAIL"; }

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

ExperimentConfig configure(const Options& o) {
  ExperimentConfig c = o.config.empty() ? parse_config("") : load_config(o.config);
  if (!o.out.empty()) c.output = o.out;
  if (o.seed) c.seed = *o.seed;
  std::error_code ec;
  fs::create_directories(c.output, ec);
  if (ec) throw IoError("cannot create output directory " + c.output.string() + ": " + ec.message());
  return c;
}

Field initial_field(const ExperimentConfig& c) {
  const std::vector<Axis> axes = c.layout();
  const double L = c.half_length;
  if (c.initial == "constant") return Field::constant(axes, c.initial_value);
  if (c.initial == "ramp") {
    return Field::sample(axes, [&](std::span<const double> x) {
      return c.ramp_low + (c.ramp_high - c.ramp_low) * (x[0] + L) / (2.0 * L);
    });
  }
  if (c.initial == "logistic") {
    return Field::sample(axes, [&](std::span<const double> x) { return logistic_profile(x[0] - c.member_b); });
  }
  if (c.initial == "member-bump") {
    const Field base = Field::sample(axes, [&](std::span<const double> x) { return logistic_profile(x[0] - c.member_b); });
    if (c.bump_amplitude == 0.0) return base;
    Perturbation p;
    for (const auto& a : base.axes()) {
      p.center.push_back(a.is_box() ? std::lround(c.member_b * static_cast<double>(a.resolution)) : a.count / 2);
    }
    p.radius = c.bump_radius;
    p.amplitude = c.bump_amplitude;
    p.exponent = 2;
    std::vector<double> values(base.values().begin(), base.values().end());
    const auto bump = bump_values(base, p);
    for (std::size_t j = 0; j < values.size(); ++j) values[j] += bump[j];
    return base.with_values(std::move(values));
  }
  if (c.initial == "file") {
    if (c.initial_file.empty()) throw ConfigError("initial.kind = file needs initial.file");
    return read_field(c.initial_file);
  }
  throw ConfigError("unknown initial.kind '" + c.initial + "'");
}

json minimality_json(const MinimalityReport& m) {
  json j;
  j["trials"] = m.trials;
  j["failures"] = m.failures;
  j["worst_decrease"] = m.worst_decrease;
  j["worst_trial"] = m.worst_trial;
  j["seed"] = m.seed;
  j["tolerance"] = m.witness_tolerance;
  j["witness"] = {{"center", m.witness.center},
                  {"radius", m.witness.radius},
                  {"amplitude", m.witness.amplitude},
                  {"exponent", m.witness.exponent}};
  j["status"] = status(m.passed());
  j["note"] = "sampled compactly supported perturbations; evidence of minimality, not a certificate";
  return j;
}

FoliationFamily family_from(const ExperimentConfig& c) {
  FamilyGrid grid{c.dimension, c.half_length, c.resolution()};
  FamilyOptions opts;
  opts.verify_members = c.verify_members;
  opts.spot_trials = c.spot_trials;
  opts.spot_radius = c.spot_radius;
  opts.seed = c.seed;
  if (!c.b_grid.empty()) return build_family(c.omega, c.b_grid, grid, opts);
  return build_family(c.omega, c.b_min, c.b_max, c.family_count, grid, opts);
}

json match_json(const MatchResult& m) {
  json j;
  j["status"] = to_string(m.status);
  j["b0"] = m.b0;
  j["sup_error"] = m.sup_error;
  j["reference_node"] = m.reference;
  j["hypothesis"] = m.hypothesis;
  if (m.status != MatchStatus::not_applicable) j["relation"] = to_json(m.relation);
  if (m.invariants) j["invariants"] = to_json(*m.invariants);
  return j;
}

Field subject_field(const Options& o, const ExperimentConfig& c, json& report, bool relax_initial) {
  if (!o.field.empty()) {
    report["field"] = o.field.string();
    return read_field(o.field);
  }
  Field u = initial_field(c);
  report["initial"] = c.initial;
  if (relax_initial) {
    const RelaxResult r = relax(u, integrand_by_name(c.integrand, c.dimension), c.relax);
    report["relax"] = {{"converged", r.converged}, {"iterations", r.iterations}, {"grad_norm", r.grad_norm}};
    u = r.field;
  }
  return u;
}

int run_relax(const Options& o, std::ostream& out) {
  const ExperimentConfig c = configure(o);
  const Integrand f = integrand_by_name(c.integrand, c.dimension);
  const Field u0 = initial_field(c);
  const RelaxResult r = relax(u0, f, c.relax);

  write_field(c.output / "field.csv", r.field);
  {
    std::ofstream log(c.output / "relax_log.csv");
    if (!log) throw IoError("cannot write relax log");
    log << "iteration,energy,grad_norm,step\n";
    for (const auto& rec : r.log) {
      log << rec.iteration << ',' << format_exact(rec.energy) << ',' << format_exact(rec.grad_norm) << ','
          << format_exact(rec.step) << '\n';
    }
  }
  SpotCheckOptions spot;
  spot.max_amplitude = c.spot_amplitude;
  const MinimalityReport m = minimality_spot_check(r.field, f, c.spot_trials, c.spot_radius, c.seed, spot);

  json report;
  report["command"] = "relax";
  report["integrand"] = f.name;
  report["seed"] = c.seed;
  report["converged"] = r.converged;
  report["iterations"] = r.iterations;
  report["energy"] = r.energy;
  report["grad_norm"] = r.grad_norm;
  report["gradient_tolerance"] = c.relax.gradient_tolerance;
  report["minimality"] = minimality_json(m);
  if (c.dimension == 1 && f.kind == Integrand::Kind::allen_cahn) {
    const Profile1D p = Profile1D::from_field(r.field);
    json prof;
    try {
      const double centre = profile_center(p);
      prof["center"] = centre;
      prof["logistic_error"] = logistic_error(p, centre);
      prof["equipartition_residual"] = equipartition_residual(p);
    } catch (const PreconditionError& e) {
      prof["note"] = e.what();
    }
    report["profile"] = prof;
  }
  const bool passed = r.converged && m.passed();
  report["status"] = status(passed);
  write_json(c.output / "relax_report.json", report);
  out << "relax: " << (r.converged ? "converged" : "not converged") << " after " << r.iterations
      << " iterations, energy " << format_exact(r.energy) << ", minimality " << status(m.passed()) << '\n';
  return passed ? kPass : kFail;
}

int run_classify(const Options& o, std::ostream& out) {
  if (o.field.empty()) throw ConfigError("classify needs --field");
  const ExperimentConfig c = configure(o);
  const Field u = read_field(o.field);
  const RotationFit fit = rotation_fit(u);
  json report;
  report["command"] = "classify";
  report["field"] = o.field.string();
  json rho = json::array();
  for (const auto& r : fit.rho) rho.push_back(std::to_string(r.num) + "/" + std::to_string(r.den));
  report["rotation"] = {{"rho", rho}, {"bound", fit.bound}, {"a1", fit.a1}};

  const auto witnesses = self_intersection_scan(u, c.scan_radius, c.order_tolerance);
  json wj = json::array();
  for (const auto& w : witnesses) wj.push_back(to_json(w, u));
  write_json(c.output / "witnesses.json", wj);
  report["self_intersections"] = witnesses.size();
  if (!witnesses.empty()) {
    report["status"] = "ANOMALY";
    report["message"] = "field crosses its own translates; invariants undefined";
    write_json(c.output / "classify_report.json", report);
    out << "classify: " << witnesses.size() << " self-intersection(s) found\n";
    return kFail;
  }
  try {
    const InvariantSystem sys = extract_invariants(u, c.scan_radius, c.order_tolerance);
    write_json(c.output / "invariants.json", to_json(sys));
    report["invariants"] = to_json(sys);
    report["admissible"] = is_admissible(sys, c.scan_radius);
    report["status"] = "PASS";
    write_json(c.output / "classify_report.json", report);
    out << "classify: t=" << sys.t << '\n';
    return kPass;
  } catch (const ExtractionError& e) {
    report["status"] = "ANOMALY";
    report["message"] = e.what();
    write_json(c.output / "classify_report.json", report);
    out << "classify: extraction failed: " << e.what() << '\n';
    return kFail;
  }
}

int run_foliate(const Options& o, std::ostream& out) {
  const ExperimentConfig c = configure(o);
  const FoliationFamily fam = family_from(c);

  json manifest;
  manifest["omega"] = fam.omega;
  manifest["b_grid"] = fam.b_grid;
  manifest["grid"] = {{"n", fam.grid.dimension}, {"half_length", fam.grid.half_length}, {"h", 1.0 / static_cast<double>(fam.grid.resolution)}};
  manifest["invariants"] = to_json(fam.invariants);
  if (c.write_members) {
    fs::create_directories(c.output / "members");
    json files = json::array();
    for (std::size_t i = 0; i < fam.members.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "member_%03zu.csv", i);
      write_field(c.output / "members" / name, fam.members[i]);
      files.push_back(std::string("members/") + name);
    }
    write_field(c.output / "members" / "lower.csv", fam.lower);
    write_field(c.output / "members" / "upper.csv", fam.upper);
    manifest["members"] = files;
    manifest["lower"] = "members/lower.csv";
    manifest["upper"] = "members/upper.csv";
  }
  write_json(c.output / "family.json", manifest);

  const FoliationReport fr = verify_foliation(fam, c.foliation_tolerance);
  json report;
  report["command"] = "foliate";
  report["seed"] = c.seed;
  report["tolerance"] = c.foliation_tolerance;
  json members = json::array();
  double worst_residual = 0.0;
  for (const auto& chk : fam.checks) {
    members.push_back({{"b", chk.b}, {"residual", chk.residual}, {"minimal", chk.minimal}});
    worst_residual = std::max(worst_residual, chk.residual);
  }
  report["member_checks"] = {{"verified", fam.verified()}, {"worst_residual", worst_residual}, {"members", members}};
  json fj;
  fj["disjoint"] = fr.disjoint;
  fj["bounded"] = fr.bounded;
  fj["covered"] = fr.covered;
  fj["pairs_checked"] = fr.pairs_checked;
  fj["levels_checked"] = fr.levels_checked;
  fj["bracket_extensions"] = fr.bracket_extensions;
  fj["worst_level_error"] = fr.worst_level_error;
  if (fr.overlap) {
    fj["overlap"] = {fr.overlap->first, fr.overlap->second};
    fj["overlap_relation"] = to_json(fr.overlap_relation);
  }
  json samples = json::array();
  for (const auto& s : fr.samples) samples.push_back({{"node", s.node}, {"level", s.level}, {"b", s.b}, {"error", s.error}});
  fj["centre_samples"] = samples;
  fj["message"] = fr.message;
  fj["status"] = status(fr.passed);
  report["foliation"] = fj;

  bool envelopes_ok = false;
  if (fr.disjoint) {
    const EnvelopeIdentityReport er =
        envelope_identity_check(fam, c.envelope_tolerance, c.envelope_steps, c.scan_radius);
    json ej = json::array();
    for (const auto& s : er.samples) {
      ej.push_back({{"b", s.b}, {"lower_error", s.lower_error}, {"upper_error", s.upper_error},
                    {"invariants_match", s.invariants_match}});
    }
    report["envelopes"] = {{"status", status(er.passed)}, {"worst", er.worst}, {"samples", ej}};
    envelopes_ok = er.passed;
  } else {
    report["envelopes"] = {{"status", "SKIPPED"}, {"reason", "family is not disjoint"}};
  }
  const bool passed = fr.passed && envelopes_ok && fam.verified();
  report["status"] = status(passed);
  write_json(c.output / "foliation_report.json", report);
  out << "foliate: " << fam.members.size() << " members, foliation " << status(fr.passed) << ", envelopes "
      << status(envelopes_ok) << '\n';
  return passed ? kPass : kFail;
}

int run_rigidity(const Options& o, std::ostream& out) {
  const ExperimentConfig c = configure(o);
  const FoliationFamily fam = family_from(c);
  json report;
  report["command"] = "rigidity";
  const Field u = subject_field(o, c, report, true);
  const MatchResult m = rigidity_check(u, fam, c.match_tolerance, c.scan_radius);
  report["tolerance"] = c.match_tolerance;
  report["match"] = match_json(m);
  report["status"] = to_string(m.status);
  write_json(c.output / "rigidity_report.json", report);
  out << "rigidity: " << to_string(m.status);
  if (m.status != MatchStatus::not_applicable) out << " b0=" << format_exact(m.b0) << " sup_error=" << format_exact(m.sup_error);
  else out << " (" << m.hypothesis << ")";
  out << '\n';
  return m.matched() ? kPass : kFail;
}

int run_asymptote(const Options& o, std::ostream& out) {
  const ExperimentConfig c = configure(o);
  const FoliationFamily fam = family_from(c);
  json report;
  report["command"] = "asymptote";
  const Field u = subject_field(o, c, report, false);
  const auto& gamma2 = fam.invariants.gamma_bases.at(1);
  json runs = json::array();
  bool passed = true;
  for (const auto& d : c.directions) {
    const AsymptoticResult r = asymptotic_limit(u, fam, gamma2, d, c.asymptote_steps, c.envelope_tolerance, c.scan_radius);
    json j;
    j["direction"] = d;
    j["classification"] = to_string(r.classification);
    j["steps"] = r.steps;
    j["value_change"] = r.value_change;
    j["gradient_change"] = r.gradient_change;
    j["lower_distance"] = r.lower_distance;
    j["upper_distance"] = r.upper_distance;
    if (r.match) j["match"] = match_json(*r.match);
    if (r.closest) {
      j["closest_pair"] = {r.closest->first, r.closest->second};
      j["closest_distance"] = r.closest_distance;
      j["note"] = "no Cauchy tail within the searched steps; this does not show that none exists";
    }
    if (r.classification == LimitClass::unclassified || r.classification == LimitClass::not_found) passed = false;
    runs.push_back(j);
    out << "asymptote: direction";
    for (long k : d) out << ' ' << k;
    out << " -> " << to_string(r.classification) << '\n';
  }
  report["runs"] = runs;
  report["status"] = status(passed);
  write_json(c.output / "asymptote_report.json", report);
  return passed ? kPass : kFail;
}

int run_report(const Options& o, std::ostream& out) {
  if (o.fields.empty()) throw ConfigError("report needs --fields");
  const ExperimentConfig c = configure(o);
  std::vector<Field> fields;
  for (const auto& p : o.fields) fields.push_back(read_field(p));
  const TotalOrderReport r = total_order_check(fields, c.order_tolerance);
  json report;
  report["command"] = "report";
  json files = json::array();
  for (const auto& p : o.fields) files.push_back(p.string());
  report["fields"] = files;
  report["pairs_checked"] = r.pairs_checked;
  json crossings = json::array();
  for (const auto& pr : r.crossings) {
    crossings.push_back({{"i", pr.i},
                         {"j", pr.j},
                         {"relation", to_json(pr.relation)},
                         {"x_above", fields[pr.i].position(pr.relation.witness_above)},
                         {"x_below", fields[pr.i].position(pr.relation.witness_below)}});
  }
  report["crossings"] = crossings;
  report["status"] = r.passed ? "PASS" : "ANOMALY";
  write_json(c.output / "order_report.json", report);
  out << "report: " << r.pairs_checked << " pairs, " << r.crossings.size() << " crossing(s)\n";
  return r.passed ? kPass : kFail;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Periodic variational problems and the Allen-Cahn foliation"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "INI configuration file");
    sub->add_option("--out", o.out, "Output directory (overrides experiment.output)");
    sub->add_option("--seed", seed, "Random seed (overrides experiment.seed)");
  };
  CLI::App* relax_cmd = app.add_subcommand("relax", "Relax an initial field and spot-check minimality");
  CLI::App* classify_cmd = app.add_subcommand("classify", "Self-intersection scan and invariant extraction");
  CLI::App* foliate_cmd = app.add_subcommand("foliate", "Build and verify the logistic foliation");
  CLI::App* rigidity_cmd = app.add_subcommand("rigidity", "Match a field against the foliation");
  CLI::App* asymptote_cmd = app.add_subcommand("asymptote", "Limits of translation sequences");
  CLI::App* report_cmd = app.add_subcommand("report", "Total-order check over a set of fields");
  for (CLI::App* sub : {relax_cmd, classify_cmd, foliate_cmd, rigidity_cmd, asymptote_cmd, report_cmd}) add_common(sub);
  classify_cmd->add_option("--field", o.field, "Field CSV")->required();
  rigidity_cmd->add_option("--field", o.field, "Field CSV (default: relaxed initial field from the config)");
  asymptote_cmd->add_option("--field", o.field, "Field CSV (default: initial field from the config)");
  report_cmd->add_option("--fields", o.fields, "Field CSVs")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kError;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) o.seed = seed;
  }

  try {
    if (relax_cmd->parsed()) return run_relax(o, out);
    if (classify_cmd->parsed()) return run_classify(o, out);
    if (foliate_cmd->parsed()) return run_foliate(o, out);
    if (rigidity_cmd->parsed()) return run_rigidity(o, out);
    if (asymptote_cmd->parsed()) return run_asymptote(o, out);
    if (report_cmd->parsed()) return run_report(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

}  // namespace pmlab::cli
