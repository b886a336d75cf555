#include "pmlab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pmlab/errors.hpp"

namespace pmlab {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"experiment", {"command", "integrand", "seed", "output"}},
      {"grid", {"n", "h", "half_length"}},
      {"relax",
       {"max_iterations", "gradient_tolerance", "step_rule", "initial_step", "clamp_min", "clamp_max", "log_every"}},
      {"initial", {"kind", "value", "low", "high", "b", "bump_amplitude", "bump_radius", "file"}},
      {"tolerances", {"order", "foliation", "match", "envelope"}},
      {"scan", {"radius"}},
      {"spot", {"trials", "radius", "amplitude"}},
      {"family", {"omega", "b_min", "b_max", "count", "b_grid", "write_members", "verify_members"}},
      {"envelope", {"steps"}},
      {"asymptote", {"directions", "steps"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <class T>
  void get(const std::string& key, T& target) const {
    const auto node = tree_.get_child_optional(pt::ptree::path_type(key, '.'));
    if (!node) return;
    const std::string raw = trim(node->data());
    std::istringstream in(raw);
    T value{};
    if constexpr (std::is_same_v<T, bool>) {
      if (raw == "true" || raw == "1") {
        value = true;
      } else if (raw == "false" || raw == "0") {
        value = false;
      } else {
        fail(key, raw);
      }
    } else {
      in >> value;
      if (in.fail() || !in.eof()) fail(key, raw);
    }
    target = value;
  }

  std::optional<std::string> text(const std::string& key) const {
    const auto node = tree_.get_child_optional(pt::ptree::path_type(key, '.'));
    if (!node) return std::nullopt;
    return trim(node->data());
  }

  [[noreturn]] static void fail(const std::string& key, const std::string& raw) {
    throw ConfigError("invalid value '" + raw + "' for " + key);
  }

 private:
  const pt::ptree& tree_;
};

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
  std::vector<T> out;
  for (const auto& item : split(raw, ',')) {
    std::istringstream in(item);
    T v{};
    in >> v;
    if (in.fail() || !in.eof()) Reader::fail(key, raw);
    out.push_back(v);
  }
  return out;
}

void require_positive(double value, const std::string& key) {
  if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError(key + " must be a positive number");
}

}  // namespace

long ExperimentConfig::resolution() const {
  const long m = std::lround(1.0 / spacing);
  if (!(spacing > 0.0) || m < 4 || std::abs(1.0 / static_cast<double>(m) - spacing) > 1e-12) {
    throw ConfigError("grid.h must be 1/m with integer m >= 4 (got " + std::to_string(spacing) + ")");
  }
  return m;
}

std::vector<Axis> ExperimentConfig::layout() const {
  std::vector<Axis> axes;
  axes.push_back(Axis::box(-half_length, half_length, resolution()));
  for (std::size_t i = 1; i < dimension; ++i) axes.push_back(Axis::periodic(1, resolution(), 0));
  return axes;
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (body.empty()) throw ConfigError("config key '" + section + "' must live in a [section]");
      throw ConfigError("unknown config section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError("unknown config key " + section + "." + key);
    }
  }

  ExperimentConfig c;
  const Reader r(tree);
  if (auto v = r.text("experiment.command")) c.command = *v;
  if (auto v = r.text("experiment.integrand")) c.integrand = *v;
  r.get("experiment.seed", c.seed);
  if (auto v = r.text("experiment.output")) c.output = *v;

  r.get("grid.n", c.dimension);
  r.get("grid.h", c.spacing);
  r.get("grid.half_length", c.half_length);

  r.get("relax.max_iterations", c.relax.max_iterations);
  r.get("relax.gradient_tolerance", c.relax.gradient_tolerance);
  if (auto v = r.text("relax.step_rule")) {
    if (*v == "fixed") {
      c.relax.step_rule = StepRule::fixed;
    } else if (*v == "adaptive") {
      c.relax.step_rule = StepRule::adaptive;
    } else {
      Reader::fail("relax.step_rule", *v);
    }
  }
  r.get("relax.initial_step", c.relax.initial_step);
  r.get("relax.log_every", c.relax.log_every);
  const bool has_min = r.text("relax.clamp_min").has_value();
  const bool has_max = r.text("relax.clamp_max").has_value();
  if (has_min != has_max) throw ConfigError("relax.clamp_min and relax.clamp_max must be given together");
  if (has_min) {
    std::pair<double, double> clamp;
    r.get("relax.clamp_min", clamp.first);
    r.get("relax.clamp_max", clamp.second);
    c.relax.clamp = clamp;
  }

  if (auto v = r.text("initial.kind")) c.initial = *v;
  r.get("initial.value", c.initial_value);
  r.get("initial.low", c.ramp_low);
  r.get("initial.high", c.ramp_high);
  r.get("initial.b", c.member_b);
  r.get("initial.bump_amplitude", c.bump_amplitude);
  r.get("initial.bump_radius", c.bump_radius);
  if (auto v = r.text("initial.file")) c.initial_file = *v;

  r.get("tolerances.order", c.order_tolerance);
  r.get("tolerances.foliation", c.foliation_tolerance);
  r.get("tolerances.match", c.match_tolerance);
  r.get("tolerances.envelope", c.envelope_tolerance);

  r.get("scan.radius", c.scan_radius);
  r.get("spot.trials", c.spot_trials);
  r.get("spot.radius", c.spot_radius);
  r.get("spot.amplitude", c.spot_amplitude);

  if (auto v = r.text("family.omega")) c.omega = parse_list<double>("family.omega", *v);
  r.get("family.b_min", c.b_min);
  r.get("family.b_max", c.b_max);
  r.get("family.count", c.family_count);
  if (auto v = r.text("family.b_grid")) c.b_grid = parse_list<double>("family.b_grid", *v);
  r.get("family.write_members", c.write_members);
  r.get("family.verify_members", c.verify_members);

  r.get("envelope.steps", c.envelope_steps);
  if (auto v = r.text("asymptote.directions")) {
    for (const auto& item : split(*v, ';')) c.directions.push_back(parse_list<long>("asymptote.directions", item));
  }
  r.get("asymptote.steps", c.asymptote_steps);

  // Validation.
  c.resolution();
  if (c.dimension < 1) throw ConfigError("grid.n must be >= 1");
  require_positive(c.half_length, "grid.half_length");
  require_positive(c.relax.gradient_tolerance, "relax.gradient_tolerance");
  require_positive(c.order_tolerance, "tolerances.order");
  require_positive(c.foliation_tolerance, "tolerances.foliation");
  require_positive(c.match_tolerance, "tolerances.match");
  require_positive(c.envelope_tolerance, "tolerances.envelope");
  require_positive(c.spot_radius, "spot.radius");
  require_positive(c.spot_amplitude, "spot.amplitude");
  require_positive(c.bump_radius, "initial.bump_radius");
  if (c.relax.clamp && !(c.relax.clamp->first < c.relax.clamp->second)) {
    throw ConfigError("relax.clamp_min must be below relax.clamp_max");
  }
  if (c.relax.log_every == 0) throw ConfigError("relax.log_every must be positive");
  if (c.scan_radius < 1) throw ConfigError("scan.radius must be >= 1");
  if (c.omega.empty()) {
    c.omega.assign(c.dimension, 0.0);
    c.omega[0] = 1.0;
  }
  if (c.omega.size() != c.dimension) throw ConfigError("family.omega needs n entries");
  for (const auto& d : c.directions) {
    if (d.size() != c.dimension + 1) throw ConfigError("asymptote.directions entries need n+1 integers");
  }
  if (c.directions.empty()) {
    IntVec d(c.dimension + 1, 0);
    d[0] = -1;
    c.directions.push_back(d);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace pmlab
