#include "pmlab/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pmlab/errors.hpp"

namespace pmlab {

std::string format_exact(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

nlohmann::json layout_to_json(const Field& u) {
  nlohmann::json j;
  j["n"] = u.dimension();
  auto cell = nlohmann::json::array();
  auto h = nlohmann::json::array();
  auto slope = nlohmann::json::array();
  auto axes = nlohmann::json::array();
  for (const auto& a : u.axes()) {
    h.push_back(a.spacing());
    const Rational rho = a.slope();
    slope.push_back(rho.value());
    nlohmann::json aj;
    aj["resolution"] = a.resolution;
    aj["first"] = a.first;
    aj["count"] = a.count;
    if (a.is_box()) {
      cell.push_back(static_cast<double>(a.count - 1) * a.spacing());
      aj["kind"] = "box";
    } else {
      cell.push_back(a.period);
      aj["kind"] = "periodic";
      aj["period"] = a.period;
      aj["rise"] = a.rise;
    }
    axes.push_back(aj);
  }
  j["cell"] = cell;
  j["h"] = h;
  j["slope"] = slope;
  j["axes"] = axes;
  return j;
}

std::vector<Axis> axes_from_json(const nlohmann::json& j) {
  std::vector<Axis> axes;
  try {
    for (const auto& aj : j.at("axes")) {
      const long m = aj.at("resolution").get<long>();
      const std::string kind = aj.at("kind").get<std::string>();
      if (kind == "box") {
        axes.push_back(Axis::box_nodes(aj.at("first").get<long>(), aj.at("count").get<long>(), m));
      } else if (kind == "periodic") {
        Axis a = Axis::periodic(aj.at("period").get<long>(), m, aj.at("rise").get<long>());
        a.first = aj.at("first").get<long>();
        axes.push_back(a);
      } else {
        throw IoError("unknown axis kind '" + kind + "'");
      }
    }
    if (j.at("n").get<std::size_t>() != axes.size()) throw IoError("sidecar n disagrees with axes");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed field sidecar: ") + e.what());
  }
  return axes;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

void write_field(const std::filesystem::path& csv, const Field& u) {
  std::ofstream out(csv);
  if (!out) throw IoError("cannot open " + csv.string() + " for writing");
  for (std::size_t i = 0; i < u.dimension(); ++i) out << 'x' << (i + 1) << ',';
  out << "u\n";
  const auto values = u.values();
  for (std::size_t flat = 0; flat < u.size(); ++flat) {
    const IntVec g = u.global_index(flat);
    for (std::size_t i = 0; i < g.size(); ++i) out << format_exact(u.axis(i).position(g[i])) << ',';
    out << format_exact(values[flat] + static_cast<double>(u.lift())) << '\n';
  }
  if (!out) throw IoError("write failed: " + csv.string());
  std::ofstream side(sidecar_path(csv));
  if (!side) throw IoError("cannot write sidecar for " + csv.string());
  side << layout_to_json(u).dump(2) << '\n';
}

Field read_field(const std::filesystem::path& csv) {
  std::ifstream side(sidecar_path(csv));
  if (!side) throw IoError("missing sidecar " + sidecar_path(csv).string());
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed field sidecar: ") + e.what());
  }
  std::vector<Axis> axes = axes_from_json(meta);
  Field layout = Field::constant(axes, 0.0);

  std::ifstream in(csv);
  if (!in) throw IoError("cannot open " + csv.string());
  std::string line;
  std::getline(in, line);
  std::string expected;
  for (std::size_t i = 0; i < axes.size(); ++i) expected += "x" + std::to_string(i + 1) + ",";
  expected += "u";
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) throw IoError("unexpected CSV header '" + line + "'");

  std::vector<double> values;
  values.reserve(layout.size());
  const std::size_t columns = axes.size() + 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::size_t column = 0;
    double last = 0.0;
    while (std::getline(row, cell, ',')) {
      char* end = nullptr;
      last = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw IoError("non-numeric CSV entry '" + cell + "'");
      ++column;
    }
    if (column != columns) throw IoError("CSV row has " + std::to_string(column) + " columns");
    values.push_back(last);
  }
  if (values.size() != layout.size()) {
    throw IoError("CSV has " + std::to_string(values.size()) + " rows, sidecar describes " +
                  std::to_string(layout.size()));
  }
  return layout.with_values(std::move(values));
}

}  // namespace pmlab
