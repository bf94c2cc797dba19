#pragma once

// File formats used by the command-line tool: points (JSON), results (JSON)
// and per-iteration traces (CSV). Requires the vendored nlohmann json.hpp.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hypersc/meb.hpp"

namespace hypersc::io {

using nlohmann::json;

/// Malformed or unreadable input; messages name the offending point index.
class InputError : public UsageError {
 public:
  using UsageError::UsageError;
};

// ---------------------------------------------------------------------------
// JSON writer with fixed %.17g numbers, so reruns are byte-identical.

inline std::string format_double(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

namespace detail {

inline void write_json(std::ostream& os, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << json(it.key()).dump() << (indent > 0 ? ": " : ":");
        write_json(os, it.value(), indent, depth + 1);
      }
      os << nl << close_pad << '}';
      return;
    }
    case json::value_t::array: {
      // Numeric arrays stay on one line.
      bool flat = true;
      for (const auto& e : j) flat = flat && e.is_number();
      os << '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << (flat ? ", " : ",");
        if (!flat) os << nl << pad;
        first = false;
        write_json(os, e, indent, depth + 1);
      }
      if (!flat && !j.empty()) os << nl << close_pad;
      os << ']';
      return;
    }
    case json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

}  // namespace detail

inline void write_json(std::ostream& os, const json& j, int indent = 2) {
  detail::write_json(os, j, indent, 0);
  os << '\n';
}

inline std::string dump_json(const json& j, int indent = 2) {
  std::ostringstream os;
  write_json(os, j, indent);
  return os.str();
}

inline json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

// ---------------------------------------------------------------------------
// Points

enum class PointModel { Hyperboloid, Tangent };

struct PointsFile {
  PointModel model = PointModel::Hyperboloid;
  double kappa = 1.0;
  int dim = 0;
  std::vector<HPoint> points;
};

inline const char* to_string(PointModel m) { return m == PointModel::Hyperboloid ? "hyperboloid" : "tangent"; }

/// "hyperboloid": ambient coordinates (dim + 1 each) on the sheet.
/// "tangent": frame coordinates at the apex (dim each, kappa-metric units),
/// mapped through exp, so |v| is the distance from the apex.
inline PointsFile parse_points(const json& j) {
  if (!j.is_object()) throw InputError("points: top level must be an object");
  for (const char* key : {"model", "kappa", "dim", "points"}) {
    if (!j.contains(key)) throw InputError(std::string("points: missing field \"") + key + "\"");
  }
  PointsFile pf;
  if (!j["model"].is_string()) throw InputError("points: \"model\" must be a string");
  const std::string model = j["model"].get<std::string>();
  if (model == "hyperboloid") {
    pf.model = PointModel::Hyperboloid;
  } else if (model == "tangent") {
    pf.model = PointModel::Tangent;
  } else {
    throw InputError("points: unknown model \"" + model + "\" (expected hyperboloid or tangent)");
  }
  if (!j["kappa"].is_number() || !(j["kappa"].get<double>() > 0.0) || !std::isfinite(j["kappa"].get<double>())) {
    throw InputError("points: \"kappa\" must be a positive number");
  }
  pf.kappa = j["kappa"].get<double>();
  if (!j["dim"].is_number_integer() || j["dim"].get<long>() < 1) throw InputError("points: \"dim\" must be a positive integer");
  pf.dim = static_cast<int>(j["dim"].get<long>());
  if (!j["points"].is_array() || j["points"].empty()) throw InputError("points: \"points\" must be a non-empty array");

  const std::size_t want = pf.model == PointModel::Hyperboloid ? pf.dim + 1 : pf.dim;
  const HPoint apex = HPoint::apex(pf.dim, pf.kappa);
  const TangentFrame frame{ProductPoint(apex)};
  for (std::size_t i = 0; i < j["points"].size(); ++i) {
    const json& p = j["points"][i];
    const std::string where = "point " + std::to_string(i) + ": ";
    if (!p.is_array() || p.size() != want) {
      throw InputError(where + "expected an array of " + std::to_string(want) + " numbers");
    }
    Vec v(static_cast<Eigen::Index>(want));
    for (std::size_t k = 0; k < want; ++k) {
      if (!p[k].is_number()) throw InputError(where + "coordinate " + std::to_string(k) + " is not a number");
      v[static_cast<Eigen::Index>(k)] = p[k].get<double>();
    }
    if (!v.allFinite()) throw InputError(where + "non-finite coordinate");
    try {
      if (pf.model == PointModel::Hyperboloid) {
        pf.points.emplace_back(v, pf.kappa);
      } else {
        pf.points.push_back(exp(apex, frame.tangent(v).h));
      }
    } catch (const std::exception& e) {
      throw InputError(where + e.what());
    }
  }
  return pf;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline PointsFile read_points(const std::string& path) { return parse_points(read_json_file(path)); }

inline json points_to_json(const PointsFile& pf) {
  json j;
  j["model"] = "hyperboloid";
  j["kappa"] = pf.kappa;
  j["dim"] = pf.dim;
  j["points"] = json::array();
  for (const auto& p : pf.points) j["points"].push_back(vec_to_json(p.coords()));
  return j;
}

// ---------------------------------------------------------------------------
// Results

struct ResultFile {
  std::string method;
  Vec center;
  double kappa = 1.0;
  double radius = 0.0;
  double s = 0.0;
  double gap_certificate = 0.0;
  double radius_certificate = 0.0;
  int centering_iterations = 0;
  long path_iterations = 0;
  json config_echo = json::object();
};

inline ResultFile to_result(const MebSolution& sol, json config_echo) {
  ResultFile r;
  r.method = sol.method;
  r.center = sol.center.coords();
  r.kappa = sol.center.kappa();
  r.radius = sol.radius;
  r.s = sol.s;
  r.gap_certificate = sol.gap_certificate;
  r.radius_certificate = sol.radius_certificate;
  r.centering_iterations = sol.centering_iterations;
  r.path_iterations = sol.path_iterations;
  r.config_echo = std::move(config_echo);
  return r;
}

inline json result_to_json(const ResultFile& r) {
  json j;
  j["method"] = r.method;
  j["kappa"] = r.kappa;
  j["center"] = vec_to_json(r.center);
  j["radius"] = r.radius;
  j["s"] = r.s;
  j["gap_certificate"] = r.gap_certificate;
  j["radius_certificate"] = r.radius_certificate;
  j["iterations"] = {{"centering", r.centering_iterations}, {"path", r.path_iterations}};
  j["config_echo"] = r.config_echo;
  return j;
}

inline ResultFile result_from_json(const json& j) {
  try {
    ResultFile r;
    r.method = j.at("method").get<std::string>();
    r.kappa = j.at("kappa").get<double>();
    const auto& c = j.at("center");
    r.center.resize(static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) r.center[static_cast<Eigen::Index>(i)] = c[i].get<double>();
    r.radius = j.at("radius").get<double>();
    r.s = j.at("s").get<double>();
    r.gap_certificate = j.at("gap_certificate").get<double>();
    r.radius_certificate = j.at("radius_certificate").get<double>();
    r.centering_iterations = j.at("iterations").at("centering").get<int>();
    r.path_iterations = j.at("iterations").at("path").get<long>();
    r.config_echo = j.value("config_echo", json::object());
    return r;
  } catch (const json::exception& e) {
    throw InputError(std::string("result: ") + e.what());
  }
}

inline ResultFile read_result(const std::string& path) { return result_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Trace CSV: iter,phase,t,lambda,objective,gap_bound (gap_bound empty while centering)

inline void write_trace_csv(std::ostream& os, const PathTrace& trace) {
  os << "iter,phase,t,lambda,objective,gap_bound\n";
  for (const auto& r : trace) {
    os << r.iter << ',' << r.phase << ',' << format_double(r.t) << ',' << format_double(r.lambda) << ','
       << format_double(r.objective) << ',';
    if (r.gap_bound) os << format_double(*r.gap_bound);
    os << '\n';
  }
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << content;
  if (!out) throw InputError("failed writing " + path);
}

}  // namespace hypersc::io
