#pragma once

// File formats shared across modules: anchor CSV, scenario JSON, estimate
// JSON and speed-model JSON.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "srcloc/core.hpp"

namespace srcloc {

using json = nlohmann::json;

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

// -- anchor CSV --------------------------------------------------------------

inline std::string anchors_to_csv(std::span<const AnchorObservation> anchors) {
  std::string out = "x,y,t\n";
  for (const auto& a : anchors) {
    out += format_double(a.position.x) + "," + format_double(a.position.y) + "," + format_double(a.arrival_time) +
           "\n";
  }
  return out;
}

inline std::vector<AnchorObservation> anchors_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<AnchorObservation> out;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "x,y,t") throw Error(ErrorCode::ParseError, "anchor CSV header must be 'x,y,t'");
      header_seen = true;
      continue;
    }
    double v[3];
    std::size_t start = 0;
    for (int k = 0; k < 3; ++k) {
      const std::size_t comma = line.find(',', start);
      const bool last = k == 2;
      if (last != (comma == std::string::npos)) {
        throw Error(ErrorCode::ParseError, "anchor CSV line " + std::to_string(line_no) + " needs 3 fields");
      }
      const std::string field = line.substr(start, last ? std::string::npos : comma - start);
      char* end = nullptr;
      v[k] = std::strtod(field.c_str(), &end);
      if (field.empty() || end != field.c_str() + field.size() || !std::isfinite(v[k])) {
        throw Error(ErrorCode::ParseError, "anchor CSV line " + std::to_string(line_no) + ": bad number '" + field + "'");
      }
      start = comma + 1;
    }
    out.push_back({{v[0], v[1]}, v[2]});
  }
  if (!header_seen) throw Error(ErrorCode::ParseError, "anchor CSV is empty");
  return out;
}

inline std::vector<AnchorObservation> load_anchor_csv(const std::filesystem::path& path) {
  return anchors_from_csv(read_text_file(path));
}

inline void save_anchor_csv(const std::filesystem::path& path, std::span<const AnchorObservation> anchors) {
  write_text_file(path, anchors_to_csv(anchors));
}

// -- speed model / medium ------------------------------------------------------

inline json speed_model_to_json(const SpeedModel& m) {
  json fourier = json::array();
  for (const auto& f : m.fourier) fourier.push_back({f.omega, f.b, f.d});
  return {{"taylor", m.taylor}, {"fourier", fourier}};
}

inline SpeedModel speed_model_from_json(const json& j) {
  try {
    SpeedModel m;
    m.taylor = j.at("taylor").get<std::vector<double>>();
    if (m.taylor.empty()) throw Error(ErrorCode::ParseError, "speed model needs at least one Taylor coefficient");
    m.fourier.clear();
    if (j.contains("fourier")) {
      for (const auto& t : j.at("fourier")) {
        if (t.is_array()) {
          if (t.size() != 3) throw Error(ErrorCode::ParseError, "Fourier term must be [omega, b, d]");
          m.fourier.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
        } else {
          m.fourier.push_back({t.at("omega").get<double>(), t.at("b").get<double>(), t.at("d").get<double>()});
        }
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("speed model: ") + e.what());
  }
}

inline json medium_to_json(const Medium& medium) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IsotropicKnown>) {
          return {{"type", "isotropic_known"}, {"params", {{"c", m.c}}}};
        } else if constexpr (std::is_same_v<T, IsotropicUnknown>) {
          return {{"type", "isotropic_unknown"}, {"params", {{"c", m.c}}}};
        } else {
          return {{"type", "anisotropic"}, {"params", speed_model_to_json(m.model)}};
        }
      },
      medium);
}

inline Medium medium_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  const auto& params = j.at("params");
  if (type == "isotropic_known") return IsotropicKnown{params.at("c").get<double>()};
  if (type == "isotropic_unknown") return IsotropicUnknown{params.at("c").get<double>()};
  if (type == "anisotropic") return Anisotropic{speed_model_from_json(params)};
  throw Error(ErrorCode::ParseError, "unknown medium type '" + type + "'");
}

// -- scenario ------------------------------------------------------------------

inline json scenario_to_json(const Scenario& s) {
  json anchors = json::array();
  for (const auto& a : s.anchors) anchors.push_back({a.position.x, a.position.y, a.arrival_time});
  return {{"source", {s.source.x, s.source.y}},
          {"start_time", s.start_time},
          {"medium", medium_to_json(s.medium)},
          {"noise_sigma", s.noise_sigma},
          {"anchors", anchors},
          {"unit_label", s.unit_label}};
}

inline Scenario scenario_from_json(const json& j) {
  try {
    Scenario s;
    const auto src = j.at("source").get<std::vector<double>>();
    if (src.size() != 2) throw Error(ErrorCode::ParseError, "scenario source must be [x, y]");
    s.source = {src[0], src[1]};
    s.start_time = j.at("start_time").get<double>();
    s.medium = medium_from_json(j.at("medium"));
    s.noise_sigma = j.value("noise_sigma", 0.0);
    s.unit_label = j.value("unit_label", std::string("unit"));
    for (const auto& a : j.at("anchors")) {
      if (a.size() != 3) throw Error(ErrorCode::ParseError, "scenario anchor must be [x, y, t]");
      s.anchors.push_back({{a[0].get<double>(), a[1].get<double>()}, a[2].get<double>()});
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scenario: ") + e.what());
  }
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(parse_json(read_text_file(path), path.string()));
}

inline void save_scenario(const std::filesystem::path& path, const Scenario& s) {
  write_text_file(path, scenario_to_json(s).dump(2) + "\n");
}

// -- estimate ------------------------------------------------------------------

inline json estimate_to_json(const Estimate& e) {
  return {{"solver", std::string(solver_name(e.solver))},
          {"source", {e.source.x, e.source.y}},
          {"t0", e.start_time},
          {"speed_model", speed_model_to_json(e.speed)},
          {"objective_value", e.objective_value},
          {"converged", e.converged},
          {"iterations", e.iterations}};
}

inline Estimate estimate_from_json(const json& j) {
  try {
    Estimate e;
    e.solver = parse_solver_kind(j.at("solver").get<std::string>());
    const auto src = j.at("source").get<std::vector<double>>();
    e.source = {src.at(0), src.at(1)};
    e.start_time = j.at("t0").get<double>();
    e.speed = speed_model_from_json(j.at("speed_model"));
    e.objective_value = j.at("objective_value").get<double>();
    e.converged = j.at("converged").get<bool>();
    e.iterations = j.at("iterations").get<std::size_t>();
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("estimate: ") + ex.what());
  }
}

}  // namespace srcloc
