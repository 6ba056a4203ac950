#pragma once

// File formats: patient registry JSON, controller spec JSON (best.json),
// trajectory / history CSV and metrics JSON.

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doa/control.hpp"
#include "doa/error.hpp"
#include "doa/patient.hpp"
#include "doa/simloop.hpp"

namespace doa {

using json = nlohmann::json;

namespace detail {

inline std::string record_label(std::size_t index, const json& rec) {
  std::string label = "record " + std::to_string(index);
  if (rec.is_object() && rec.contains("id") && rec["id"].is_number_integer())
    label += " (id " + std::to_string(rec["id"].get<long long>()) + ")";
  return label;
}

inline double number_field(const json& rec, const char* key, const std::string& label,
                           std::optional<double> fallback = std::nullopt) {
  if (!rec.contains(key)) {
    if (fallback) return *fallback;
    throw ParseError(label + ": missing field '" + key + "'");
  }
  const json& v = rec[key];
  if (!v.is_number()) throw ParseError(label + ": field '" + key + "' must be a number");
  return v.get<double>();
}

}  // namespace detail

/// Parses a registry: a nonempty JSON array of
/// {id, age, weight_kg, height_cm, sex, ke0, ec50, gamma, bis0}.
/// The four PD constants are optional and default to the nominal values.
inline std::vector<PatientProfile> parse_patient_registry(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("registry is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("registry must be a JSON array of patient records");
  if (doc.empty()) throw ParseError("registry contains no patient records");

  const PatientProfile defaults;
  std::vector<PatientProfile> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& rec = doc[i];
    const std::string label = detail::record_label(i, rec);
    if (!rec.is_object()) throw ParseError(label + ": must be an object");
    PatientProfile p;
    if (!rec.contains("id") || !rec["id"].is_number_integer())
      throw ParseError(label + ": field 'id' must be an integer");
    p.id = rec["id"].get<int>();
    p.age = detail::number_field(rec, "age", label);
    p.weight = detail::number_field(rec, "weight_kg", label);
    p.height = detail::number_field(rec, "height_cm", label);
    if (!rec.contains("sex") || !rec["sex"].is_string())
      throw ParseError(label + ": field 'sex' must be \"male\" or \"female\"");
    try {
      p.sex = parse_sex(rec["sex"].get<std::string>());
    } catch (const ParseError& e) {
      throw ParseError(label + ": field 'sex': " + e.what());
    }
    p.ke0 = detail::number_field(rec, "ke0", label, defaults.ke0);
    p.ec50 = detail::number_field(rec, "ec50", label, defaults.ec50);
    p.gamma = detail::number_field(rec, "gamma", label, defaults.gamma);
    p.bis0 = detail::number_field(rec, "bis0", label, defaults.bis0);
    validate_profile(p);
    (void)derive_pk_params(p);
    out.push_back(p);
  }
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<PatientProfile> load_patient_registry(const std::string& path) {
  return parse_patient_registry(read_text_file(path));
}

inline json registry_to_json(const std::vector<PatientProfile>& reg) {
  json arr = json::array();
  for (const auto& p : reg)
    arr.push_back({{"id", p.id},
                   {"age", p.age},
                   {"weight_kg", p.weight},
                   {"height_cm", p.height},
                   {"sex", std::string(to_string(p.sex))},
                   {"ke0", p.ke0},
                   {"ec50", p.ec50},
                   {"gamma", p.gamma},
                   {"bis0", p.bis0}});
  return arr;
}

inline json fuzzy_to_json(const FuzzySystem& f) {
  auto centers = [](const TriPartition& p) {
    return std::vector<double>(p.centers.begin(), p.centers.end());
  };
  json rules = json::array();
  for (const auto& grid : f.rules.consequents) {
    json g = json::array();
    for (const auto& row : grid) g.push_back(std::vector<int>(row.begin(), row.end()));
    rules.push_back(g);
  }
  return {{"ge", f.ge},
          {"gde", f.gde},
          {"gp", f.gp},
          {"gi", f.gi},
          {"gd", f.gd},
          {"e_centers", centers(f.e_part)},
          {"de_centers", centers(f.de_part)},
          {"out_centers",
           {centers(f.out_parts[0]), centers(f.out_parts[1]), centers(f.out_parts[2])}},
          {"rules", rules}};
}

/// Human-readable decoded spec. The gene vector is the reload source of truth.
inline json spec_to_json(const ControllerSpec& s) {
  json j = {{"variant", std::string(to_string(s.variant))},
            {"kp", s.kp},
            {"ki", s.ki},
            {"kd", s.kd},
            {"alpha", s.alpha},
            {"beta", s.beta},
            {"u_max", s.u_max},
            {"sample_time_min", s.sample_time},
            {"memory_len", s.memory_len}};
  if (s.fuzzy) j["fuzzy"] = fuzzy_to_json(*s.fuzzy);
  return j;
}

struct StoredSpec {
  Variant variant;
  std::vector<double> genes;
  ControllerSpec spec;
  std::optional<double> cost;
};

/// Reads the `controller` and `genes` fields of a best.json-style document
/// and decodes them. `spec.u_max` / `spec.memory_len` are honored if present.
inline StoredSpec parse_stored_spec(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("spec file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("controller") || !doc["controller"].is_string())
    throw ParseError("spec file: missing string field 'controller'");
  if (!doc.contains("genes") || !doc["genes"].is_array())
    throw ParseError("spec file: missing array field 'genes'");
  StoredSpec out;
  out.variant = parse_variant(doc["controller"].get<std::string>());
  for (const auto& g : doc["genes"]) {
    if (!g.is_number()) throw ParseError("spec file: 'genes' must contain numbers");
    out.genes.push_back(g.get<double>());
  }
  ControllerSpec base;
  if (doc.contains("spec") && doc["spec"].is_object()) {
    const json& s = doc["spec"];
    if (s.contains("u_max") && s["u_max"].is_number()) base.u_max = s["u_max"].get<double>();
    if (s.contains("memory_len") && s["memory_len"].is_number_unsigned())
      base.memory_len = s["memory_len"].get<std::size_t>();
  }
  out.spec = decode_controller_genes(out.variant, out.genes, base);
  if (doc.contains("cost") && doc["cost"].is_number()) out.cost = doc["cost"].get<double>();
  return out;
}

inline StoredSpec load_stored_spec(const std::string& path) {
  return parse_stored_spec(read_text_file(path));
}

inline json metrics_to_json(const Metrics& m) {
  return {{"iae", m.iae},
          {"itae", m.itae},
          {"cost", m.cost},
          {"settling_time_min", m.settling_time},
          {"settled", m.settled},
          {"steady_state_error", m.steady_state_error},
          {"min_bis", m.min_bis},
          {"time_in_band", m.time_in_band}};
}

namespace detail {
inline void put_number(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  os << buf;
}
}  // namespace detail

inline constexpr const char* kTrajectoryHeader = "t_min,bis,ce,cp,x1,x2,x3,u,kp,ki,kd";

inline void write_trajectory_csv(std::ostream& os, const SimResult& r) {
  os << kTrajectoryHeader << '\n';
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double row[] = {r.t[k], r.bis[k], r.ce[k], r.cp[k], r.x1[k], r.x2[k],
                          r.x3[k], r.u[k],   r.kp[k], r.ki[k], r.kd[k]};
    for (std::size_t c = 0; c < std::size(row); ++c) {
      if (c) os << ',';
      detail::put_number(os, row[c]);
    }
    os << '\n';
  }
}

inline void write_history_csv(std::ostream& os, const std::vector<double>& history) {
  os << "iteration,best_cost\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    os << i << ',';
    detail::put_number(os, history[i]);
    os << '\n';
  }
}

}  // namespace doa
