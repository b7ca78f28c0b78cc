// JSON run configuration for the command-line tool.
//
// {
//   "plant":  { "inertia": [9 numbers, row-major], "reference_vectors": [[x,y,z], ...],
//               "desired_attitude": [q0,q1,q2,q3] },
//   "gains":  { "kappa": [14 numbers] }
//          or { "rho": [...], "lambda": [[9 numbers], ...], "poly": [[a0,a1,a2], ...] },
//   "sim":    { "dt": 0.01, "t_final": 20, "initial_attitude": [q0,q1,q2,q3]
//               or "initial_euler_deg": [roll,pitch,yaw], "initial_omega": [x,y,z],
//               "initial_filter": "measured" or [[x,y,z], ...] },
//   "tuning": { "kind": "ISE", "sigma": 0.1, "n_starts": 8, "seed": 1, "threads": 1,
//               "max_iterations": 500, "tolerance": 1e-4, "initial_kappa": [14 numbers],
//               "bounds": { "lower": [14], "upper": [14] }, "write_trajectory": false },
//   "output": { "dir": "out" }
// }
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "json_positions.hpp"
#include "vecstab/vecstab.hpp"

namespace vecstab::cli {

using nlohmann::json;

struct TuningSettings {
  ObjectiveKind kind = ObjectiveKind::ise;
  double sigma = 0.1;
  std::size_t n_starts = 8;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  int max_iterations = 500;
  double tolerance = 1e-4;
  ParamVector initial_kappa = presets::initial_kappa();
  Bounds bounds = presets::default_bounds();
  bool write_trajectory = false;
};

struct RunConfig {
  explicit RunConfig(PlantConfig p) : plant(std::move(p)) {}

  PlantConfig plant;
  std::optional<GainSet> gains;
  double dt = 0.01;
  double t_final = 20.0;
  UnitQuaternion initial_attitude;
  Vec3 initial_omega;
  std::optional<std::vector<Vec3>> initial_filter;  // empty: b̂(0) = b(0)
  TuningSettings tuning;
  std::string out_dir = "out";

  const GainSet& require_gains() const {
    if (!gains) throw ConfigError("gains: section is required for this command");
    return *gains;
  }

  SimConfig sim_config(const GainSet& g) const {
    SimConfig cfg{plant, g, dt, t_final, make_initial_state(plant, initial_attitude, initial_omega, initial_filter)};
    cfg.validate();
    return cfg;
  }
};

/// Configuration error carrying the JSON path and, when known, its text position.
class FieldError : public ConfigError {
 public:
  FieldError(const std::string& path, const std::string& what) : ConfigError(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

namespace detail {

inline std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

inline std::string at(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

inline const json& require(const json& obj, const std::string& base, const std::string& key) {
  if (!obj.is_object()) throw FieldError(base, "expected an object");
  if (!obj.contains(key)) throw FieldError(join(base, key), "missing required field");
  return obj.at(key);
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw FieldError(path, "expected a number");
  return j.get<double>();
}

inline std::vector<double> numbers(const json& j, const std::string& path, std::size_t expected) {
  if (!j.is_array()) throw FieldError(path, "expected an array of " + std::to_string(expected) + " numbers");
  if (j.size() != expected)
    throw FieldError(path, "expected " + std::to_string(expected) + " numbers, got " + std::to_string(j.size()));
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], at(path, i)));
  return out;
}

inline Vec3 vec3(const json& j, const std::string& path) {
  const auto v = numbers(j, path, 3);
  return Vec3{v[0], v[1], v[2]};
}

inline Mat3 mat3(const json& j, const std::string& path) {
  const auto v = numbers(j, path, 9);
  Mat3 m;
  for (std::size_t i = 0; i < 9; ++i) m.a[i] = v[i];
  return m;
}

inline UnitQuaternion quaternion(const json& j, const std::string& path) {
  const auto v = numbers(j, path, 4);
  const UnitQuaternion q{v[0], Vec3{v[1], v[2], v[3]}};
  if (std::fabs(q.norm() - 1.0) > 1e-6) throw FieldError(path, "quaternion must have unit norm (within 1e-6)");
  return q.renormalized();
}

inline std::vector<Vec3> vec3_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw FieldError(path, "expected an array of 3-vectors");
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(vec3(j[i], at(path, i)));
  return out;
}

inline ParamVector kappa(const json& j, const std::string& path) {
  const auto v = numbers(j, path, kParamCount);
  ParamVector k{};
  for (std::size_t i = 0; i < kParamCount; ++i) {
    if (!(v[i] > 0.0)) throw FieldError(at(path, i), std::string("entry ") + param_names()[i] + " must be positive");
    k[i] = v[i];
  }
  return k;
}

inline void reject_unknown(const json& obj, const std::string& base, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw FieldError(join(base, key), "unknown field");
  }
}

inline PlantConfig parse_plant(const json& root) {
  const json& p = require(root, "", "plant");
  if (!p.is_object()) throw FieldError("plant", "expected an object");
  reject_unknown(p, "plant", {"inertia", "reference_vectors", "desired_attitude"});
  const Mat3 inertia = mat3(require(p, "plant", "inertia"), "plant.inertia");
  const auto refs = vec3_list(require(p, "plant", "reference_vectors"), "plant.reference_vectors");
  const UnitQuaternion qd = p.contains("desired_attitude")
                                ? quaternion(p.at("desired_attitude"), "plant.desired_attitude")
                                : UnitQuaternion::identity();
  return PlantConfig::make(inertia, refs, qd);
}

inline GainSet parse_gains(const json& g, std::size_t n) {
  if (!g.is_object()) throw FieldError("gains", "expected an object");
  reject_unknown(g, "gains", {"kappa", "rho", "lambda", "poly"});
  if (g.contains("kappa")) {
    if (g.contains("rho") || g.contains("lambda") || g.contains("poly"))
      throw FieldError("gains", "give either kappa or rho/lambda/poly, not both");
    if (n != 2) throw FieldError("gains.kappa", "the 14-entry parameter vector requires exactly two reference vectors");
    return unpack_kappa(kappa(g.at("kappa"), "gains.kappa"));
  }
  GainSet out;
  out.control.rho = numbers(require(g, "gains", "rho"), "gains.rho", n);
  const json& lam = require(g, "gains", "lambda");
  const json& poly = require(g, "gains", "poly");
  if (!lam.is_array() || lam.size() != n)
    throw FieldError("gains.lambda", "expected " + std::to_string(n) + " matrices");
  if (!poly.is_array() || poly.size() != n)
    throw FieldError("gains.poly", "expected " + std::to_string(n) + " coefficient triples");
  for (std::size_t i = 0; i < n; ++i) {
    out.filter.lambda.push_back(mat3(lam[i], at("gains.lambda", i)));
    const auto c = numbers(poly[i], at("gains.poly", i), 3);
    out.filter.poly.push_back(FilterPolynomial{c[0], c[1], c[2]});
  }
  out.control.validate(n);
  out.filter.validate(n);
  return out;
}

inline void parse_sim(const json& root, RunConfig& rc) {
  if (!root.contains("sim")) return;
  const json& s = root.at("sim");
  if (!s.is_object()) throw FieldError("sim", "expected an object");
  reject_unknown(s, "sim", {"dt", "t_final", "initial_attitude", "initial_euler_deg", "initial_omega", "initial_filter"});
  if (s.contains("dt")) rc.dt = number(s.at("dt"), "sim.dt");
  if (s.contains("t_final")) rc.t_final = number(s.at("t_final"), "sim.t_final");
  if (s.contains("initial_attitude") && s.contains("initial_euler_deg"))
    throw FieldError("sim", "give either initial_attitude or initial_euler_deg, not both");
  if (s.contains("initial_attitude")) rc.initial_attitude = quaternion(s.at("initial_attitude"), "sim.initial_attitude");
  if (s.contains("initial_euler_deg")) {
    const Vec3 e = vec3(s.at("initial_euler_deg"), "sim.initial_euler_deg");
    rc.initial_attitude = from_euler_xyz(presets::deg(e[0]), presets::deg(e[1]), presets::deg(e[2]));
  }
  if (s.contains("initial_omega")) rc.initial_omega = vec3(s.at("initial_omega"), "sim.initial_omega");
  if (s.contains("initial_filter")) {
    const json& f = s.at("initial_filter");
    if (f.is_string()) {
      if (f.get<std::string>() != "measured")
        throw FieldError("sim.initial_filter", "expected \"measured\" or a list of vectors");
    } else {
      auto v = vec3_list(f, "sim.initial_filter");
      if (v.size() != rc.plant.vector_count())
        throw FieldError("sim.initial_filter", "expected one vector per reference vector");
      rc.initial_filter = std::move(v);
    }
  }
}

inline void parse_tuning(const json& root, RunConfig& rc) {
  if (!root.contains("tuning")) return;
  const json& t = root.at("tuning");
  if (!t.is_object()) throw FieldError("tuning", "expected an object");
  reject_unknown(t, "tuning", {"kind", "sigma", "n_starts", "seed", "threads", "max_iterations", "tolerance",
                               "initial_kappa", "bounds", "write_trajectory"});
  TuningSettings& ts = rc.tuning;
  if (t.contains("kind")) {
    if (!t.at("kind").is_string()) throw FieldError("tuning.kind", "expected a string");
    try {
      ts.kind = parse_objective_kind(t.at("kind").get<std::string>());
    } catch (const ConfigError& e) {
      throw FieldError("tuning.kind", "expected ISE, IAE or ITAE");
    }
  }
  if (t.contains("sigma")) {
    ts.sigma = number(t.at("sigma"), "tuning.sigma");
    if (!(ts.sigma >= 0.0)) throw FieldError("tuning.sigma", "must be nonnegative");
  }
  auto count = [&](const char* key, auto& dst, long long lo) {
    const std::string path = std::string("tuning.") + key;
    const json& j = t.at(key);
    if (!j.is_number_integer() || j.get<long long>() < lo)
      throw FieldError(path, "expected an integer >= " + std::to_string(lo));
    dst = static_cast<std::remove_reference_t<decltype(dst)>>(j.get<long long>());
  };
  if (t.contains("n_starts")) count("n_starts", ts.n_starts, 1);
  if (t.contains("threads")) count("threads", ts.threads, 1);
  if (t.contains("max_iterations")) count("max_iterations", ts.max_iterations, 1);
  if (t.contains("seed")) {
    const json& j = t.at("seed");
    if (!j.is_number_unsigned()) throw FieldError("tuning.seed", "expected a nonnegative integer");
    ts.seed = j.get<std::uint64_t>();
  }
  if (t.contains("tolerance")) {
    ts.tolerance = number(t.at("tolerance"), "tuning.tolerance");
    if (!(ts.tolerance > 0.0)) throw FieldError("tuning.tolerance", "must be positive");
  }
  if (t.contains("initial_kappa")) ts.initial_kappa = kappa(t.at("initial_kappa"), "tuning.initial_kappa");
  if (t.contains("bounds")) {
    const json& b = t.at("bounds");
    if (!b.is_object()) throw FieldError("tuning.bounds", "expected an object");
    reject_unknown(b, "tuning.bounds", {"lower", "upper"});
    ts.bounds.lower = kappa(require(b, "tuning.bounds", "lower"), "tuning.bounds.lower");
    ts.bounds.upper = kappa(require(b, "tuning.bounds", "upper"), "tuning.bounds.upper");
    for (std::size_t i = 0; i < kParamCount; ++i)
      if (ts.bounds.lower[i] > ts.bounds.upper[i])
        throw FieldError(at("tuning.bounds.lower", i), "lower bound exceeds upper bound");
  }
  if (t.contains("write_trajectory")) {
    if (!t.at("write_trajectory").is_boolean()) throw FieldError("tuning.write_trajectory", "expected true or false");
    ts.write_trajectory = t.at("write_trajectory").get<bool>();
  }
}

inline std::string path_of(const ConfigError& e) {
  if (const auto* f = dynamic_cast<const FieldError*>(&e)) return f->path();
  const std::string msg = e.what();
  const auto colon = msg.find(':');
  return colon == std::string::npos ? std::string{} : msg.substr(0, colon);
}

}  // namespace detail

/// Parses and validates a configuration document. Errors name the offending
/// field and its position in `source_name`.
inline RunConfig parse_config(const std::string& text, const std::string& source_name = "<config>") {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
  const JsonPositions positions(text);
  try {
    if (!root.is_object()) throw FieldError("", "top level must be an object");
    detail::reject_unknown(root, "", {"plant", "gains", "sim", "tuning", "output"});
    RunConfig rc(detail::parse_plant(root));
    if (root.contains("gains")) rc.gains = detail::parse_gains(root.at("gains"), rc.plant.vector_count());
    detail::parse_sim(root, rc);
    detail::parse_tuning(root, rc);
    if (root.contains("output")) {
      const json& o = root.at("output");
      if (!o.is_object()) throw FieldError("output", "expected an object");
      detail::reject_unknown(o, "output", {"dir"});
      if (o.contains("dir")) {
        if (!o.at("dir").is_string()) throw FieldError("output.dir", "expected a string");
        rc.out_dir = o.at("dir").get<std::string>();
      }
    }
    return rc;
  } catch (const ConfigError& e) {
    throw ConfigError(source_name + ": " + positions.describe(detail::path_of(e)) + ": " + e.what());
  }
}

inline RunConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file + ": cannot open configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file);
}

}  // namespace vecstab::cli
