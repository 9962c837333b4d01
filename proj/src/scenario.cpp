#include "xlhpe/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace xlhpe {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::string_view section, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw std::invalid_argument(fmt::format("'{}' must be an object", section));
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw std::invalid_argument(fmt::format("unknown key '{}.{}'", section, key));
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, std::string_view section) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(fmt::format("'{}.{}' has the wrong type", section, key));
  }
}

void require_positive(double v, std::string_view name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(fmt::format("{} must be positive, got {}", name, v));
}

void require_nonnegative(double v, std::string_view name) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(fmt::format("{} must be >= 0, got {}", name, v));
}

// Uniform on [0, 1) from the top 53 bits; fixed across standard libraries.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Vec3 read_vec3(const json& v, std::string_view what) {
  if (!v.is_array() || v.size() != 3) throw std::invalid_argument(fmt::format("{} must be [x, y, z]", what));
  try {
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  } catch (const json::exception&) {
    throw std::invalid_argument(fmt::format("{} must hold numbers", what));
  }
}

void parse_geometry(const json& g, ScenarioConfig& cfg) {
  reject_unknown(g, "geometry", {"S", "Nx", "Ny", "d", "lambda", "D", "b", "origins", "amplitude_model"});
  ArrayGeometry& geom = cfg.geometry;
  read(g, "S", geom.S, "geometry");
  read(g, "Nx", geom.Nx, "geometry");
  read(g, "Ny", geom.Ny, "geometry");
  read(g, "lambda", geom.lambda, "geometry");
  require_positive(geom.lambda, "geometry.lambda");
  geom.d = geom.lambda / 2.0;
  geom.D = geom.lambda / 4.0;
  read(g, "d", geom.d, "geometry");
  read(g, "D", geom.D, "geometry");
  read(g, "b", geom.b, "geometry");
  if (g.contains("amplitude_model")) {
    std::string model;
    read(g, "amplitude_model", model, "geometry");
    if (model == "center") {
      geom.amplitude = AmplitudeModel::SubArrayCenter;
    } else if (model == "element") {
      geom.amplitude = AmplitudeModel::PerElement;
    } else {
      throw std::invalid_argument("geometry.amplitude_model must be \"center\" or \"element\"");
    }
  }
  if (g.contains("origins")) {
    const json& o = g.at("origins");
    if (!o.is_array()) throw std::invalid_argument("geometry.origins must be a list of [x, y, z]");
    geom.origins.clear();
    for (const auto& v : o) geom.origins.push_back(read_vec3(v, "geometry.origins entry"));
    cfg.explicit_origins = true;
  }
}

void parse_users(const json& u, ScenarioConfig& cfg) {
  reject_unknown(u, "users", {"positions", "generator"});
  if (u.contains("positions") && u.contains("generator")) {
    throw std::invalid_argument("users takes either positions or generator, not both");
  }
  if (u.contains("positions")) {
    const json& list = u.at("positions");
    if (!list.is_array() || list.empty()) throw std::invalid_argument("users.positions must be a non-empty list");
    cfg.users.clear();
    for (const auto& entry : list) {
      reject_unknown(entry, "users.positions[]", {"x", "y", "z", "vr"});
      UserPosition up;
      read(entry, "x", up.p.x, "users.positions[]");
      read(entry, "y", up.p.y, "users.positions[]");
      read(entry, "z", up.p.z, "users.positions[]");
      read(entry, "vr", up.vr_label, "users.positions[]");
      cfg.users.push_back(up);
    }
    cfg.explicit_users = true;
  }
  if (u.contains("generator")) {
    const json& gen = u.at("generator");
    reject_unknown(gen, "users.generator", {"V", "M", "range", "radius", "sector"});
    read(gen, "V", cfg.generator.V, "users.generator");
    read(gen, "M", cfg.generator.M, "users.generator");
    read(gen, "range", cfg.generator.range, "users.generator");
    read(gen, "radius", cfg.generator.radius, "users.generator");
    read(gen, "sector", cfg.generator.sector, "users.generator");
  }
}

void parse_power(const json& p, PowerConfig& power) {
  reject_unknown(p, "power", {"varsigma", "P_et", "P_syn", "P_ct", "P_cr"});
  read(p, "varsigma", power.varsigma, "power");
  read(p, "P_et", power.P_et, "power");
  read(p, "P_syn", power.P_syn, "power");
  read(p, "P_ct", power.P_ct, "power");
  read(p, "P_cr", power.P_cr, "power");
}

void parse_solver(const json& s, ScenarioConfig& cfg) {
  reject_unknown(s, "solver", {"epsilon", "delta", "gamma", "max_outer", "max_dr", "dr_residual_tol", "lambda0",
                               "max_sa_iters", "cold_start", "es_cap", "seed"});
  read(s, "epsilon", cfg.pa.epsilon, "solver");
  read(s, "gamma", cfg.pa.gamma, "solver");
  read(s, "max_outer", cfg.pa.max_outer, "solver");
  read(s, "max_dr", cfg.pa.max_dr, "solver");
  read(s, "dr_residual_tol", cfg.pa.dr_residual_tol, "solver");
  read(s, "lambda0", cfg.pa.lambda0, "solver");
  read(s, "delta", cfg.sa.delta, "solver");
  read(s, "max_sa_iters", cfg.sa.max_sa_iters, "solver");
  read(s, "cold_start", cfg.sa.cold_start, "solver");
  read(s, "es_cap", cfg.es_cap, "solver");
  read(s, "seed", cfg.seed, "solver");
}

void parse_outputs(const json& o, OutputConfig& out) {
  reject_unknown(o, "outputs", {"dir", "results", "traces", "report", "convergence"});
  read(o, "dir", out.dir, "outputs");
  read(o, "results", out.results, "outputs");
  read(o, "traces", out.traces, "outputs");
  read(o, "report", out.report, "outputs");
  read(o, "convergence", out.convergence, "outputs");
}

void validate(ScenarioConfig& cfg) {
  const ArrayGeometry& g = cfg.geometry;
  require_positive(g.d, "geometry.d");
  require_positive(g.D, "geometry.D");
  require_nonnegative(g.b, "geometry.b");
  g.validate();

  require_positive(cfg.power.varsigma, "power.varsigma");
  if (cfg.power.varsigma > 1.0) throw std::invalid_argument("power.varsigma must be <= 1");
  require_positive(cfg.power.P_et, "power.P_et");
  require_nonnegative(cfg.power.P_syn, "power.P_syn");
  require_nonnegative(cfg.power.P_ct, "power.P_ct");
  require_nonnegative(cfg.power.P_cr, "power.P_cr");
  cfg.power.validate();
  cfg.pa.validate();
  cfg.sa.validate();
  if (cfg.es_cap < 1) throw std::invalid_argument("solver.es_cap must be >= 1");

  if (cfg.explicit_users) {
    int V = 0;
    for (const auto& u : cfg.users) {
      if (!(u.p.z > 0.0)) throw std::invalid_argument("every user needs z > 0 (in front of the array)");
      if (u.vr_label < 1) throw std::invalid_argument("user vr labels start at 1");
      V = std::max(V, u.vr_label);
    }
    if (V > static_cast<int>(cfg.users.size())) throw std::invalid_argument("more VR clusters than users");
  } else {
    const ClusterGenerator& gen = cfg.generator;
    if (gen.V < 1) throw std::invalid_argument("users.generator.V must be >= 1");
    if (gen.M < gen.V) throw std::invalid_argument("users.generator.M must be >= V");
    require_positive(gen.range, "users.generator.range");
    require_nonnegative(gen.radius, "users.generator.radius");
    require_nonnegative(gen.sector, "users.generator.sector");
    if (gen.sector >= std::numbers::pi / 2) throw std::invalid_argument("users.generator.sector must be below pi/2");
    if (gen.radius >= gen.range * std::cos(gen.sector)) {
      throw std::invalid_argument("users.generator.radius too large: users could fall behind the array");
    }
  }
  if (cfg.methods.empty()) throw std::invalid_argument("methods must not be empty");
}

}  // namespace

int ScenarioConfig::cluster_count() const {
  if (!explicit_users) return generator.V;
  int V = 0;
  for (const auto& u : users) V = std::max(V, u.vr_label);
  return V;
}

std::vector<int> cluster_sizes(int M, int V) {
  if (V < 1 || M < V) throw std::invalid_argument("cluster split needs M >= V >= 1");
  std::vector<int> sizes(static_cast<size_t>(V), M / V);
  for (int v = 0; v < M % V; ++v) ++sizes[static_cast<size_t>(v)];
  return sizes;
}

std::vector<UserPosition> generate_users(const ClusterGenerator& gen, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<int> sizes = cluster_sizes(gen.M, gen.V);
  std::vector<UserPosition> users;
  users.reserve(static_cast<size_t>(gen.M));
  for (int v = 0; v < gen.V; ++v) {
    // evenly spaced: midpoints of V equal pieces of the arc
    const double angle = -gen.sector + 2.0 * gen.sector * (v + 0.5) / gen.V;
    const Vec3 center{gen.range * std::sin(angle), 0.0, gen.range * std::cos(angle)};
    for (int k = 0; k < sizes[static_cast<size_t>(v)]; ++k) {
      const double r = gen.radius * std::sqrt(uniform01(rng));
      const double phi = 2.0 * std::numbers::pi * uniform01(rng);
      users.push_back({{center.x + r * std::cos(phi), 0.0, center.z + r * std::sin(phi)}, v + 1});
    }
  }
  return users;
}

std::vector<UserPosition> resolve_users(const ScenarioConfig& cfg) {
  return cfg.explicit_users ? cfg.users : generate_users(cfg.generator, cfg.seed);
}

std::vector<std::string> range_warnings(const ArrayGeometry& geom, const std::vector<UserPosition>& users) {
  std::vector<std::string> out;
  const double boundary = near_field_boundary(geom);
  Vec3 mid{0.0, 0.0, 0.0};
  for (int s = 0; s < geom.S; ++s) mid = mid + geom.center(s);
  mid = {mid.x / geom.S, mid.y / geom.S, mid.z / geom.S};
  for (size_t m = 0; m < users.size(); ++m) {
    const double r = distance(users[m].p, mid);
    if (r > boundary) {
      out.push_back(fmt::format("user {} is {:.3f} m from the array center, beyond the near-field boundary {:.3f} m",
                                m, r, boundary));
    }
  }
  return out;
}

void refresh_geometry(ScenarioConfig& cfg) {
  if (cfg.explicit_origins) return;
  const ArrayGeometry& g = cfg.geometry;
  const AmplitudeModel model = g.amplitude;
  cfg.geometry = ArrayGeometry::modular_row(g.S, g.Nx, g.Ny, g.d, g.lambda, g.D, g.b);
  cfg.geometry.amplitude = model;
}

ScenarioConfig parse_scenario(const json& doc) {
  ScenarioConfig cfg;
  if (doc.is_null()) {
    refresh_geometry(cfg);
    return cfg;
  }
  reject_unknown(doc, "config", {"geometry", "users", "power", "solver", "methods", "outputs"});
  if (doc.contains("geometry")) parse_geometry(doc.at("geometry"), cfg);
  if (doc.contains("users")) parse_users(doc.at("users"), cfg);
  if (doc.contains("power")) parse_power(doc.at("power"), cfg.power);
  if (doc.contains("solver")) parse_solver(doc.at("solver"), cfg);
  if (doc.contains("outputs")) parse_outputs(doc.at("outputs"), cfg.outputs);
  if (doc.contains("methods")) {
    const json& m = doc.at("methods");
    if (!m.is_array()) throw std::invalid_argument("methods must be a list of method tags");
    cfg.methods.clear();
    for (const auto& tag : m) {
      if (!tag.is_string()) throw std::invalid_argument("methods must be a list of method tags");
      const Method method = method_from_string(tag.get<std::string>());
      if (std::find(cfg.methods.begin(), cfg.methods.end(), method) != cfg.methods.end()) {
        throw std::invalid_argument("duplicate method " + tag.get<std::string>());
      }
      cfg.methods.push_back(method);
    }
  }
  if (cfg.explicit_origins && static_cast<int>(cfg.geometry.origins.size()) != cfg.geometry.S) {
    throw std::invalid_argument("geometry.origins must have S entries");
  }
  refresh_geometry(cfg);
  validate(cfg);
  cfg.warnings = range_warnings(cfg.geometry, resolve_users(cfg));
  return cfg;
}

json read_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(fmt::format("{}: {}", path.string(), e.what()));
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) { return parse_scenario(read_config_json(path)); }

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw std::invalid_argument(fmt::format("override '{}' is not of the form key=value", assignment));
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;

  if (!doc.is_object()) doc = json::object();
  json* node = &doc;
  size_t start = 0;
  while (true) {
    const size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw std::invalid_argument(fmt::format("override key '{}' has an empty segment", key));
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    json& child = (*node)[part];
    if (child.is_null()) child = json::object();
    if (!child.is_object()) throw std::invalid_argument(fmt::format("override key '{}' descends into a non-object", key));
    node = &child;
    start = dot + 1;
  }
}

void SweepSpec::validate() const {
  if (variable != "S" && variable != "V") throw std::invalid_argument("sweep variable must be S or V");
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  if (reps < 1) throw std::invalid_argument("sweep repetitions must be >= 1");
  for (int v : values) {
    if (v < 1) throw std::invalid_argument("sweep values must be >= 1");
  }
}

ScenarioConfig sweep_cell(const ScenarioConfig& base, const SweepSpec& spec, int value, int rep) {
  ScenarioConfig cfg = base;
  cfg.seed = spec.base_seed + static_cast<std::uint64_t>(rep);
  if (spec.variable == "S") {
    if (cfg.explicit_origins) throw std::invalid_argument("cannot sweep S with explicit sub-array origins");
    cfg.geometry.S = value;
    refresh_geometry(cfg);
  } else {
    if (cfg.explicit_users) throw std::invalid_argument("cannot sweep V with explicit user positions");
    if (value > cfg.generator.M) throw std::invalid_argument("sweep value V exceeds the user count");
    cfg.generator.V = value;
  }
  cfg.warnings = range_warnings(cfg.geometry, resolve_users(cfg));
  return cfg;
}

}  // namespace xlhpe
