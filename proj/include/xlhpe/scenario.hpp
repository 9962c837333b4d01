#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "xlhpe/baselines.hpp"
#include "xlhpe/geometry.hpp"
#include "xlhpe/pa_optimizer.hpp"
#include "xlhpe/power.hpp"
#include "xlhpe/sa_controller.hpp"

namespace xlhpe {

/// Clustered users: V centers evenly spaced on an arc of half-angle `sector`
/// at `range` from the array center, users uniform in a disc of `radius`
/// around their center. Everything lives in the x-z plane (y = 0), and only
/// the disc offsets are random.
struct ClusterGenerator {
  int V = 1;
  int M = 3;
  double range = 1.0;   // [m]
  double radius = 0.3;  // [m]
  double sector = 1.0471975511965976;  // half-angle of the arc [rad]
};

struct OutputConfig {
  std::string dir = "out";
  bool results = true;
  bool traces = true;
  bool report = true;
  bool convergence = true;
};

struct ScenarioConfig {
  ArrayGeometry geometry;
  bool explicit_origins = false;
  std::vector<UserPosition> users;  // used as-is when explicit_users is set
  bool explicit_users = false;
  ClusterGenerator generator;
  PowerConfig power;
  PAConfig pa;
  SAConfig sa;
  int es_cap = kDefaultEsCap;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::EA_FA, Method::PA_FA, Method::PA_SA, Method::PA_ES};
  OutputConfig outputs;
  std::vector<std::string> warnings;

  int user_count() const { return explicit_users ? static_cast<int>(users.size()) : generator.M; }
  int cluster_count() const;
};

/// Parses a config document. Missing keys take their defaults; unknown keys,
/// wrong types and non-physical values throw std::invalid_argument.
ScenarioConfig parse_scenario(const nlohmann::json& doc);

/// Reads a JSON file (an empty file is the default scenario) without validating it.
nlohmann::json read_config_json(const std::filesystem::path& path);

/// read_config_json + parse_scenario.
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Applies "section.key=value" to a raw config document. The value is parsed as
/// JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Rebuilds the default row of sub-arrays after S or the element grid changed,
/// unless the origins were given explicitly.
void refresh_geometry(ScenarioConfig& cfg);

/// Cluster sizes for M users over V clusters: M / V each, the remainder going
/// to the first clusters.
std::vector<int> cluster_sizes(int M, int V);

/// Deterministic in (generator, seed); independent of the array layout.
std::vector<UserPosition> generate_users(const ClusterGenerator& gen, std::uint64_t seed);

/// The users the scenario describes, explicit or generated.
std::vector<UserPosition> resolve_users(const ScenarioConfig& cfg);

/// Users outside the near-field service region, as warnings.
std::vector<std::string> range_warnings(const ArrayGeometry& geom, const std::vector<UserPosition>& users);

struct SweepSpec {
  std::string variable = "S";  // "S" or "V"
  std::vector<int> values;
  int reps = 1;
  // repetition r of every cell uses seed base + r, so cells with the same r
  // share user positions
  std::uint64_t base_seed = 1;

  void validate() const;
};

/// The scenario for one sweep cell.
ScenarioConfig sweep_cell(const ScenarioConfig& base, const SweepSpec& spec, int value, int rep);

}  // namespace xlhpe
