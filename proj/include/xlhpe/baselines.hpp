#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "xlhpe/pa_optimizer.hpp"
#include "xlhpe/power.hpp"
#include "xlhpe/sa_controller.hpp"

namespace xlhpe {

enum class Method { PA_SA, PA_FA, PA_ES, EA_FA };

std::string to_string(Method m);
/// Accepts the tags "PA-SA", "PA-FA", "PA-ES", "EA-FA".
Method method_from_string(std::string_view tag);

struct MethodResult {
  Method method = Method::EA_FA;
  double hpe = 0.0;
  double eta = 0.0;  // hpe / hpe(EA-FA), filled by normalize()
  int active_count = 0;
  double seconds = 0.0;  // solver wall clock
  AllocationState allocation;
  SolveReport report;
  bool ok = true;
  std::string error;
};

inline constexpr int kDefaultEsCap = 12;

/// Equal split P_s / M on the full array; no optimization.
MethodResult ea_fa(const ChannelSet& ch, const PowerConfig& power_cfg);

/// Optimized PA on the full array.
MethodResult pa_fa(const ChannelSet& ch, const PAConfig& pa_cfg, const PowerConfig& power_cfg);

/// The joint activation / allocation loop.
MethodResult pa_sa(const ChannelSet& ch, const PAConfig& pa_cfg, const SAConfig& sa_cfg,
                   const PowerConfig& power_cfg);

/// Optimized PA on every non-empty subset of sub-arrays; keeps the best.
/// Ties go to fewer active sub-arrays, then the lowest subset bitmask.
/// Subsets are solved concurrently. Throws std::invalid_argument if S > cap.
MethodResult pa_es(const ChannelSet& ch, const PAConfig& pa_cfg, const PowerConfig& power_cfg,
                   int cap = kDefaultEsCap);

namespace reference {
MethodResult pa_es(const ChannelSet& ch, const PAConfig& pa_cfg, const PowerConfig& power_cfg,
                   int cap = kDefaultEsCap);
}  // namespace reference

/// Best HPE on the grid {0, P_s/steps, ..., P_s}^(S*M) restricted to the
/// feasible set and to the rows with nonzero `activation`. Only for S*M <= 4.
double grid_oracle(const ChannelSet& ch, const PowerConfig& power_cfg, const Eigen::VectorXd& activation,
                   int steps);

/// Fills eta relative to the EA-FA entry. Throws std::invalid_argument when
/// EA-FA is missing.
std::vector<MethodResult> normalize(std::vector<MethodResult> results);

}  // namespace xlhpe
