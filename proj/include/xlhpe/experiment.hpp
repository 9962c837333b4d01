#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "xlhpe/baselines.hpp"
#include "xlhpe/scenario.hpp"

namespace xlhpe {

struct ScenarioRun {
  std::vector<UserPosition> users;
  ChannelSet channels;
  std::vector<MethodResult> results;  // in cfg.methods order, eta filled when EA-FA ran
};

/// Runs one method. Solver and validation errors propagate.
MethodResult run_method(Method method, const ScenarioConfig& cfg, const ChannelSet& ch);

/// Every requested method on one shared channel set. A failing method is
/// recorded in its row (ok = false) and the others still run.
std::vector<MethodResult> run_methods(const ScenarioConfig& cfg, const ChannelSet& ch);

/// Users, channels and run_methods for a scenario.
ScenarioRun run_scenario(const ScenarioConfig& cfg);

/// Output switches shared by the writers. With timing off every wall-clock
/// column is written as 0 so identical inputs give identical bytes.
struct EmitOptions {
  bool timing = true;
};

void write_results_csv(std::ostream& os, const std::vector<MethodResult>& results, int S, int V,
                       const EmitOptions& opt);
void write_pa_trace_csv(std::ostream& os, const std::vector<DinkelbachState>& trace, const EmitOptions& opt);
/// Outer-iteration HPE trace with the share of the final value reached.
void write_convergence_csv(std::ostream& os, const SolveReport& report);
nlohmann::json report_json(const ScenarioRun& run, const ScenarioConfig& cfg, const EmitOptions& opt);

/// Writes the artifacts enabled in cfg.outputs into `dir`.
void write_run(const std::filesystem::path& dir, const ScenarioRun& run, const ScenarioConfig& cfg,
               const EmitOptions& opt);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  int value = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  int S = 0;
  int V = 0;
  Method method = Method::EA_FA;
  bool ok = true;
  std::string error;
  double hpe = 0.0;
  double eta = 0.0;
  int active_count = 0;
  double seconds = 0.0;
};

/// Runs every (value, repetition) cell. Cells run concurrently; the rows come
/// back in (value, rep, method) order whatever the thread count.
std::vector<SweepRow> sweep(const ScenarioConfig& base, const SweepSpec& spec);

void write_sweep_csv(std::ostream& os, const std::string& variable, const std::vector<SweepRow>& rows,
                     const EmitOptions& opt);

/// Column of a per-value summary table.
enum class SweepMetric { Eta, ActiveRatio, Seconds };

/// Mean of the metric per (value, method) over successful repetitions; one row
/// per value, one column per method.
void write_sweep_summary_csv(std::ostream& os, const std::string& variable, const std::vector<SweepRow>& rows,
                             const std::vector<Method>& methods, SweepMetric metric, const EmitOptions& opt);

/// long.csv plus eta_vs_<var>.csv, active_ratio_vs_<var>.csv, time_vs_<var>.csv.
void write_sweep(const std::filesystem::path& dir, const std::string& variable, const std::vector<SweepRow>& rows,
                 const std::vector<Method>& methods, const EmitOptions& opt);

// ---------------------------------------------------------------------------
// Power map

struct PlaneSpec {
  std::string axes = "xz";  // "xz", "xy" or "yz"
  double u_min = -2.0;
  double u_max = 2.0;
  double v_min = 0.25;
  double v_max = 3.0;
  double fixed = 0.0;  // coordinate along the third axis
  int resolution = 101;

  void validate() const;
  /// Probe positions, u fastest.
  std::vector<Vec3> probes() const;
};

struct PowerMap {
  PlaneSpec plane;
  std::vector<Vec3> probes;
  std::vector<double> watts;
};

PowerMap emit_powermap(const ScenarioConfig& cfg, const ChannelSet& ch, const AllocationState& alloc,
                       const PlaneSpec& plane);
void write_powermap_csv(std::ostream& os, const PowerMap& map);

// ---------------------------------------------------------------------------
// Complexity benchmark

struct BenchPoint {
  int S = 0;
  Method method = Method::PA_SA;
  double seconds = 0.0;  // per solve
  double hpe = 0.0;      // mean over layouts
};

struct BenchResult {
  std::vector<BenchPoint> points;
  double es_growth = 0.0;  // fitted wall-clock factor per added sub-array
  double sa_growth = 0.0;
};

/// Least-squares fit of log(seconds) against S; returns exp(slope).
double fit_growth(const std::vector<int>& S, const std::vector<double>& seconds);

/// Times PA-ES and PA-SA for each S on `scenarios` seeded user layouts
/// (seed, seed + 1, ...). A sample averages enough back-to-back solves to
/// cover 0.2 s; each point is the mean over layouts of the median of `reps`
/// samples.
BenchResult bench(const ScenarioConfig& base, const std::vector<int>& S_values, int reps, int scenarios = 1);

void write_bench_csv(std::ostream& os, const BenchResult& result);

}  // namespace xlhpe
