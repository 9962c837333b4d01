#include "xlhpe/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "xlhpe/parallel.hpp"

namespace xlhpe {

using nlohmann::json;

namespace {

std::string num(double v) { return fmt::format("{:.12g}", v); }

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

}  // namespace

MethodResult run_method(Method method, const ScenarioConfig& cfg, const ChannelSet& ch) {
  switch (method) {
    case Method::EA_FA: return ea_fa(ch, cfg.power);
    case Method::PA_FA: return pa_fa(ch, cfg.pa, cfg.power);
    case Method::PA_SA: return pa_sa(ch, cfg.pa, cfg.sa, cfg.power);
    case Method::PA_ES: return pa_es(ch, cfg.pa, cfg.power, cfg.es_cap);
  }
  throw std::invalid_argument("unknown method");
}

std::vector<MethodResult> run_methods(const ScenarioConfig& cfg, const ChannelSet& ch) {
  std::vector<MethodResult> results;
  for (Method method : cfg.methods) {
    try {
      results.push_back(run_method(method, cfg, ch));
    } catch (const std::exception& e) {
      MethodResult failed;
      failed.method = method;
      failed.ok = false;
      failed.error = e.what();
      failed.eta = std::nan("");
      results.push_back(std::move(failed));
    }
  }
  const bool have_baseline = std::any_of(results.begin(), results.end(),
                                         [](const MethodResult& r) { return r.method == Method::EA_FA && r.ok; });
  if (have_baseline) results = normalize(std::move(results));
  for (auto& r : results) {
    if (!r.ok) r.eta = std::nan("");
  }
  return results;
}

ScenarioRun run_scenario(const ScenarioConfig& cfg) {
  ScenarioRun run;
  run.users = resolve_users(cfg);
  run.channels = build_channel_set(cfg.geometry, run.users);
  run.results = run_methods(cfg, run.channels);
  return run;
}

void write_results_csv(std::ostream& os, const std::vector<MethodResult>& results, int S, int V,
                       const EmitOptions& opt) {
  os << "method,S,V,hpe,eta,active_count,seconds\n";
  for (const auto& r : results) {
    if (!r.ok) {
      os << fmt::format("{},{},{},nan,nan,0,0\n", to_string(r.method), S, V);
      continue;
    }
    os << fmt::format("{},{},{},{},{},{},{}\n", to_string(r.method), S, V, num(r.hpe), num(r.eta), r.active_count,
                      opt.timing ? num(r.seconds) : "0");
  }
}

void write_pa_trace_csv(std::ostream& os, const std::vector<DinkelbachState>& trace, const EmitOptions& opt) {
  os << "t,lambda,phi_watts,harvested_watts,consumed_watts,dr_residual,wall_clock_ns\n";
  for (const auto& st : trace) {
    os << fmt::format("{},{},{},{},{},{},{}\n", st.t, num(st.lambda), num(st.phi), num(st.harvested),
                      num(st.consumed), num(st.dr_residual), opt.timing ? st.wall_ns : 0);
  }
}

void write_convergence_csv(std::ostream& os, const SolveReport& report) {
  os << "iteration,hpe,fraction_of_final,active_count\n";
  const double final_hpe = report.hpe_trace.empty() ? 0.0 : report.hpe_trace.back();
  for (size_t i = 0; i < report.hpe_trace.size(); ++i) {
    const double frac = final_hpe > 0.0 ? report.hpe_trace[i] / final_hpe : 0.0;
    const int active = i < report.active_trace.size() ? report.active_trace[i] : 0;
    os << fmt::format("{},{},{},{}\n", i, num(report.hpe_trace[i]), num(frac), active);
  }
}

json report_json(const ScenarioRun& run, const ScenarioConfig& cfg, const EmitOptions& opt) {
  json doc;
  doc["S"] = cfg.geometry.S;
  doc["Ns"] = cfg.geometry.elements_per_subarray();
  doc["M"] = static_cast<int>(run.users.size());
  doc["V"] = cfg.cluster_count();
  doc["seed"] = cfg.seed;
  doc["fraunhofer_distance_m"] = fraunhofer_distance(cfg.geometry);
  doc["near_field_boundary_m"] = near_field_boundary(cfg.geometry);
  doc["warnings"] = cfg.warnings;
  json users = json::array();
  for (const auto& u : run.users) users.push_back({{"x", u.p.x}, {"y", u.p.y}, {"z", u.p.z}, {"vr", u.vr_label}});
  doc["users"] = users;

  json methods = json::array();
  for (const auto& r : run.results) {
    json m;
    m["method"] = to_string(r.method);
    m["ok"] = r.ok;
    if (!r.ok) {
      m["error"] = r.error;
      methods.push_back(m);
      continue;
    }
    m["hpe"] = r.hpe;
    m["eta"] = r.eta;
    m["active_count"] = r.active_count;
    m["seconds"] = opt.timing ? r.seconds : 0.0;
    m["a"] = vector_json(r.allocation.a);
    m["a_tilde"] = vector_json(r.allocation.a_tilde);
    m["omega_watts"] = matrix_json(r.allocation.omega);
    m["hpe_trace"] = r.report.hpe_trace;
    m["active_trace"] = r.report.active_trace;
    m["pa_solves"] = r.report.pa_solves;
    m["converged"] = r.report.converged;
    json iters = json::array();
    for (const auto& it : r.report.iterations) {
      iters.push_back({{"i", it.i},
                       {"g", vector_json(it.g)},
                       {"a", vector_json(it.a)},
                       {"a_tilde", vector_json(it.a_tilde)},
                       {"hpe", it.hpe},
                       {"accepted", it.accepted},
                       {"pa_outer_parameterized", it.pa_outer_parameterized},
                       {"pa_outer_binary", it.pa_outer_binary}});
    }
    m["iterations"] = iters;
    json lambdas = json::array();
    for (const auto& st : r.report.pa_trace) lambdas.push_back(st.lambda);
    m["final_pa_lambda_trace"] = lambdas;
    if (!r.report.pa_trace.empty()) {
      m["final_pa_residual_watts"] = r.report.pa_trace.back().residual;
      m["final_pa_dr_residual"] = r.report.pa_trace.back().dr_residual;
    }
    methods.push_back(m);
  }
  doc["methods"] = methods;
  return doc;
}

void write_run(const std::filesystem::path& dir, const ScenarioRun& run, const ScenarioConfig& cfg,
               const EmitOptions& opt) {
  std::filesystem::create_directories(dir);
  if (cfg.outputs.results) {
    auto os = open_out(dir / "results.csv");
    write_results_csv(os, run.results, cfg.geometry.S, cfg.cluster_count(), opt);
  }
  if (cfg.outputs.report) {
    auto os = open_out(dir / "report.json");
    os << report_json(run, cfg, opt).dump(2) << '\n';
  }
  for (const auto& r : run.results) {
    if (!r.ok) continue;
    if (cfg.outputs.traces && !r.report.pa_trace.empty()) {
      auto os = open_out(dir / fmt::format("pa_trace_{}.csv", to_string(r.method)));
      write_pa_trace_csv(os, r.report.pa_trace, opt);
    }
    if (cfg.outputs.convergence && r.method == Method::PA_SA) {
      auto os = open_out(dir / "convergence.csv");
      write_convergence_csv(os, r.report);
    }
  }
}

std::vector<SweepRow> sweep(const ScenarioConfig& base, const SweepSpec& spec) {
  spec.validate();
  const int cells = static_cast<int>(spec.values.size()) * spec.reps;
  std::vector<std::vector<SweepRow>> per_cell(static_cast<size_t>(cells));
  parallel_for(
      cells,
      [&](std::ptrdiff_t c) {
        const int value = spec.values[static_cast<size_t>(c / spec.reps)];
        const int rep = static_cast<int>(c % spec.reps);
        std::vector<SweepRow>& rows = per_cell[static_cast<size_t>(c)];
        SweepRow proto;
        proto.value = value;
        proto.rep = rep;
        try {
          const ScenarioConfig cfg = sweep_cell(base, spec, value, rep);
          proto.seed = cfg.seed;
          proto.S = cfg.geometry.S;
          proto.V = cfg.cluster_count();
          const ScenarioRun run = run_scenario(cfg);
          for (const auto& r : run.results) {
            SweepRow row = proto;
            row.method = r.method;
            row.ok = r.ok;
            row.error = r.error;
            row.hpe = r.hpe;
            row.eta = r.eta;
            row.active_count = r.active_count;
            row.seconds = r.seconds;
            rows.push_back(row);
          }
        } catch (const std::exception& e) {
          for (Method m : base.methods) {
            SweepRow row = proto;
            row.method = m;
            row.ok = false;
            row.error = e.what();
            row.eta = std::nan("");
            rows.push_back(row);
          }
        }
      },
      /*dynamic_schedule=*/true);
  std::vector<SweepRow> out;
  for (auto& rows : per_cell) out.insert(out.end(), rows.begin(), rows.end());
  return out;
}

void write_sweep_csv(std::ostream& os, const std::string& variable, const std::vector<SweepRow>& rows,
                     const EmitOptions& opt) {
  os << variable << ",rep,seed,method,S,V,ok,hpe,eta,active_count,active_ratio,seconds\n";
  for (const auto& r : rows) {
    const double ratio = r.ok && r.S > 0 ? static_cast<double>(r.active_count) / r.S : std::nan("");
    os << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.value, r.rep, r.seed, to_string(r.method), r.S, r.V,
                      r.ok ? 1 : 0, r.ok ? num(r.hpe) : "nan", num(r.eta), r.active_count, num(ratio),
                      opt.timing ? num(r.seconds) : "0");
  }
}

void write_sweep_summary_csv(std::ostream& os, const std::string& variable, const std::vector<SweepRow>& rows,
                             const std::vector<Method>& methods, SweepMetric metric, const EmitOptions& opt) {
  const char* unit = metric == SweepMetric::Eta ? "eta" : metric == SweepMetric::ActiveRatio ? "active_ratio" : "seconds";
  os << variable;
  for (Method m : methods) os << ',' << to_string(m) << '_' << unit;
  os << '\n';
  std::vector<int> values;
  for (const auto& r : rows) {
    if (std::find(values.begin(), values.end(), r.value) == values.end()) values.push_back(r.value);
  }
  for (int v : values) {
    os << v;
    for (Method m : methods) {
      double sum = 0.0;
      int n = 0;
      for (const auto& r : rows) {
        if (r.value != v || r.method != m || !r.ok) continue;
        switch (metric) {
          case SweepMetric::Eta: sum += r.eta; break;
          case SweepMetric::ActiveRatio: sum += static_cast<double>(r.active_count) / r.S; break;
          case SweepMetric::Seconds: sum += opt.timing ? r.seconds : 0.0; break;
        }
        ++n;
      }
      os << ',' << (n > 0 ? num(sum / n) : "nan");
    }
    os << '\n';
  }
}

void write_sweep(const std::filesystem::path& dir, const std::string& variable, const std::vector<SweepRow>& rows,
                 const std::vector<Method>& methods, const EmitOptions& opt) {
  std::filesystem::create_directories(dir);
  {
    auto os = open_out(dir / "sweep_long.csv");
    write_sweep_csv(os, variable, rows, opt);
  }
  const std::pair<SweepMetric, const char*> tables[] = {
      {SweepMetric::Eta, "eta_vs_"}, {SweepMetric::ActiveRatio, "active_ratio_vs_"}, {SweepMetric::Seconds, "time_vs_"}};
  for (const auto& [metric, prefix] : tables) {
    auto os = open_out(dir / (std::string(prefix) + variable + ".csv"));
    write_sweep_summary_csv(os, variable, rows, methods, metric, opt);
  }
}

void PlaneSpec::validate() const {
  if (axes != "xz" && axes != "xy" && axes != "yz") throw std::invalid_argument("plane must be xz, xy or yz");
  if (resolution < 1) throw std::invalid_argument("power map resolution must be >= 1");
  if (!(u_max >= u_min) || !(v_max >= v_min)) throw std::invalid_argument("power map extent is empty");
  if (axes == "xy" && !(fixed > 0.0)) throw std::invalid_argument("an xy plane needs a fixed z > 0");
  if (axes != "xy" && !(v_min > 0.0)) throw std::invalid_argument("the plane must stay in front of the array (z > 0)");
}

std::vector<Vec3> PlaneSpec::probes() const {
  validate();
  std::vector<Vec3> out;
  out.reserve(static_cast<size_t>(resolution) * static_cast<size_t>(resolution));
  auto at = [this](double lo, double hi, int i) {
    return resolution == 1 ? lo : lo + (hi - lo) * i / (resolution - 1);
  };
  for (int j = 0; j < resolution; ++j) {
    const double v = at(v_min, v_max, j);
    for (int i = 0; i < resolution; ++i) {
      const double u = at(u_min, u_max, i);
      if (axes == "xz") {
        out.push_back({u, fixed, v});
      } else if (axes == "xy") {
        out.push_back({u, v, fixed});
      } else {
        out.push_back({fixed, u, v});
      }
    }
  }
  return out;
}

PowerMap emit_powermap(const ScenarioConfig& cfg, const ChannelSet& ch, const AllocationState& alloc,
                       const PlaneSpec& plane) {
  PowerMap map;
  map.plane = plane;
  map.probes = plane.probes();
  map.watts = power_map(cfg.geometry, alloc, ch, map.probes);
  return map;
}

void write_powermap_csv(std::ostream& os, const PowerMap& map) {
  const std::string& ax = map.plane.axes;
  os << ax[0] << "_m," << ax[1] << "_m,watts\n";
  auto pick = [](const Vec3& p, char c) { return c == 'x' ? p.x : c == 'y' ? p.y : p.z; };
  for (size_t i = 0; i < map.probes.size(); ++i) {
    os << fmt::format("{},{},{}\n", num(pick(map.probes[i], ax[0])), num(pick(map.probes[i], ax[1])),
                      num(map.watts[i]));
  }
}

double fit_growth(const std::vector<int>& S, const std::vector<double>& seconds) {
  if (S.size() != seconds.size() || S.size() < 2) throw std::invalid_argument("growth fit needs two or more points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(S.size());
  for (size_t i = 0; i < S.size(); ++i) {
    if (!(seconds[i] > 0.0)) throw std::invalid_argument("growth fit needs positive timings");
    const double x = S[i];
    const double y = std::log(seconds[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("growth fit needs distinct S values");
  return std::exp((n * sxy - sx * sy) / denom);
}

namespace {
constexpr double kMinSampleSeconds = 0.2;
}  // namespace

BenchResult bench(const ScenarioConfig& base, const std::vector<int>& S_values, int reps, int scenarios) {
  if (reps < 1) throw std::invalid_argument("bench repetitions must be >= 1");
  if (scenarios < 1) throw std::invalid_argument("bench needs at least one scenario per point");
  BenchResult out;
  std::vector<double> es_times, sa_times;
  for (int S : S_values) {
    for (Method m : {Method::PA_ES, Method::PA_SA}) {
      double mean_seconds = 0.0;
      double mean_hpe = 0.0;
      for (int k = 0; k < scenarios; ++k) {
        ScenarioConfig cfg = base;
        cfg.geometry.S = S;
        cfg.seed = base.seed + static_cast<std::uint64_t>(k);
        refresh_geometry(cfg);
        const ChannelSet ch = build_channel_set(cfg.geometry, resolve_users(cfg));
        std::vector<double> times;
        double value = 0.0;
        for (int r = 0; r < reps; ++r) {
          // short solves are repeated until kMinSampleSeconds have been timed
          double total = 0.0;
          int runs = 0;
          do {
            const MethodResult res = run_method(m, cfg, ch);
            total += res.seconds;
            value = res.hpe;
            ++runs;
          } while (total < kMinSampleSeconds);
          times.push_back(total / runs);
        }
        std::sort(times.begin(), times.end());
        mean_seconds += times[times.size() / 2] / scenarios;
        mean_hpe += value / scenarios;
      }
      out.points.push_back({S, m, mean_seconds, mean_hpe});
      (m == Method::PA_ES ? es_times : sa_times).push_back(mean_seconds);
    }
  }
  if (S_values.size() >= 2) {
    out.es_growth = fit_growth(S_values, es_times);
    out.sa_growth = fit_growth(S_values, sa_times);
  }
  return out;
}

void write_bench_csv(std::ostream& os, const BenchResult& result) {
  os << "S,method,seconds,hpe\n";
  for (const auto& p : result.points) {
    os << fmt::format("{},{},{},{}\n", p.S, to_string(p.method), num(p.seconds), num(p.hpe));
  }
}

}  // namespace xlhpe
