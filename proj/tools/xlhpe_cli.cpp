// Command-line front end: solve, sweep, powermap, bench.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "xlhpe/experiment.hpp"
#include "xlhpe/parallel.hpp"
#include "xlhpe/scenario.hpp"

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool no_timing = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config, "scenario JSON (an empty file means defaults)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--set", c.sets, "override a config key, e.g. --set geometry.S=8");
  cmd->add_option("--out", c.out, "output directory (default: outputs.dir)");
  cmd->add_option("--seed", c.seed, "user-placement seed (overrides solver.seed)");
  cmd->add_flag("--no-timing", c.no_timing, "write 0 in every wall-clock column");
}

xlhpe::ScenarioConfig load(const Common& c) {
  nlohmann::json doc = xlhpe::read_config_json(c.config);
  for (const auto& s : c.sets) xlhpe::apply_override(doc, s);
  if (c.seed) xlhpe::apply_override(doc, "solver.seed=" + std::to_string(*c.seed));
  xlhpe::ScenarioConfig cfg = xlhpe::parse_scenario(doc);
  if (!c.out.empty()) cfg.outputs.dir = c.out;
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
  return cfg;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const int v = std::stoi(item, &used);
    if (used != item.size()) throw std::invalid_argument("not an integer list: " + text);
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty value list");
  return out;
}

void print_results(const std::vector<xlhpe::MethodResult>& results) {
  std::printf("%-6s %14s %9s %7s %10s\n", "method", "hpe", "eta", "active", "seconds");
  for (const auto& r : results) {
    if (!r.ok) {
      std::printf("%-6s failed: %s\n", xlhpe::to_string(r.method).c_str(), r.error.c_str());
      continue;
    }
    std::printf("%-6s %14.6e %9.4f %7d %10.4f\n", xlhpe::to_string(r.method).c_str(), r.hpe, r.eta, r.active_count,
                r.seconds);
  }
}

int run_solve(const Common& c) {
  const xlhpe::ScenarioConfig cfg = load(c);
  const xlhpe::ScenarioRun run = xlhpe::run_scenario(cfg);
  xlhpe::write_run(cfg.outputs.dir, run, cfg, {!c.no_timing});
  print_results(run.results);
  for (const auto& r : run.results) {
    if (!r.ok) return 3;
  }
  return 0;
}

int run_sweep(const Common& c, const std::string& var, const std::string& values, int reps) {
  const xlhpe::ScenarioConfig cfg = load(c);
  xlhpe::SweepSpec spec;
  spec.variable = var;
  spec.values = parse_int_list(values);
  spec.reps = reps;
  spec.base_seed = cfg.seed;
  const auto rows = xlhpe::sweep(cfg, spec);
  xlhpe::write_sweep(cfg.outputs.dir, var, rows, cfg.methods, {!c.no_timing});
  int failed = 0;
  for (const auto& r : rows) {
    if (!r.ok) {
      ++failed;
      std::cerr << var << '=' << r.value << " rep " << r.rep << ' ' << xlhpe::to_string(r.method)
                << " failed: " << r.error << '\n';
    }
  }
  std::cout << rows.size() << " rows written to " << cfg.outputs.dir << '\n';
  return failed > 0 ? 3 : 0;
}

int run_powermap(const Common& c, xlhpe::PlaneSpec plane, const std::string& method_tag) {
  xlhpe::ScenarioConfig cfg = load(c);
  plane.validate();
  const xlhpe::Method method = xlhpe::method_from_string(method_tag);
  const auto users = xlhpe::resolve_users(cfg);
  const xlhpe::ChannelSet ch = xlhpe::build_channel_set(cfg.geometry, users);
  const xlhpe::MethodResult result = xlhpe::run_method(method, cfg, ch);
  const xlhpe::PowerMap map = xlhpe::emit_powermap(cfg, ch, result.allocation, plane);
  std::filesystem::create_directories(cfg.outputs.dir);
  const auto path = std::filesystem::path(cfg.outputs.dir) / "powermap.csv";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  xlhpe::write_powermap_csv(os, map);
  std::cout << map.probes.size() << " probes written to " << path.string() << '\n';
  return 0;
}

int run_bench(const Common& c, const std::string& values, int reps, int scenarios) {
  const xlhpe::ScenarioConfig cfg = load(c);
  const std::vector<int> S = parse_int_list(values);
  const xlhpe::BenchResult result = xlhpe::bench(cfg, S, reps, scenarios);
  std::filesystem::create_directories(cfg.outputs.dir);
  const auto path = std::filesystem::path(cfg.outputs.dir) / "bench.csv";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  xlhpe::write_bench_csv(os, result);
  std::printf("%4s %-6s %12s\n", "S", "method", "seconds");
  for (const auto& p : result.points) {
    std::printf("%4d %-6s %12.5f\n", p.S, xlhpe::to_string(p.method).c_str(), p.seconds);
  }
  std::printf("growth per added sub-array: PA-ES x%.3f, PA-SA x%.3f\n", result.es_growth, result.sa_growth);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint sub-array activation and power allocation for near-field wireless power transfer"};
  app.require_subcommand(1);
  Common common;

  auto* solve = app.add_subcommand("solve", "run the configured methods on one scenario");
  add_common(solve, common);

  auto* sweep = app.add_subcommand("sweep", "run the methods over a list of S or V values");
  add_common(sweep, common);
  std::string var = "S";
  std::string values = "2,4,6,8";
  int reps = 1;
  sweep->add_option("--var", var, "swept variable")->check(CLI::IsMember({"S", "V"}));
  sweep->add_option("--values", values, "comma-separated values");
  sweep->add_option("--reps", reps, "repetitions per value (seed + rep)")->check(CLI::PositiveNumber);

  auto* pmap = app.add_subcommand("powermap", "harvested power over a plane for a solved allocation");
  add_common(pmap, common);
  xlhpe::PlaneSpec plane;
  std::string method_tag = "PA-SA";
  std::vector<double> extent;
  pmap->add_option("--plane", plane.axes, "xz, xy or yz")->check(CLI::IsMember({"xz", "xy", "yz"}));
  pmap->add_option("--res", plane.resolution, "points per axis")->check(CLI::PositiveNumber);
  pmap->add_option("--extent", extent, "u_min u_max v_min v_max [m]")->expected(4);
  pmap->add_option("--fixed", plane.fixed, "coordinate along the third axis [m]");
  pmap->add_option("--method", method_tag, "allocation to map")->check(CLI::IsMember({"PA-SA", "PA-FA", "PA-ES", "EA-FA"}));

  auto* bench = app.add_subcommand("bench", "wall clock of PA-ES and PA-SA against S");
  add_common(bench, common);
  std::string bench_values = "6,7,8,9,10";
  int bench_reps = 3;
  int bench_scenarios = 3;
  bench->add_option("--values", bench_values, "comma-separated S values");
  bench->add_option("--reps", bench_reps, "timed repetitions per point (median kept)")->check(CLI::PositiveNumber);
  bench->add_option("--scenarios", bench_scenarios, "seeded user layouts averaged per point")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    xlhpe::configure_workers_from_env();
    if (*solve) return run_solve(common);
    if (*sweep) return run_sweep(common, var, values, reps);
    if (*pmap) {
      if (extent.size() == 4) {
        plane.u_min = extent[0];
        plane.u_max = extent[1];
        plane.v_min = extent[2];
        plane.v_max = extent[3];
      }
      return run_powermap(common, plane, method_tag);
    }
    if (*bench) return run_bench(common, bench_values, bench_reps, bench_scenarios);
  } catch (const xlhpe::SolverFault& e) {
    std::cerr << "solver fault: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
