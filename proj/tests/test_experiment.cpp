#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doctest.h"

#include "xlhpe/experiment.hpp"
#include "xlhpe/parallel.hpp"

using namespace xlhpe;

namespace {

ScenarioConfig small(int S = 3) {
  ScenarioConfig cfg;
  cfg.geometry.S = S;
  cfg.geometry.Nx = 16;
  cfg.geometry.Ny = 4;
  refresh_geometry(cfg);
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("results rows and headers") {
  const ScenarioConfig cfg = small();
  const ScenarioRun run = run_scenario(cfg);
  REQUIRE(run.results.size() == 4);
  for (const auto& r : run.results) CHECK(r.ok);
  CHECK(run.results[0].method == Method::EA_FA);
  CHECK(run.results[0].eta == 1.0);

  std::ostringstream res;
  write_results_csv(res, run.results, 3, 1, {false});
  CHECK(first_line(res.str()) == "method,S,V,hpe,eta,active_count,seconds");
  CHECK(res.str().find("\nEA-FA,3,1,") != std::string::npos);

  std::ostringstream tr;
  write_pa_trace_csv(tr, run.results[1].report.pa_trace, {false});
  CHECK(first_line(tr.str()) == "t,lambda,phi_watts,harvested_watts,consumed_watts,dr_residual,wall_clock_ns");

  std::ostringstream conv;
  write_convergence_csv(conv, run.results[2].report);
  CHECK(first_line(conv.str()) == "iteration,hpe,fraction_of_final,active_count");
  const auto& trace = run.results[2].report.hpe_trace;
  CHECK(trace.back() == doctest::Approx(run.results[2].hpe));
}

TEST_CASE("a failing method is recorded and the rest still run") {
  ScenarioConfig cfg = small(4);
  cfg.es_cap = 3;
  const ScenarioRun run = run_scenario(cfg);
  int failed = 0;
  for (const auto& r : run.results) {
    if (r.method == Method::PA_ES) {
      CHECK_FALSE(r.ok);
      CHECK_FALSE(r.error.empty());
      ++failed;
    } else {
      CHECK(r.ok);
    }
  }
  CHECK(failed == 1);
  std::ostringstream res;
  write_results_csv(res, run.results, 4, 1, {false});
  CHECK(res.str().find("PA-ES,4,1,nan,nan,0,0") != std::string::npos);
}

TEST_CASE("identical inputs give identical bytes") {
  const auto root = std::filesystem::temp_directory_path() / "xlhpe_determinism";
  std::filesystem::remove_all(root);
  const ScenarioConfig cfg = small();
  write_run(root / "a", run_scenario(cfg), cfg, {false});
  write_run(root / "b", run_scenario(cfg), cfg, {false});
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(root / "a")) {
    const auto other = root / "b" / entry.path().filename();
    REQUIRE(std::filesystem::exists(other));
    CHECK(slurp(entry.path()) == slurp(other));
    ++files;
  }
  CHECK(files >= 5);
  CHECK(std::filesystem::exists(root / "a" / "convergence.csv"));
  CHECK(std::filesystem::exists(root / "a" / "pa_trace_PA-SA.csv"));
  std::filesystem::remove_all(root);
}

TEST_CASE("sweep rows are ordered and independent of the thread count") {
  ScenarioConfig cfg = small();
  cfg.methods = {Method::EA_FA, Method::PA_FA, Method::PA_SA};
  SweepSpec spec;
  spec.values = {1, 2};
  spec.reps = 2;
  const int saved = worker_count();
  set_worker_count(1);
  const auto one = sweep(cfg, spec);
  set_worker_count(3);
  const auto many = sweep(cfg, spec);
  set_worker_count(saved);
  REQUIRE(one.size() == 12);
  REQUIRE(many.size() == 12);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].value == many[i].value);
    CHECK(one[i].method == many[i].method);
    CHECK(one[i].hpe == many[i].hpe);
    CHECK(one[i].ok);
  }
  CHECK(one[0].value == 1);
  CHECK(one[0].rep == 0);
  CHECK(one[3].rep == 1);
  CHECK(one[3].seed == one[0].seed + 1);

  std::ostringstream os;
  write_sweep_csv(os, "S", one, {false});
  CHECK(first_line(os.str()) == "S,rep,seed,method,S,V,ok,hpe,eta,active_count,active_ratio,seconds");
  std::ostringstream sum;
  write_sweep_summary_csv(sum, "S", one, cfg.methods, SweepMetric::Eta, {false});
  CHECK(first_line(sum.str()) == "S,EA-FA_eta,PA-FA_eta,PA-SA_eta");
}

TEST_CASE("power map") {
  ScenarioConfig cfg = small();
  cfg.explicit_users = true;
  cfg.users = {{{-0.4, 0.0, 0.7}}, {{0.3, 0.0, 0.9}}};
  const ChannelSet ch = build_channel_set(cfg.geometry, cfg.users);
  const MethodResult sol = run_method(Method::PA_FA, cfg, ch);

  SUBCASE("a 1x1 raster at a user is that user's term") {
    PlaneSpec plane;
    plane.resolution = 1;
    plane.u_min = plane.u_max = -0.4;
    plane.v_min = plane.v_max = 0.7;
    const PowerMap map = emit_powermap(cfg, ch, sol.allocation, plane);
    REQUIRE(map.watts.size() == 1);
    const auto direct = power_map(cfg.geometry, sol.allocation, ch, {cfg.users[0].p});
    CHECK(map.watts[0] == doctest::Approx(direct[0]).epsilon(1e-12));
    std::ostringstream os;
    write_powermap_csv(os, map);
    CHECK(first_line(os.str()) == "x_m,z_m,watts");
  }
  SUBCASE("no power gives a zero map") {
    AllocationState off = sol.allocation;
    off.omega.setZero();
    PlaneSpec plane;
    plane.resolution = 5;
    for (double w : emit_powermap(cfg, ch, off, plane).watts) CHECK(w == 0.0);
  }
  SUBCASE("the peak around a user sits within one cell of it") {
    // equal split serves both users; the optimized design may starve one
    const MethodResult equal = run_method(Method::EA_FA, cfg, ch);
    for (const auto& u : cfg.users) {
      PlaneSpec plane;
      plane.resolution = 41;
      plane.u_min = u.p.x - 0.2;
      plane.u_max = u.p.x + 0.2;
      plane.v_min = u.p.z - 0.2;
      plane.v_max = u.p.z + 0.2;
      const PowerMap map = emit_powermap(cfg, ch, equal.allocation, plane);
      std::size_t best = 0;
      for (std::size_t i = 1; i < map.watts.size(); ++i) {
        if (map.watts[i] > map.watts[best]) best = i;
      }
      const double cell = 0.4 / 40.0;
      CHECK(std::abs(map.probes[best].x - u.p.x) <= cell + 1e-12);
      CHECK(std::abs(map.probes[best].z - u.p.z) <= cell + 1e-12);
    }
  }
  SUBCASE("bad planes are rejected") {
    PlaneSpec plane;
    plane.resolution = 0;
    CHECK_THROWS_AS(plane.validate(), std::invalid_argument);
    plane.resolution = 3;
    plane.axes = "xx";
    CHECK_THROWS_AS(plane.validate(), std::invalid_argument);
  }
}

TEST_CASE("growth fit") {
  CHECK(fit_growth({1, 2, 3, 4}, {2.0, 4.0, 8.0, 16.0}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit_growth({6, 7, 8}, {0.5, 0.5, 0.5}) == doctest::Approx(1.0).epsilon(1e-12));
  std::ostringstream os;
  write_bench_csv(os, BenchResult{});
  CHECK(first_line(os.str()) == "S,method,seconds,hpe");
}
