#include <cmath>
#include <stdexcept>

#include "doctest.h"

#include "xlhpe/baselines.hpp"
#include "xlhpe/parallel.hpp"
#include "xlhpe/scenario.hpp"

using namespace xlhpe;

namespace {

ChannelSet generated(int S, int V, std::uint64_t seed) {
  ClusterGenerator gen;
  gen.V = V;
  const ArrayGeometry g = ArrayGeometry::modular_row(S, 32, 8, 0.05, 0.1, 0.025, 2.0);
  return build_channel_set(g, generate_users(gen, seed));
}

}  // namespace

TEST_CASE("method tags") {
  for (Method m : {Method::PA_SA, Method::PA_FA, Method::PA_ES, Method::EA_FA}) {
    CHECK(method_from_string(to_string(m)) == m);
  }
  CHECK(to_string(Method::PA_ES) == "PA-ES");
  CHECK_THROWS_AS(method_from_string("PA_SA"), std::invalid_argument);
}

TEST_CASE("equal split baseline") {
  const ChannelSet ch = generated(4, 1, 2);
  const MethodResult r = ea_fa(ch, PowerConfig{});
  CHECK(r.active_count == 4);
  for (int s = 0; s < 4; ++s) CHECK(r.allocation.omega.row(s).sum() == doctest::Approx(12.8).epsilon(1e-14));
  const auto norm = normalize({r});
  CHECK(norm[0].eta == 1.0);
}

TEST_CASE("dominance chain on seeded layouts") {
  const PowerConfig cfg;
  const PAConfig pa;
  const SAConfig sa;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (int V : {1, 2}) {
      const ChannelSet ch = generated(4, V, seed);
      const MethodResult ea = ea_fa(ch, cfg);
      const MethodResult fa = pa_fa(ch, pa, cfg);
      const MethodResult sar = pa_sa(ch, pa, sa, cfg);
      const MethodResult es = pa_es(ch, pa, cfg);
      CHECK(fa.hpe >= ea.hpe * (1.0 - 1e-9));
      CHECK(sar.hpe >= fa.hpe * (1.0 - 1e-6));
      CHECK(es.hpe >= sar.hpe * (1.0 - 1e-6));
      CHECK(es.hpe >= fa.hpe * (1.0 - 1e-9));
      CHECK(es.report.pa_solves == 15);
      CHECK(es.active_count >= 1);
      CHECK(es.active_count == static_cast<int>(es.allocation.a.sum()));
      CHECK(fa.active_count == 4);
    }
  }
}

TEST_CASE("exhaustive search on one sub-array is full-array allocation") {
  const ChannelSet ch = generated(1, 1, 5);
  const MethodResult es = pa_es(ch, PAConfig{}, PowerConfig{});
  const MethodResult fa = pa_fa(ch, PAConfig{}, PowerConfig{});
  CHECK(es.report.pa_solves == 1);
  CHECK(es.hpe == doctest::Approx(fa.hpe).epsilon(1e-12));
}

TEST_CASE("exhaustive search is independent of the thread count") {
  const ChannelSet ch = generated(5, 2, 4);
  const int saved = worker_count();
  set_worker_count(3);
  const MethodResult par = pa_es(ch, PAConfig{}, PowerConfig{});
  set_worker_count(saved);
  const MethodResult ser = reference::pa_es(ch, PAConfig{}, PowerConfig{});
  CHECK(par.hpe == ser.hpe);
  CHECK(par.allocation.a == ser.allocation.a);
  CHECK((par.allocation.omega - ser.allocation.omega).norm() == 0.0);
}

TEST_CASE("exhaustive search ties go to the smaller, lower subset") {
  const ChannelSet base = generated(1, 1, 6);
  // two sub-arrays with identical channels: {0} and {1} tie exactly
  const ChannelSet ch = ChannelSet::from_vectors(2, 1, {base.g[0], base.g[0]});
  const MethodResult es = pa_es(ch, PAConfig{}, PowerConfig{});
  if (es.active_count == 1) CHECK(es.allocation.a(0) == 1.0);
  CHECK(es.report.pa_solves == 3);
}

TEST_CASE("exhaustive search cap") {
  const ChannelSet ch = generated(4, 1, 1);
  CHECK_THROWS_AS(pa_es(ch, PAConfig{}, PowerConfig{}, 3), std::invalid_argument);
}

TEST_CASE("grid oracle") {
  const PowerConfig cfg;
  const ChannelSet ch = generated(2, 1, 2);
  CHECK_THROWS_AS(grid_oracle(generated(3, 2, 1), cfg, Eigen::VectorXd::Ones(3), 4), std::invalid_argument);
  CHECK_THROWS_AS(grid_oracle(ch, cfg, Eigen::VectorXd::Ones(3), 4), std::invalid_argument);
  CHECK_THROWS_AS(grid_oracle(ch, cfg, Eigen::VectorXd::Ones(2), 0), std::invalid_argument);
  const ChannelSet one = ChannelSet::from_vectors(2, 1, {ch.g[0], ch.g[1]});
  Eigen::VectorXd only_first(2);
  only_first << 1.0, 0.0;
  double prev = 0.0;
  for (int steps : {2, 4, 8, 16}) {
    const double v = grid_oracle(one, cfg, Eigen::VectorXd::Ones(2), steps);
    CHECK(v >= prev);
    prev = v;
  }
  // single pair: the best point is at full power or nothing
  const double n2 = ch.at(0, 0).squaredNorm();
  const double P_s = 12.8;
  const double full = P_s * n2 / (P_s / cfg.varsigma + 2.0 * cfg.P_syn + 256 * cfg.P_ct + cfg.P_cr);
  CHECK(grid_oracle(one, cfg, only_first, 1) == doctest::Approx(full).epsilon(1e-12));
}

TEST_CASE("normalization") {
  MethodResult a;
  a.method = Method::PA_FA;
  a.hpe = 2.0;
  CHECK_THROWS_AS(normalize({a}), std::invalid_argument);
  MethodResult ref;
  ref.method = Method::EA_FA;
  ref.hpe = 0.5;
  const auto out = normalize({a, ref});
  CHECK(out[0].eta == doctest::Approx(4.0));
  CHECK(out[1].eta == 1.0);
  ref.hpe = 0.0;
  CHECK(std::isnan(normalize({a, ref})[0].eta));
}
