#include <cmath>
#include <stdexcept>

#include "doctest.h"

#include "xlhpe/baselines.hpp"
#include "xlhpe/pa_optimizer.hpp"

using namespace xlhpe;

namespace {

ChannelSet small_layout(int S, const std::vector<UserPosition>& users) {
  const ArrayGeometry g = ArrayGeometry::modular_row(S, 8, 4, 0.05, 0.1, 0.025, 2.0);
  return build_channel_set(g, users);
}

ChannelSet default_layout() {
  const ArrayGeometry g = ArrayGeometry::modular_row(6, 32, 8, 0.05, 0.1, 0.025, 2.0);
  return build_channel_set(g, {{{-0.6, 0.0, 1.0}}, {{-0.4, 0.0, 1.1}}, {{0.7, 0.0, 0.9}}});
}

}  // namespace

TEST_CASE("dinkelbach objective") {
  const ChannelSet ch = default_layout();
  const PowerConfig cfg;
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(6);
  const Eigen::MatrixXd omega = Eigen::MatrixXd::Constant(6, 3, 12.8 / 3);
  CHECK(dinkelbach_phi(ch, omega, w, 0.0, cfg) == doctest::Approx(harvested_power(ch, omega, w)).epsilon(1e-14));
  const double r = hpe(ch, omega, w, cfg);
  CHECK(std::abs(dinkelbach_phi(ch, omega, w, r, cfg)) < 1e-12);
  const double lam = 0.02;
  CHECK(dinkelbach_phi(ch, Eigen::MatrixXd::Zero(6, 3), w, lam, cfg) ==
        doctest::Approx(-lam * consumed_power(Eigen::MatrixXd::Zero(6, 3), w, cfg, 3, 256)).epsilon(1e-14));
}

TEST_CASE("inner solve on a linear scalar objective goes to the right corner") {
  Eigen::VectorXcd h(4);
  h << 0.5, std::complex<double>(0.0, 0.5), -0.25, std::complex<double>(0.25, 0.0);
  h *= std::sqrt(0.5) / h.norm();
  const ChannelSet ch = ChannelSet::from_vectors(1, 1, {h});
  const PowerConfig cfg;
  const PAConfig pa;
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(1);
  const Eigen::MatrixXd start = Eigen::MatrixXd::Constant(1, 1, 0.1);
  // slope of phi is 0.5 - lambda / varsigma
  CHECK(dr_solve(ch, w, 0.1, pa, cfg, start).omega(0, 0) == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(dr_solve(ch, w, 0.3, pa, cfg, start).omega(0, 0) == doctest::Approx(0.0).scale(1e-6));
}

TEST_CASE("inner solve never loses ground and stays feasible") {
  const ChannelSet ch = default_layout();
  const PowerConfig cfg;
  const PAConfig pa;
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(6);
  const PAProblem problem(ch, w, cfg);
  const HarvestProx prox(problem.form(), select_step(problem.form(), pa.gamma));
  const Eigen::MatrixXd start = problem.initial_omega();
  for (double lam : {0.0, 0.01, 0.02}) {
    const DRResult r = dr_solve(problem, prox, lam, start, pa);
    CHECK(r.omega.minCoeff() >= 0.0);
    for (int s = 0; s < 6; ++s) CHECK(r.omega.row(s).sum() <= 12.8 * (1.0 + 1e-9));
    CHECK(problem.phi(r.omega, lam) >= problem.phi(start, lam) - 1e-12);
    if (r.converged) CHECK(r.residual <= pa.dr_residual_tol);
  }
}

TEST_CASE("power allocation on the default layout") {
  const ChannelSet ch = default_layout();
  const PowerConfig cfg;
  const PAConfig pa;
  const PAResult r = pa_solve(ch, Eigen::VectorXd::Ones(6), pa, cfg);
  REQUIRE(r.converged);
  REQUIRE(!r.trace.empty());
  CHECK(r.trace.back().residual <= pa.epsilon);
  for (std::size_t t = 1; t < r.trace.size(); ++t) CHECK(r.trace[t].lambda >= r.trace[t - 1].lambda);
  CHECK(r.omega.minCoeff() >= 0.0);
  for (int s = 0; s < 6; ++s) CHECK(r.omega.row(s).sum() <= 12.8 * (1.0 + 1e-9));
  const double equal = hpe(ch, AllocationState::equal_split(6, 3, 12.8), cfg, Activation::Binary);
  CHECK(r.ratio >= equal);
  CHECK(r.ratio == doctest::Approx(hpe(ch, r.omega, Eigen::VectorXd::Ones(6), cfg)).epsilon(1e-12));
}

TEST_CASE("power allocation reaches the grid optimum on small instances") {
  const PowerConfig cfg;
  const PAConfig pa;
  SUBCASE("one pair") {
    const ChannelSet ch = small_layout(1, {{{0.1, 0.0, 0.7}}});
    const double grid = grid_oracle(ch, cfg, Eigen::VectorXd::Ones(1), 2000);
    CHECK(pa_solve(ch, Eigen::VectorXd::Ones(1), pa, cfg).ratio >= 0.99 * grid);
  }
  SUBCASE("two sub-arrays, one user") {
    const ChannelSet ch = small_layout(2, {{{-0.15, 0.0, 0.6}}});
    const double grid = grid_oracle(ch, cfg, Eigen::VectorXd::Ones(2), 200);
    CHECK(pa_solve(ch, Eigen::VectorXd::Ones(2), pa, cfg).ratio >= 0.99 * grid);
  }
  SUBCASE("two sub-arrays, two users") {
    const ChannelSet ch = small_layout(2, {{{-0.3, 0.0, 0.6}}, {{0.25, 0.05, 0.5}}});
    const double grid = grid_oracle(ch, cfg, Eigen::VectorXd::Ones(2), 30);
    CHECK(pa_solve(ch, Eigen::VectorXd::Ones(2), pa, cfg).ratio >= 0.99 * grid);
  }
}

TEST_CASE("blocked users get no power and inactive rows stay empty") {
  const ChannelSet ch = small_layout(3, {{{0.0, 0.0, 0.8}}, {{0.0, 0.0, -0.5}}});
  Eigen::VectorXd w(3);
  w << 1.0, 0.0, 0.6;
  const PAResult r = pa_solve(ch, w, PAConfig{}, PowerConfig{});
  CHECK(r.omega.col(1).norm() == 0.0);
  CHECK(r.omega.row(1).norm() == 0.0);
  CHECK_THROWS_AS(pa_solve(ch, Eigen::VectorXd::Zero(3), PAConfig{}, PowerConfig{}), std::invalid_argument);
}

TEST_CASE("warm start and large initial ratio") {
  const ChannelSet ch = default_layout();
  const PowerConfig cfg;
  PAConfig pa;
  const PAResult cold = pa_solve(ch, Eigen::VectorXd::Ones(6), pa, cfg);
  const PAResult warm = pa_solve(ch, Eigen::VectorXd::Ones(6), pa, cfg, cold.omega);
  CHECK(warm.ratio >= cold.ratio * (1.0 - 1e-9));
  CHECK(warm.trace.size() <= cold.trace.size());
  pa.lambda0 = 10.0 * cold.ratio;
  const PAResult high = pa_solve(ch, Eigen::VectorXd::Ones(6), pa, cfg);
  CHECK(high.ratio >= 0.0);
  CHECK(std::isfinite(high.ratio));
}
