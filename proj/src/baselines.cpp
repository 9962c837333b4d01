#include "xlhpe/baselines.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "xlhpe/parallel.hpp"

namespace xlhpe {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Eigen::VectorXd subset_activation(int S, unsigned mask) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(S);
  for (int s = 0; s < S; ++s) {
    if (mask & (1u << s)) a[s] = 1.0;
  }
  return a;
}

struct SubsetOutcome {
  double hpe = -1.0;
  Eigen::MatrixXd omega;
  std::vector<DinkelbachState> trace;
};

SubsetOutcome solve_subset(const ChannelSet& ch, const PAConfig& pa_cfg, const PowerConfig& power_cfg,
                           unsigned mask) {
  const Eigen::VectorXd a = subset_activation(ch.S, mask);
  PAResult r = pa_solve(ch, a, pa_cfg, power_cfg);
  SubsetOutcome out;
  out.hpe = hpe(ch, r.omega, a, power_cfg);
  out.omega = std::move(r.omega);
  out.trace = std::move(r.trace);
  return out;
}

void check_es_cap(int S, int cap) {
  if (S > cap || S > 30) {
    throw std::invalid_argument("exhaustive search over S=" + std::to_string(S) +
                                " sub-arrays exceeds the cap of " + std::to_string(cap) +
                                "; raise solver.es_cap or drop PA-ES from the method list");
  }
}

// Index of the winning subset with the documented tie-break.
size_t pick_best(const std::vector<SubsetOutcome>& outcomes) {
  size_t best = 0;
  for (size_t i = 1; i < outcomes.size(); ++i) {
    const unsigned mask_i = static_cast<unsigned>(i + 1);
    const unsigned mask_b = static_cast<unsigned>(best + 1);
    if (outcomes[i].hpe > outcomes[best].hpe) {
      best = i;
    } else if (outcomes[i].hpe == outcomes[best].hpe && std::popcount(mask_i) < std::popcount(mask_b)) {
      best = i;
    }
  }
  return best;
}

MethodResult assemble_es(const ChannelSet& ch, std::vector<SubsetOutcome>& outcomes, Clock::time_point t0) {
  const size_t best = pick_best(outcomes);
  const unsigned mask = static_cast<unsigned>(best + 1);
  MethodResult r;
  r.method = Method::PA_ES;
  r.hpe = outcomes[best].hpe;
  r.allocation.omega = std::move(outcomes[best].omega);
  r.allocation.a = subset_activation(ch.S, mask);
  r.allocation.a_tilde = r.allocation.a;
  r.active_count = std::popcount(mask);
  r.report.method = "PA-ES";
  r.report.hpe = r.hpe;
  r.report.hpe_trace = {r.hpe};
  r.report.active_trace = {r.active_count};
  r.report.pa_trace = std::move(outcomes[best].trace);
  r.report.pa_solves = static_cast<int>(outcomes.size());
  r.report.converged = true;
  r.seconds = seconds_since(t0);
  r.report.seconds = r.seconds;
  return r;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::PA_SA: return "PA-SA";
    case Method::PA_FA: return "PA-FA";
    case Method::PA_ES: return "PA-ES";
    case Method::EA_FA: return "EA-FA";
  }
  return "unknown";
}

Method method_from_string(std::string_view tag) {
  if (tag == "PA-SA") return Method::PA_SA;
  if (tag == "PA-FA") return Method::PA_FA;
  if (tag == "PA-ES") return Method::PA_ES;
  if (tag == "EA-FA") return Method::EA_FA;
  throw std::invalid_argument("unknown method tag '" + std::string(tag) + "'");
}

MethodResult ea_fa(const ChannelSet& ch, const PowerConfig& power_cfg) {
  const auto t0 = Clock::now();
  MethodResult r;
  r.method = Method::EA_FA;
  r.allocation = AllocationState::equal_split(ch.S, ch.M, power_cfg.subarray_budget(ch.Ns));
  r.hpe = hpe(ch, r.allocation, power_cfg, Activation::Binary);
  r.active_count = ch.S;
  r.seconds = seconds_since(t0);
  r.report.method = "EA-FA";
  r.report.hpe = r.hpe;
  r.report.hpe_trace = {r.hpe};
  r.report.active_trace = {ch.S};
  r.report.converged = true;
  r.report.seconds = r.seconds;
  return r;
}

MethodResult pa_fa(const ChannelSet& ch, const PAConfig& pa_cfg, const PowerConfig& power_cfg) {
  const auto t0 = Clock::now();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ch.S);
  PAResult pa = pa_solve(ch, ones, pa_cfg, power_cfg);
  MethodResult r;
  r.method = Method::PA_FA;
  r.allocation.omega = std::move(pa.omega);
  r.allocation.a = ones;
  r.allocation.a_tilde = ones;
  r.hpe = hpe(ch, r.allocation, power_cfg, Activation::Binary);
  r.active_count = ch.S;
  r.seconds = seconds_since(t0);
  r.report.method = "PA-FA";
  r.report.hpe = r.hpe;
  r.report.hpe_trace = {r.hpe};
  r.report.active_trace = {ch.S};
  r.report.pa_trace = std::move(pa.trace);
  r.report.pa_solves = 1;
  r.report.converged = pa.converged;
  r.report.seconds = r.seconds;
  return r;
}

MethodResult pa_sa(const ChannelSet& ch, const PAConfig& pa_cfg, const SAConfig& sa_cfg,
                   const PowerConfig& power_cfg) {
  const auto t0 = Clock::now();
  JointResult joint = joint_solve(ch, pa_cfg, sa_cfg, power_cfg);
  MethodResult r;
  r.method = Method::PA_SA;
  r.allocation = std::move(joint.allocation);
  r.report = std::move(joint.report);
  r.hpe = r.report.hpe;
  r.active_count = static_cast<int>(r.allocation.a.sum());
  r.seconds = seconds_since(t0);
  return r;
}

MethodResult pa_es(const ChannelSet& ch, const PAConfig& pa_cfg, const PowerConfig& power_cfg, int cap) {
  check_es_cap(ch.S, cap);
  const auto t0 = Clock::now();
  const size_t count = (size_t{1} << ch.S) - 1;
  std::vector<SubsetOutcome> outcomes(count);
  parallel_for(
      static_cast<std::ptrdiff_t>(count),
      [&](std::ptrdiff_t i) {
        outcomes[static_cast<size_t>(i)] = solve_subset(ch, pa_cfg, power_cfg, static_cast<unsigned>(i + 1));
      },
      /*dynamic_schedule=*/true);
  return assemble_es(ch, outcomes, t0);
}

namespace reference {

MethodResult pa_es(const ChannelSet& ch, const PAConfig& pa_cfg, const PowerConfig& power_cfg, int cap) {
  check_es_cap(ch.S, cap);
  const auto t0 = Clock::now();
  std::vector<SubsetOutcome> outcomes;
  for (unsigned mask = 1; mask < (1u << ch.S); ++mask) outcomes.push_back(solve_subset(ch, pa_cfg, power_cfg, mask));
  return assemble_es(ch, outcomes, t0);
}

}  // namespace reference

double grid_oracle(const ChannelSet& ch, const PowerConfig& power_cfg, const Eigen::VectorXd& activation,
                   int steps) {
  if (ch.S * ch.M > 4) throw std::invalid_argument("grid oracle is limited to S*M <= 4 variables");
  if (steps < 1) throw std::invalid_argument("grid oracle needs steps >= 1");
  if (activation.size() != ch.S) throw std::invalid_argument("activation must have S entries");

  const int S = ch.S;
  const int M = ch.M;
  const double P_s = power_cfg.subarray_budget(ch.Ns);
  const double P_t = power_cfg.total_budget(S, ch.Ns);
  const double unit = P_s / steps;

  // coef[(s*M + m)*M + k] = w_s kappa_{s,m} g_{s,k}^T conj(g_{s,m})
  std::vector<std::complex<double>> coef(static_cast<size_t>(S * M * M));
  for (int s = 0; s < S; ++s) {
    for (int m = 0; m < M; ++m) {
      for (int k = 0; k < M; ++k) {
        coef[static_cast<size_t>((s * M + m) * M + k)] =
            activation[s] * ch.kappa(s, m) * ch.cross[static_cast<size_t>(s)](k, m);
      }
    }
  }
  std::vector<double> root(static_cast<size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) root[static_cast<size_t>(i)] = std::sqrt(i * unit);

  double circuit = M * power_cfg.P_cr;
  for (int s = 0; s < S; ++s) circuit += activation[s] * (2.0 * power_cfg.P_syn + ch.Ns * power_cfg.P_ct);

  std::vector<int> active_vars;
  for (int s = 0; s < S; ++s) {
    if (activation[s] == 0.0) continue;
    for (int m = 0; m < M; ++m) active_vars.push_back(s * M + m);
  }

  std::vector<int> level(static_cast<size_t>(S * M), 0);
  double best = 0.0;
  while (true) {
    bool feasible = true;
    double transmit = 0.0;
    double total_tx = 0.0;
    for (int s = 0; s < S && feasible; ++s) {
      int row = 0;
      for (int m = 0; m < M; ++m) row += level[static_cast<size_t>(s * M + m)];
      feasible = row <= steps;
      transmit += activation[s] * row * unit / power_cfg.varsigma;
      total_tx += activation[s] != 0.0 ? row * unit : 0.0;
    }
    if (feasible && total_tx <= P_t * (1.0 + 1e-12)) {
      double harvested = 0.0;
      for (int m = 0; m < M; ++m) {
        for (int k = 0; k < M; ++k) {
          std::complex<double> acc{0.0, 0.0};
          for (int s = 0; s < S; ++s) {
            acc += coef[static_cast<size_t>((s * M + m) * M + k)] * root[static_cast<size_t>(level[static_cast<size_t>(s * M + m)])];
          }
          harvested += std::norm(acc);
        }
      }
      const double denom = transmit + circuit;
      if (denom > 0.0) best = std::max(best, harvested / denom);
    }
    // odometer over the active variables
    size_t v = 0;
    for (; v < active_vars.size(); ++v) {
      int& l = level[static_cast<size_t>(active_vars[v])];
      if (l < steps) {
        ++l;
        break;
      }
      l = 0;
    }
    if (v == active_vars.size()) break;
  }
  return best;
}

std::vector<MethodResult> normalize(std::vector<MethodResult> results) {
  const MethodResult* baseline = nullptr;
  for (const auto& r : results) {
    if (r.method == Method::EA_FA && r.ok) baseline = &r;
  }
  if (baseline == nullptr) throw std::invalid_argument("normalization needs an EA-FA result");
  const double ref = baseline->hpe;
  for (auto& r : results) {
    r.eta = ref > 0.0 ? r.hpe / ref : std::numeric_limits<double>::quiet_NaN();
  }
  return results;
}

}  // namespace xlhpe
