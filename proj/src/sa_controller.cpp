#include "xlhpe/sa_controller.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace xlhpe {

void SAConfig::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (max_sa_iters < 1) throw std::invalid_argument("max_sa_iters must be >= 1");
}

Eigen::VectorXd surrogate(const Eigen::MatrixXd& omega_tilde) {
  const double total = omega_tilde.sum();
  if (!(total > 0.0)) throw std::invalid_argument("surrogate needs nonzero transmitted power");
  return omega_tilde.rowwise().sum() / total;
}

Eigen::VectorXd activation_update(const Eigen::VectorXd& g) {
  if (g.size() == 0) throw std::invalid_argument("activation_update needs S >= 1");
  const double mean = g.mean();
  const double threshold = mean - 1e-12 * std::abs(mean);
  Eigen::VectorXd a = (g.array() >= threshold).cast<double>();
  if (a.sum() == 0.0) {
    Eigen::Index best = 0;
    g.maxCoeff(&best);
    a[best] = 1.0;
  }
  return a;
}

Eigen::VectorXd parameterize(const Eigen::VectorXd& a, const Eigen::VectorXd& g) {
  if (a.size() != g.size()) throw std::invalid_argument("a and g must have the same length");
  return g.cwiseProduct(a);
}

JointResult joint_solve(const ChannelSet& ch, const PAConfig& pa_cfg, const SAConfig& sa_cfg,
                        const PowerConfig& power_cfg) {
  pa_cfg.validate();
  sa_cfg.validate();
  power_cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();

  const int S = ch.S;
  const double P_s = power_cfg.subarray_budget(ch.Ns);

  JointResult out;
  out.allocation = AllocationState::equal_split(S, ch.M, P_s);
  SolveReport& report = out.report;
  report.method = "PA-SA";

  double previous = hpe(ch, out.allocation, power_cfg, Activation::Binary);
  report.hpe_trace.push_back(previous);
  report.active_trace.push_back(S);

  Eigen::VectorXd a = Eigen::VectorXd::Ones(S);
  Eigen::MatrixXd omega_tilde = out.allocation.omega;

  PAConfig warm = pa_cfg;
  warm.lambda0_from_start = !sa_cfg.cold_start;

  for (int i = 1; i <= sa_cfg.max_sa_iters; ++i) {
    SAIteration it;
    it.i = i;
    it.g = omega_tilde.sum() > 0.0 ? surrogate(omega_tilde) : Eigen::VectorXd(a / a.sum());
    // pruning only: a switched-off sub-array has a zero row and cannot return
    it.a = activation_update(it.g).cwiseProduct(a);
    if (it.a.sum() == 0.0) {
      Eigen::Index best = 0;
      it.g.maxCoeff(&best);
      it.a[best] = 1.0;
    }
    it.a_tilde = parameterize(it.a, it.g);
    if (it.a_tilde.sum() == 0.0) it.a_tilde = it.a / it.a.sum();

    const std::optional<Eigen::MatrixXd> start =
        sa_cfg.cold_start ? std::nullopt : std::optional<Eigen::MatrixXd>(omega_tilde);
    const PAResult parameterized = pa_solve(ch, it.a_tilde, warm, power_cfg, start);
    const PAResult binary = pa_solve(ch, it.a, warm, power_cfg, parameterized.omega);
    report.pa_solves += 2;

    it.parameterized_ratio = parameterized.ratio;
    it.pa_outer_parameterized = static_cast<int>(parameterized.trace.size());
    it.pa_outer_binary = static_cast<int>(binary.trace.size());
    it.hpe = hpe(ch, binary.omega, it.a, power_cfg);
    it.accepted = it.hpe >= previous;
    report.iterations.push_back(it);

    if (!it.accepted) {
      report.converged = true;
      break;
    }
    report.hpe_trace.push_back(it.hpe);
    report.active_trace.push_back(static_cast<int>(it.a.sum()));
    report.pa_trace = binary.trace;
    out.allocation.omega = binary.omega;
    out.allocation.a = it.a;
    out.allocation.a_tilde = it.a_tilde;
    a = it.a;
    omega_tilde = parameterized.omega;

    const bool settled = std::abs(it.hpe - previous) <= sa_cfg.delta * previous;
    previous = it.hpe;
    if (settled) {
      report.converged = true;
      break;
    }
  }

  report.hpe = report.hpe_trace.back();
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

}  // namespace xlhpe
