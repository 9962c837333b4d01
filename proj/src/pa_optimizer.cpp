#include "xlhpe/pa_optimizer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace xlhpe {

void PAConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (max_outer < 1 || max_dr < 1) throw std::invalid_argument("iteration caps must be >= 1");
  if (!(dr_residual_tol > 0.0)) throw std::invalid_argument("dr_residual_tol must be positive");
  if (!(lambda0 >= 0.0)) throw std::invalid_argument("lambda0 must be >= 0");
}

double dinkelbach_phi(const ChannelSet& ch, const Eigen::MatrixXd& omega, const Eigen::VectorXd& a_tilde,
                      double lambda, const PowerConfig& cfg) {
  return harvested_power(ch, omega, a_tilde) - lambda * consumed_power(omega, a_tilde, cfg, ch.M, ch.Ns);
}

PAProblem::PAProblem(const ChannelSet& ch, const Eigen::VectorXd& weights, const PowerConfig& cfg)
    : ch_(&ch), weights_(weights), cfg_(cfg), form_(HarvestForm::build(ch, weights)) {
  slopes_ = weights_ / cfg_.varsigma;
  P_s_ = cfg_.subarray_budget(ch.Ns);
  P_t_ = cfg_.total_budget(ch.S, ch.Ns);
  mask_ = EntryMask::Constant(ch.S, ch.M, true);
  for (int s = 0; s < ch.S; ++s) {
    if (weights_[s] == 0.0) mask_.row(s).setConstant(false);
  }
  for (int m = 0; m < ch.M; ++m) {
    if (ch.user_blocked(m)) mask_.col(m).setConstant(false);
  }
}

double PAProblem::harvested(const Eigen::MatrixXd& omega) const { return form_.value(omega.cwiseSqrt()); }

double PAProblem::consumed(const Eigen::MatrixXd& omega) const {
  return consumed_power(omega, weights_, cfg_, ch_->M, ch_->Ns);
}

Eigen::MatrixXd PAProblem::feasible(const Eigen::MatrixXd& omega) const {
  const Eigen::MatrixXd masked = mask_.select(omega, 0.0);
  return project_feasible(masked, P_s_, P_t_, active_rows(weights_));
}

Eigen::MatrixXd PAProblem::initial_omega() const {
  return mask_.select(Eigen::MatrixXd::Constant(ch_->S, ch_->M, P_s_ / ch_->M), 0.0);
}

namespace {

double phi_amplitude(const PAProblem& problem, const Eigen::MatrixXd& q, double lambda) {
  return problem.phi(q.cwiseAbs2(), lambda);
}

// Projected gradient ascent on phi in amplitude coordinates with Armijo
// backtracking. Used when a DR pass does not improve on its start point.
Eigen::MatrixXd ascent_fallback(const PAProblem& problem, const Eigen::MatrixXd& q0, double lambda) {
  Eigen::MatrixXd q = q0;
  double f = phi_amplitude(problem, q, lambda);
  const double curvature = 2.0 * (problem.form().lambda_max_estimate(20) + lambda * problem.slopes().maxCoeff());
  double step = curvature > 0.0 ? 1.0 / curvature : 1.0;
  for (int it = 0; it < 2000; ++it) {
    Eigen::MatrixXd grad = problem.form().gradient(q);
    for (Eigen::Index s = 0; s < q.rows(); ++s) grad.row(s) -= 2.0 * lambda * problem.slopes()[s] * q.row(s);
    bool improved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::MatrixXd cand =
          project_amplitude(q + step * grad, problem.P_s(), problem.P_t(), problem.mask());
      const double fc = phi_amplitude(problem, cand, lambda);
      if (fc >= f + 1e-4 * (grad.array() * (cand - q).array()).sum() && fc > f) {
        const double gain = fc - f;
        q = cand;
        f = fc;
        improved = gain > 1e-15 * std::max(1.0, std::abs(f));
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
    step *= 2.0;
  }
  return q;
}

}  // namespace

DRResult dr_solve(const PAProblem& problem, const HarvestProx& prox, double lambda, const Eigen::MatrixXd& start,
                  const PAConfig& cfg) {
  const double gamma = prox.gamma();
  const Eigen::MatrixXd start_feasible = problem.feasible(start);
  const double phi_start = problem.phi(start_feasible, lambda);

  DRResult out;
  Eigen::MatrixXd z = start_feasible.cwiseSqrt();
  Eigen::MatrixXd x = z;
  for (int u = 1; u <= cfg.max_dr; ++u) {
    x = prox_consumption_amplitude(z, lambda, gamma, problem.slopes(), problem.P_s(), problem.P_t(), problem.mask());
    const Eigen::MatrixXd y = prox.apply(2.0 * x - z);
    z += y - x;
    out.residual = (y - x).norm();
    out.iterations = u;
    if (!std::isfinite(out.residual) || !z.allFinite()) {
      std::ostringstream msg;
      msg << "DR produced a non-finite iterate at u=" << u << " (lambda=" << lambda << ", gamma=" << gamma
          << ", |z|=" << z.norm() << ", residual=" << out.residual << ")";
      throw SolverFault(msg.str());
    }
    if (out.residual <= cfg.dr_residual_tol) {
      out.converged = true;
      break;
    }
  }

  Eigen::MatrixXd omega = project_feasible(x.cwiseAbs2(), problem.P_s(), problem.P_t(), active_rows(problem.weights()));
  if (problem.phi(omega, lambda) < phi_start) {
    out.fallback = true;
    const Eigen::MatrixXd q = ascent_fallback(problem, start_feasible.cwiseSqrt(), lambda);
    omega = project_feasible(q.cwiseAbs2(), problem.P_s(), problem.P_t(), active_rows(problem.weights()));
    if (problem.phi(omega, lambda) < phi_start) omega = start_feasible;
  }
  out.omega = std::move(omega);
  return out;
}

DRResult dr_solve(const ChannelSet& ch, const Eigen::VectorXd& a_tilde, double lambda, const PAConfig& pa_cfg,
                  const PowerConfig& power_cfg, const Eigen::MatrixXd& start) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  const PAProblem problem(ch, a_tilde, power_cfg);
  const HarvestProx prox(problem.form(), select_step(problem.form(), pa_cfg.gamma));
  return dr_solve(problem, prox, lambda, start, pa_cfg);
}

PAResult pa_solve(const ChannelSet& ch, const Eigen::VectorXd& a_tilde, const PAConfig& pa_cfg,
                  const PowerConfig& power_cfg, const std::optional<Eigen::MatrixXd>& start) {
  pa_cfg.validate();
  if (a_tilde.size() != ch.S) throw std::invalid_argument("a_tilde must have S entries");
  if ((a_tilde.array() < 0.0).any()) throw std::invalid_argument("activations must be >= 0");
  if (!(a_tilde.array() > 0.0).any()) throw std::invalid_argument("pa_solve needs at least one active sub-array");

  const PAProblem problem(ch, a_tilde, power_cfg);
  PAResult result;
  result.gamma = select_step(problem.form(), pa_cfg.gamma);
  const HarvestProx prox(problem.form(), result.gamma);

  Eigen::MatrixXd omega = problem.feasible(start ? *start : problem.initial_omega());
  double lambda = pa_cfg.lambda0_from_start ? problem.ratio(omega) : pa_cfg.lambda0;
  // Monotonicity of lambda is guaranteed from the first update on, and from
  // the start when lambda0 does not exceed the ratio at the start point.
  bool enforce_monotone = lambda <= problem.ratio(omega);

  for (int t = 0; t < pa_cfg.max_outer; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    const DRResult dr = dr_solve(problem, prox, lambda, omega, pa_cfg);
    omega = dr.omega;

    DinkelbachState st;
    st.t = t;
    st.lambda = lambda;
    st.harvested = problem.harvested(omega);
    st.consumed = problem.consumed(omega);
    st.phi = st.harvested - lambda * st.consumed;
    st.residual = std::abs(st.phi);
    st.dr_residual = dr.residual;
    st.dr_iterations = dr.iterations;
    st.dr_fallback = dr.fallback;
    st.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
    result.trace.push_back(st);

    if (st.residual <= pa_cfg.epsilon) {
      result.converged = true;
      break;
    }
    double next = st.harvested / st.consumed;
    if (enforce_monotone && next < lambda) {
      if (lambda - next > 1e-12 * std::max(lambda, 1e-300)) {
        std::ostringstream msg;
        msg << "Dinkelbach ratio decreased at t=" << t << ": " << lambda << " -> " << next;
        throw SolverFault(msg.str());
      }
      next = lambda;
    }
    enforce_monotone = true;
    lambda = next;
  }
  result.omega = omega;
  result.ratio = problem.ratio(omega);
  return result;
}

}  // namespace xlhpe
