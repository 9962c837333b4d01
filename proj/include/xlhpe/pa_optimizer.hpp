#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "xlhpe/geometry.hpp"
#include "xlhpe/power.hpp"

namespace xlhpe {

/// Raised when the power-allocation solver cannot produce a finite iterate.
class SolverFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using RowMask = Eigen::Array<bool, Eigen::Dynamic, 1>;
using EntryMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

RowMask active_rows(const Eigen::VectorXd& activation);

struct PAConfig {
  double epsilon = 1e-7;          // Dinkelbach stop tolerance [W]
  int max_outer = 200;
  int max_dr = 100000;
  double dr_residual_tol = 1e-6;  // on ||y - x|| in amplitude units
  double gamma = 0.2;             // step scale; the prox step is gamma / lambda_max(A)
  double lambda0 = 0.0;
  bool lambda0_from_start = false;  // start from the ratio at the initial point instead of lambda0

  void validate() const;
};

/// One Dinkelbach iteration.
struct DinkelbachState {
  int t = 0;
  double lambda = 0.0;     // ratio used for this iteration's subproblem
  double phi = 0.0;        // I - lambda P_c at the new omega [W]
  double harvested = 0.0;  // [W]
  double consumed = 0.0;   // [W]
  double residual = 0.0;   // |I - lambda P_c| [W]
  double dr_residual = 0.0;
  int dr_iterations = 0;
  bool dr_fallback = false;
  std::int64_t wall_ns = 0;
};

// ---------------------------------------------------------------------------
// Feasible set and proximal operators

/// Euclidean projection onto {omega >= 0, row sums <= P_s on active rows,
/// inactive rows zero}, followed by a uniform rescale if the active total
/// exceeds P_t. The rescale is a no-op whenever P_t >= (#active) P_s.
Eigen::MatrixXd project_feasible(const Eigen::MatrixXd& omega_raw, double P_s, double P_t, const RowMask& active);

/// The same feasible set in amplitude coordinates q = sqrt(omega): nonnegative
/// orthant intersected with a ball of radius sqrt(P_s) per row. Entries outside
/// `mask` are zeroed.
Eigen::MatrixXd project_amplitude(const Eigen::MatrixXd& q_raw, double P_s, double P_t, const EntryMask& mask);

/// prox of gamma*lambda*P_c(., a_tilde) plus the feasible-set indicator, in
/// omega coordinates. P_c is affine with slope a_tilde_s / varsigma per entry.
Eigen::MatrixXd prox_consumption(const Eigen::MatrixXd& z, double lambda, double gamma, const PowerConfig& cfg,
                                 const Eigen::VectorXd& a_tilde, double P_s, double P_t);

/// prox of gamma*lambda*P_c plus the indicator in amplitude coordinates, where
/// the transmit term is sum_s c_s ||q_s||^2 with c_s = a_tilde_s / varsigma.
Eigen::MatrixXd prox_consumption_amplitude(const Eigen::MatrixXd& z, double lambda, double gamma,
                                           const Eigen::VectorXd& slopes, double P_s, double P_t,
                                           const EntryMask& mask);

/// prox of -gamma * q^T A q: solves (Id - 2 gamma A) q = u block by block.
class HarvestProx {
 public:
  /// Throws SolverFault when Id - 2 gamma A is not positive definite.
  HarvestProx(const HarvestForm& form, double gamma);

  Eigen::MatrixXd apply(const Eigen::MatrixXd& u) const;
  double gamma() const { return gamma_; }

 private:
  double gamma_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> factors_;
};

/// prox of -gamma I(., a_tilde) taken in the substituted variable q = sqrt(omega):
/// q = (Id - 2 gamma A)^{-1} sqrt(v), returned as q^2. Negative entries of v are
/// treated as zero.
Eigen::MatrixXd prox_neg_harvest(const Eigen::MatrixXd& v, double gamma, const ChannelSet& ch,
                                 const Eigen::VectorXd& a_tilde);

/// gamma = scale / lambda_max(A) with lambda_max from a 20-step power
/// iteration; halved until Id - 2 gamma A factors.
double select_step(const HarvestForm& form, double scale);

// ---------------------------------------------------------------------------
// Fractional program

/// I(omega, a_tilde) - lambda P_c(omega, a_tilde) via the power module.
double dinkelbach_phi(const ChannelSet& ch, const Eigen::MatrixXd& omega, const Eigen::VectorXd& a_tilde,
                      double lambda, const PowerConfig& cfg);

/// Fixed data of one power-allocation subproblem: channels, activation weights,
/// the quadratic form and the feasible set.
class PAProblem {
 public:
  PAProblem(const ChannelSet& ch, const Eigen::VectorXd& weights, const PowerConfig& cfg);

  const ChannelSet& channels() const { return *ch_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const PowerConfig& power_config() const { return cfg_; }
  const HarvestForm& form() const { return form_; }
  const Eigen::VectorXd& slopes() const { return slopes_; }
  const EntryMask& mask() const { return mask_; }
  double P_s() const { return P_s_; }
  double P_t() const { return P_t_; }

  double harvested(const Eigen::MatrixXd& omega) const;
  double consumed(const Eigen::MatrixXd& omega) const;
  double phi(const Eigen::MatrixXd& omega, double lambda) const { return harvested(omega) - lambda * consumed(omega); }
  double ratio(const Eigen::MatrixXd& omega) const { return harvested(omega) / consumed(omega); }

  /// Feasible omega closest to `omega`, with masked entries zeroed.
  Eigen::MatrixXd feasible(const Eigen::MatrixXd& omega) const;
  /// P_s / M on every unmasked entry.
  Eigen::MatrixXd initial_omega() const;

 private:
  const ChannelSet* ch_;
  Eigen::VectorXd weights_;
  PowerConfig cfg_;
  HarvestForm form_;
  Eigen::VectorXd slopes_;
  EntryMask mask_;
  double P_s_;
  double P_t_;
};

struct DRResult {
  Eigen::MatrixXd omega;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool fallback = false;  // DR output rejected, ascent step used instead
};

/// Douglas-Rachford splitting on -phi(., lambda) from `start`:
///   x <- prox_consumption(z), y <- prox_neg_harvest(2x - z), z <- z + y - x,
/// iterated in amplitude coordinates. The returned omega is feasible and never
/// has lower phi than the projected start.
DRResult dr_solve(const PAProblem& problem, const HarvestProx& prox, double lambda, const Eigen::MatrixXd& start,
                  const PAConfig& cfg);
DRResult dr_solve(const ChannelSet& ch, const Eigen::VectorXd& a_tilde, double lambda, const PAConfig& pa_cfg,
                  const PowerConfig& power_cfg, const Eigen::MatrixXd& start);

struct PAResult {
  Eigen::MatrixXd omega;
  std::vector<DinkelbachState> trace;
  bool converged = false;
  double ratio = 0.0;  // I / P_c under the weights the problem was solved with
  double gamma = 0.0;
};

/// Dinkelbach iterations with a DR inner solve. `start` defaults to P_s / M.
/// Throws std::invalid_argument if every weight is zero.
PAResult pa_solve(const ChannelSet& ch, const Eigen::VectorXd& a_tilde, const PAConfig& pa_cfg,
                  const PowerConfig& power_cfg, const std::optional<Eigen::MatrixXd>& start = std::nullopt);

}  // namespace xlhpe
