#pragma once

#include <vector>

#include <Eigen/Dense>

#include "xlhpe/geometry.hpp"

namespace xlhpe {

/// Power-consumption constants. All powers in watts.
struct PowerConfig {
  double varsigma = 0.35;  // amplifier efficiency
  double P_et = 0.05;      // per-element transmit power cap
  double P_syn = 0.05;     // per-sub-array synthesizer
  double P_ct = 0.0482;    // per-RF-chain circuit power
  double P_cr = 0.0625;    // per-user receiver circuit power

  void validate() const;
  double subarray_budget(int Ns) const { return Ns * P_et; }
  double total_budget(int S, int Ns) const { return S * subarray_budget(Ns); }
};

/// Which activation vector weights the sub-arrays in an evaluation.
enum class Activation { Binary, Parameterized };

struct AllocationState {
  Eigen::MatrixXd omega;    // S x M power coefficients [W]
  Eigen::VectorXd a;        // binary activation
  Eigen::VectorXd a_tilde;  // parameterized activation in [0, 1]

  const Eigen::VectorXd& weights(Activation which) const {
    return which == Activation::Binary ? a : a_tilde;
  }
  /// omega = P_s / M everywhere, all sub-arrays on, a_tilde = a.
  static AllocationState equal_split(int S, int M, double P_s);
};

// Weight-vector forms shared by the optimizer. `weights` holds a or a_tilde.
double harvested_power(const ChannelSet& ch, const Eigen::MatrixXd& omega, const Eigen::VectorXd& weights);
double consumed_power(const Eigen::MatrixXd& omega, const Eigen::VectorXd& weights, const PowerConfig& cfg,
                      int M, int Ns);

/// Total RF power received by all users under MRT precoding.
double harvested_power(const ChannelSet& ch, const AllocationState& alloc, Activation which);
double consumed_power(const AllocationState& alloc, const PowerConfig& cfg, int M, int Ns, Activation which);
/// Harvested-power efficiency. Throws std::domain_error if the consumed power is zero.
double hpe(const ChannelSet& ch, const AllocationState& alloc, const PowerConfig& cfg, Activation which);
double hpe(const ChannelSet& ch, const Eigen::MatrixXd& omega, const Eigen::VectorXd& weights,
           const PowerConfig& cfg);

/// Harvested power as a quadratic form in the amplitudes q = sqrt(omega).
///
/// The form is block diagonal over users: I = sum_m q_m^T A_m q_m with q_m the
/// m-th column of q and A_m (S x S, PSD) built from the cached Gram products.
struct HarvestForm {
  int S = 0;
  int M = 0;
  std::vector<Eigen::MatrixXd> blocks;

  static HarvestForm build(const ChannelSet& ch, const Eigen::VectorXd& weights);

  double value(const Eigen::MatrixXd& q) const;
  /// Gradient with respect to q: column m is 2 A_m q_m.
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& q) const;
  /// Largest eigenvalue estimated by power iteration on every block.
  double lambda_max_estimate(int iterations = 20) const;
  bool is_zero() const;
};

/// Harvested power at each probe position for a fixed design: the probe acts
/// as a virtual receiver of the MRT beams built for the real users.
/// OpenMP kernel over probes.
std::vector<double> power_map(const ArrayGeometry& geom, const AllocationState& alloc, const ChannelSet& ch,
                              const std::vector<Vec3>& probes, Activation which = Activation::Binary);

namespace reference {
std::vector<double> power_map(const ArrayGeometry& geom, const AllocationState& alloc, const ChannelSet& ch,
                              const std::vector<Vec3>& probes, Activation which = Activation::Binary);
}  // namespace reference

}  // namespace xlhpe
