#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xlhpe/pa_optimizer.hpp"
#include "xlhpe/power.hpp"

namespace xlhpe {

struct SAConfig {
  double delta = 1e-3;  // relative HPE change that ends the outer loop
  int max_sa_iters = 50;
  bool cold_start = false;  // restart each PA solve from P_s / M instead of the previous iterate

  void validate() const;
};

/// Per-sub-array share of the total transmitted power. Throws
/// std::invalid_argument if omega is all zero.
Eigen::VectorXd surrogate(const Eigen::MatrixXd& omega_tilde);

/// a_s = 1 iff g_s >= mean(g) (= 1/S). Ties within 1e-12 relative count as
/// equal. Never returns the all-off vector: the argmax stays on.
Eigen::VectorXd activation_update(const Eigen::VectorXd& g);

/// a_tilde = g .* a
Eigen::VectorXd parameterize(const Eigen::VectorXd& a, const Eigen::VectorXd& g);

/// One outer iteration of the joint loop.
struct SAIteration {
  int i = 0;
  Eigen::VectorXd g;
  Eigen::VectorXd a;
  Eigen::VectorXd a_tilde;
  double hpe = 0.0;             // binary activation, PA re-solved on the active set
  double parameterized_ratio = 0.0;
  int pa_outer_parameterized = 0;
  int pa_outer_binary = 0;
  bool accepted = false;
};

struct SolveReport {
  std::string method;
  std::vector<double> hpe_trace;        // entry 0 is the equal-split full-array start
  std::vector<int> active_trace;        // active sub-array count per trace entry
  std::vector<SAIteration> iterations;  // every outer iteration, accepted or not
  std::vector<DinkelbachState> pa_trace;  // Dinkelbach trace of the final PA solve
  int pa_solves = 0;
  bool converged = false;
  double seconds = 0.0;
  double hpe = 0.0;
};

struct JointResult {
  AllocationState allocation;
  SolveReport report;
};

/// Alternating sub-array activation and power allocation. The reported
/// allocation uses binary activations with omega optimized for them.
JointResult joint_solve(const ChannelSet& ch, const PAConfig& pa_cfg, const SAConfig& sa_cfg,
                        const PowerConfig& power_cfg);

}  // namespace xlhpe
