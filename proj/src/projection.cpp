#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "xlhpe/pa_optimizer.hpp"

namespace xlhpe {

namespace {

// Projection of a row onto {x >= 0, sum x <= cap}.
Eigen::RowVectorXd project_row_capped_simplex(Eigen::RowVectorXd row, double cap) {
  row = row.cwiseMax(0.0);
  if (row.sum() <= cap) return row;
  std::vector<double> sorted(static_cast<size_t>(row.size()));
  for (Eigen::Index i = 0; i < row.size(); ++i) sorted[static_cast<size_t>(i)] = row[i];
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - cap) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) tau = candidate;
  }
  return (row.array() - tau).cwiseMax(0.0).matrix();
}

}  // namespace

RowMask active_rows(const Eigen::VectorXd& activation) { return activation.array() != 0.0; }

Eigen::MatrixXd project_feasible(const Eigen::MatrixXd& omega_raw, double P_s, double P_t, const RowMask& active) {
  if (active.size() != omega_raw.rows()) throw std::invalid_argument("activation mask must have one entry per row");
  Eigen::MatrixXd out = omega_raw;
  double total = 0.0;
  for (Eigen::Index s = 0; s < out.rows(); ++s) {
    if (!active[s]) {
      out.row(s).setZero();
      continue;
    }
    out.row(s) = project_row_capped_simplex(out.row(s), P_s);
    total += out.row(s).sum();
  }
  if (total > P_t && total > 0.0) out *= P_t / total;
  return out;
}

Eigen::MatrixXd project_amplitude(const Eigen::MatrixXd& q_raw, double P_s, double P_t, const EntryMask& mask) {
  if (mask.rows() != q_raw.rows() || mask.cols() != q_raw.cols()) {
    throw std::invalid_argument("entry mask shape must match q");
  }
  Eigen::MatrixXd q = mask.select(q_raw.cwiseMax(0.0), 0.0);
  const double radius = std::sqrt(P_s);
  double total = 0.0;
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    const double n = q.row(s).norm();
    if (n > radius) q.row(s) *= radius / n;
    total += q.row(s).squaredNorm();
  }
  if (total > P_t && total > 0.0) q *= std::sqrt(P_t / total);
  return q;
}

Eigen::MatrixXd prox_consumption(const Eigen::MatrixXd& z, double lambda, double gamma, const PowerConfig& cfg,
                                 const Eigen::VectorXd& a_tilde, double P_s, double P_t) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (a_tilde.size() != z.rows()) throw std::invalid_argument("a_tilde must have one entry per row");
  Eigen::MatrixXd shifted = z;
  for (Eigen::Index s = 0; s < z.rows(); ++s) {
    shifted.row(s).array() -= gamma * lambda * a_tilde[s] / cfg.varsigma;
  }
  return project_feasible(shifted, P_s, P_t, active_rows(a_tilde));
}

Eigen::MatrixXd prox_consumption_amplitude(const Eigen::MatrixXd& z, double lambda, double gamma,
                                           const Eigen::VectorXd& slopes, double P_s, double P_t,
                                           const EntryMask& mask) {
  Eigen::MatrixXd scaled = z;
  for (Eigen::Index s = 0; s < z.rows(); ++s) scaled.row(s) /= 1.0 + 2.0 * gamma * lambda * slopes[s];
  return project_amplitude(scaled, P_s, P_t, mask);
}

HarvestProx::HarvestProx(const HarvestForm& form, double gamma) : gamma_(gamma) {
  if (!(gamma > 0.0)) throw SolverFault("harvest prox needs gamma > 0");
  factors_.reserve(form.blocks.size());
  for (const auto& A : form.blocks) {
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(A.rows(), A.cols()) - 2.0 * gamma * A;
    Eigen::LLT<Eigen::MatrixXd> llt(system);
    if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all()) {
      throw SolverFault("Id - 2 gamma A is not positive definite");
    }
    factors_.push_back(std::move(llt));
  }
}

Eigen::MatrixXd HarvestProx::apply(const Eigen::MatrixXd& u) const {
  Eigen::MatrixXd q(u.rows(), u.cols());
  for (Eigen::Index m = 0; m < u.cols(); ++m) q.col(m) = factors_[static_cast<size_t>(m)].solve(u.col(m));
  return q;
}

Eigen::MatrixXd prox_neg_harvest(const Eigen::MatrixXd& v, double gamma, const ChannelSet& ch,
                                 const Eigen::VectorXd& a_tilde) {
  const HarvestProx prox(HarvestForm::build(ch, a_tilde), gamma);
  return prox.apply(v.cwiseMax(0.0).cwiseSqrt()).cwiseAbs2();
}

double select_step(const HarvestForm& form, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("step scale must be positive");
  const double lmax = form.lambda_max_estimate(20);
  if (!std::isfinite(lmax)) throw SolverFault("lambda_max estimate is not finite");
  double gamma = lmax > 0.0 ? scale / lmax : scale;
  for (int attempt = 0; attempt < 60; ++attempt) {
    try {
      HarvestProx probe(form, gamma);
      return gamma;
    } catch (const SolverFault&) {
      gamma *= 0.5;
    }
  }
  throw SolverFault("no step size satisfies 2 gamma lambda_max(A) < 1");
}

}  // namespace xlhpe
