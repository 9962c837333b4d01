#include "xlhpe/power.hpp"

#include <cmath>
#include <stdexcept>

#include "xlhpe/parallel.hpp"

namespace xlhpe {

namespace {

void check_dimensions(const ChannelSet& ch, const Eigen::MatrixXd& omega, const Eigen::VectorXd& weights) {
  if (omega.rows() != ch.S || omega.cols() != ch.M || weights.size() != ch.S) {
    throw std::invalid_argument("allocation dimensions do not match the channel set");
  }
}

void check_nonnegative(const Eigen::MatrixXd& omega) {
  if ((omega.array() < 0.0).any()) throw std::invalid_argument("power coefficients must be >= 0");
}

}  // namespace

void PowerConfig::validate() const {
  if (!(varsigma > 0.0 && varsigma <= 1.0)) throw std::invalid_argument("varsigma must lie in (0, 1]");
  if (!(P_et >= 0.0) || !(P_syn >= 0.0) || !(P_ct >= 0.0) || !(P_cr >= 0.0)) {
    throw std::invalid_argument("power constants must be >= 0");
  }
}

AllocationState AllocationState::equal_split(int S, int M, double P_s) {
  AllocationState st;
  st.omega = Eigen::MatrixXd::Constant(S, M, P_s / M);
  st.a = Eigen::VectorXd::Ones(S);
  st.a_tilde = Eigen::VectorXd::Ones(S);
  return st;
}

double harvested_power(const ChannelSet& ch, const Eigen::MatrixXd& omega, const Eigen::VectorXd& weights) {
  check_dimensions(ch, omega, weights);
  check_nonnegative(omega);
  double total = 0.0;
  for (int m = 0; m < ch.M; ++m) {
    for (int k = 0; k < ch.M; ++k) {
      std::complex<double> acc{0.0, 0.0};
      for (int s = 0; s < ch.S; ++s) {
        const double w = weights[s];
        if (w == 0.0 || ch.kappa(s, m) == 0.0) continue;
        acc += w * ch.kappa(s, m) * std::sqrt(omega(s, m)) * ch.cross[static_cast<size_t>(s)](k, m);
      }
      total += std::norm(acc);
    }
  }
  return total;
}

double consumed_power(const Eigen::MatrixXd& omega, const Eigen::VectorXd& weights, const PowerConfig& cfg,
                      int M, int Ns) {
  if (omega.rows() != weights.size()) throw std::invalid_argument("omega rows must match weights");
  double total = 0.0;
  for (Eigen::Index s = 0; s < omega.rows(); ++s) {
    const double w = weights[s];
    if (w == 0.0) continue;
    total += w * (omega.row(s).sum() / cfg.varsigma + 2.0 * cfg.P_syn + Ns * cfg.P_ct);
  }
  return total + M * cfg.P_cr;
}

double harvested_power(const ChannelSet& ch, const AllocationState& alloc, Activation which) {
  return harvested_power(ch, alloc.omega, alloc.weights(which));
}

double consumed_power(const AllocationState& alloc, const PowerConfig& cfg, int M, int Ns, Activation which) {
  return consumed_power(alloc.omega, alloc.weights(which), cfg, M, Ns);
}

double hpe(const ChannelSet& ch, const Eigen::MatrixXd& omega, const Eigen::VectorXd& weights,
           const PowerConfig& cfg) {
  const double pc = consumed_power(omega, weights, cfg, ch.M, ch.Ns);
  if (pc == 0.0) throw std::domain_error("consumed power is zero; HPE undefined");
  return harvested_power(ch, omega, weights) / pc;
}

double hpe(const ChannelSet& ch, const AllocationState& alloc, const PowerConfig& cfg, Activation which) {
  return hpe(ch, alloc.omega, alloc.weights(which), cfg);
}

HarvestForm HarvestForm::build(const ChannelSet& ch, const Eigen::VectorXd& weights) {
  if (weights.size() != ch.S) throw std::invalid_argument("weights must have S entries");
  HarvestForm form;
  form.S = ch.S;
  form.M = ch.M;
  form.blocks.reserve(static_cast<size_t>(ch.M));
  for (int m = 0; m < ch.M; ++m) {
    // c(s, k) = w_s kappa_{s,m} g_{s,k}^T conj(g_{s,m})
    Eigen::MatrixXcd c(ch.S, ch.M);
    for (int s = 0; s < ch.S; ++s) {
      const double scale = weights[s] * ch.kappa(s, m);
      for (int k = 0; k < ch.M; ++k) c(s, k) = scale * ch.cross[static_cast<size_t>(s)](k, m);
    }
    Eigen::MatrixXd block = (c * c.adjoint()).real();
    form.blocks.push_back(0.5 * (block + block.transpose()));
  }
  return form;
}

double HarvestForm::value(const Eigen::MatrixXd& q) const {
  double total = 0.0;
  for (int m = 0; m < M; ++m) {
    const auto qm = q.col(m);
    total += qm.dot(blocks[static_cast<size_t>(m)] * qm);
  }
  return total;
}

Eigen::MatrixXd HarvestForm::gradient(const Eigen::MatrixXd& q) const {
  Eigen::MatrixXd grad(S, M);
  for (int m = 0; m < M; ++m) grad.col(m) = 2.0 * blocks[static_cast<size_t>(m)] * q.col(m);
  return grad;
}

double HarvestForm::lambda_max_estimate(int iterations) const {
  double best = 0.0;
  for (const auto& A : blocks) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(S);
    v.normalize();
    double rayleigh = v.dot(A * v);
    for (int it = 0; it < iterations; ++it) {
      Eigen::VectorXd w = A * v;
      const double n = w.norm();
      if (n == 0.0) break;
      v = w / n;
      rayleigh = v.dot(A * v);
    }
    // the diagonal bounds the top eigenvalue from below and guards a start
    // vector orthogonal to the dominant eigenvector
    best = std::max({best, rayleigh, A.diagonal().maxCoeff()});
  }
  return best;
}

bool HarvestForm::is_zero() const {
  for (const auto& A : blocks) {
    if (!A.isZero(0.0)) return false;
  }
  return true;
}

namespace {

void check_map_inputs(const AllocationState& alloc, const ChannelSet& ch, Activation which) {
  check_dimensions(ch, alloc.omega, alloc.weights(which));
  check_nonnegative(alloc.omega);
}

}  // namespace

std::vector<double> power_map(const ArrayGeometry& geom, const AllocationState& alloc, const ChannelSet& ch,
                              const std::vector<Vec3>& probes, Activation which) {
  check_map_inputs(alloc, ch, which);
  if (geom.S != ch.S) throw std::invalid_argument("geometry and channel set disagree on S");
  const Eigen::VectorXd& w = alloc.weights(which);

  // Precoded beam per (s, m), pre-scaled: the probe contribution is a plain
  // transpose product g_s(q)^T beam_{s,m}.
  std::vector<Eigen::VectorXcd> beams(static_cast<size_t>(ch.S * ch.M));
  for (int s = 0; s < ch.S; ++s) {
    for (int m = 0; m < ch.M; ++m) {
      const double scale = w[s] * ch.kappa(s, m) * std::sqrt(alloc.omega(s, m));
      beams[static_cast<size_t>(s * ch.M + m)] = scale * ch.at(s, m).conjugate();
    }
  }
  const ElementCache cache(geom);
  std::vector<double> out(probes.size(), 0.0);
  parallel_for(static_cast<std::ptrdiff_t>(probes.size()), [&](std::ptrdiff_t i) {
    std::vector<std::complex<double>> acc(static_cast<size_t>(ch.M), {0.0, 0.0});
    for (int s = 0; s < ch.S; ++s) {
      if (w[s] == 0.0) continue;
      const Eigen::VectorXcd gp = cache.channel(s, probes[static_cast<size_t>(i)]);
      for (int m = 0; m < ch.M; ++m) {
        acc[static_cast<size_t>(m)] += gp.cwiseProduct(beams[static_cast<size_t>(s * ch.M + m)]).sum();
      }
    }
    double total = 0.0;
    for (const auto& a : acc) total += std::norm(a);
    out[static_cast<size_t>(i)] = total;
  });
  return out;
}

namespace reference {

std::vector<double> power_map(const ArrayGeometry& geom, const AllocationState& alloc, const ChannelSet& ch,
                              const std::vector<Vec3>& probes, Activation which) {
  check_map_inputs(alloc, ch, which);
  const Eigen::VectorXd& w = alloc.weights(which);
  std::vector<double> out;
  out.reserve(probes.size());
  for (const Vec3& q : probes) {
    double total = 0.0;
    for (int m = 0; m < ch.M; ++m) {
      std::complex<double> acc{0.0, 0.0};
      for (int s = 0; s < ch.S; ++s) {
        if (w[s] == 0.0 || ch.kappa(s, m) == 0.0) continue;
        const Eigen::VectorXcd gq = channel(geom, s, q);
        acc += w[s] * ch.kappa(s, m) * std::sqrt(alloc.omega(s, m)) * ch.at(s, m).dot(gq);
      }
      total += std::norm(acc);
    }
    out.push_back(total);
  }
  return out;
}

}  // namespace reference

}  // namespace xlhpe
