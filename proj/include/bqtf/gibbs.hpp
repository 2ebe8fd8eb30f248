#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bqtf/dists.hpp"
#include "bqtf/model.hpp"
#include "bqtf/posterior.hpp"
#include "bqtf/precision.hpp"
#include "bqtf/rng.hpp"

namespace bqtf {

struct ChainState {
  Eigen::VectorXd theta;
  std::vector<std::vector<double>> z;  // shaped like the dataset
  double sigma2 = 1.0;
  double tau2 = 1.0;
  double xi = 1.0;
  PriorState prior;
};

// theta starts at per-node empirical p-quantiles (pooled median for nodes
// without observations); all latent scales start at 1.
inline ChainState init_chain_state(const Model& m) {
  ChainState s;
  s.theta.resize(m.n());
  std::vector<double> pooled;
  for (const auto& obs : m.data.observations)
    pooled.insert(pooled.end(), obs.begin(), obs.end());
  const double fallback = quantile_type7(pooled, 0.5);
  for (Eigen::Index i = 0; i < m.n(); ++i) {
    const auto& obs = m.data.observations[static_cast<std::size_t>(i)];
    s.theta[i] = obs.empty() ? fallback : quantile_type7(obs, m.spec.p);
  }
  s.z.resize(m.data.observations.size());
  for (std::size_t i = 0; i < s.z.size(); ++i)
    s.z[i].assign(m.data.observations[i].size(), 1.0);
  s.prior = init_prior_state(m);
  return s;
}

class GibbsSampler {
 public:
  explicit GibbsSampler(const Model& m) : model_(&m) {
    assembler_.init(m.op.matrix);
    analyzed_ = false;
  }

  // theta | rest ~ N_n(A^{-1} B, sigma^2 A^{-1}) with
  // A = (1/tau^2) D' W^{-1} D + (1/t^2) diag(sum_j 1/z_ij) and
  // B_i = sum_j (y_ij - psi z_ij) / (t^2 z_ij)
  void update_theta(ChainState& s, Rng& rng) {
    const Model& m = *model_;
    const Eigen::Index n = m.n();
    Eigen::VectorXd diag(n), bvec(n);
    fill_likelihood_terms(s, diag, bvec);
    const auto& A = assembler_.assemble(penalty_coefficients(s), diag);
    if (!analyzed_) {
      solver_.analyzePattern(A);
      analyzed_ = true;
    }
    solver_.factorize(A);
    if (solver_.info() != Eigen::Success) {
      throw std::runtime_error(
          "update_theta: precision matrix not SPD (min diagonal = " +
          std::to_string(A.diagonal().minCoeff()) + ")");
    }
    const Eigen::VectorXd mean = solver_.solve(bvec);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
    s.theta = mean + std::sqrt(s.sigma2) *
                         (solver_.permutationPinv() * solver_.matrixU().solve(v));
  }

  // mean of the theta full conditional (used by tests)
  Eigen::VectorXd theta_conditional_mean(const ChainState& s) {
    const Model& m = *model_;
    Eigen::VectorXd diag(m.n()), bvec(m.n());
    fill_likelihood_terms(s, diag, bvec);
    const auto& A = assembler_.assemble(penalty_coefficients(s), diag);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("theta_conditional_mean: factorization failed");
    return llt.solve(bvec);
  }

  // z_ij | rest ~ GIG(1/2, (y_ij - theta_i)^2 / (t^2 sigma^2),
  //                   psi^2 / (t^2 sigma^2) + 2 / sigma^2)
  void update_z(ChainState& s, Rng& rng) {
    const Model& m = *model_;
    const double t2 = m.spec.t2(), psi = m.spec.psi();
    const double b = psi * psi / (t2 * s.sigma2) + 2.0 / s.sigma2;
    for (std::size_t i = 0; i < s.z.size(); ++i) {
      const auto& obs = m.data.observations[i];
      for (std::size_t j = 0; j < obs.size(); ++j) {
        const double r = obs[j] - s.theta[static_cast<Eigen::Index>(i)];
        const double a = std::max(r * r / (t2 * s.sigma2), kGigFloor);
        s.z[i][j] = sample_gig({0.5, a, b}, rng);
      }
    }
  }

  // sigma^2 | rest ~ IG((n + 3N)/2 + a_sigma, beta) with beta the
  // check-residual quadratic + penalty quadratic / (2 tau^2) + sum z + b_sigma
  void update_sigma2(ChainState& s, Rng& rng) {
    const Model& m = *model_;
    const double t2 = m.spec.t2(), psi = m.spec.psi();
    double beta = 0.0, zsum = 0.0;
    for (std::size_t i = 0; i < s.z.size(); ++i) {
      const auto& obs = m.data.observations[i];
      for (std::size_t j = 0; j < obs.size(); ++j) {
        const double r =
            obs[j] - s.theta[static_cast<Eigen::Index>(i)] - psi * s.z[i][j];
        beta += r * r / (2.0 * t2 * s.z[i][j]);
        zsum += s.z[i][j];
      }
    }
    beta += penalty_quadratic(s) / (2.0 * s.tau2) + zsum + m.spec.b_sigma;
    if (!std::isfinite(beta))
      throw std::runtime_error("update_sigma2: non-finite rate");
    const double shape =
        0.5 * (static_cast<double>(m.n()) + 3.0 * static_cast<double>(m.data.total())) +
        m.spec.a_sigma;
    s.sigma2 = rng.inverse_gamma(shape, beta);
  }

  // tau^2 | rest ~ IG((n+1)/2, theta' D' W^{-1} D theta / (2 sigma^2) + 1/xi)
  // and xi | tau^2 ~ IG(1, 1/tau^2 + 1), the exact auxiliary conditional of
  // the half-Cauchy decomposition; the Laplace prior holds tau^2 = 1
  void update_tau2_xi(ChainState& s, Rng& rng) {
    const Model& m = *model_;
    if (m.spec.prior == PriorFamily::laplace) {
      s.tau2 = 1.0;
      return;
    }
    const double quad = penalty_quadratic(s);
    s.tau2 = rng.inverse_gamma(0.5 * (static_cast<double>(m.n()) + 1.0),
                               quad / (2.0 * s.sigma2) + 1.0 / s.xi);
    s.xi = rng.inverse_gamma(1.0, 1.0 / s.tau2 + 1.0);
  }

  // prior-specific local scales; pinned (augmented) rows stay untouched
  void update_local_scales(ChainState& s, Rng& rng) {
    const Model& m = *model_;
    if (m.spec.prior == PriorFamily::normal) return;
    const Eigen::VectorXd eta = m.op.matrix * s.theta;
    if (m.spec.prior == PriorFamily::laplace) {
      // w_i^2 ~ GIG_[lo,hi](1/2, eta_i^2 / sigma^2, gamma^2)
      double sw = 0.0;
      for (Eigen::Index r = 0; r < m.m_rows(); ++r) {
        if (m.row_fixed[static_cast<std::size_t>(r)]) continue;
        const double a = std::max(eta[r] * eta[r] / s.sigma2, kGigFloor);
        s.prior.w2[r] =
            sample_truncated_gig({0.5, a, s.prior.gamma2}, m.spec.bounds, rng);
        sw += s.prior.w2[r];
      }
      if (m.n_free_rows() > 0) {
        // gamma^2 ~ GIG(m - 1/2, 2/nu, sum w^2), nu ~ IG(1, 1/gamma^2 + 1)
        const double mfree = static_cast<double>(m.n_free_rows());
        s.prior.gamma2 =
            sample_gig({mfree - 0.5, 2.0 / s.prior.nu, sw}, rng);
        s.prior.nu = rng.inverse_gamma(1.0, 1.0 / s.prior.gamma2 + 1.0);
      }
      return;
    }
    // horseshoe: w_i^2 ~ IG_[lo,hi](1, 1/nu_i + eta_i^2 / (2 sigma^2 tau^2)),
    // nu_i ~ IG(1, 1/w_i^2 + 1)
    for (Eigen::Index r = 0; r < m.m_rows(); ++r) {
      if (m.row_fixed[static_cast<std::size_t>(r)]) continue;
      const double rate =
          1.0 / s.prior.nu_local[r] + eta[r] * eta[r] / (2.0 * s.sigma2 * s.tau2);
      s.prior.w2[r] = sample_truncated_inverse_gamma(1.0, rate, m.spec.bounds, rng);
      s.prior.nu_local[r] = rng.inverse_gamma(1.0, 1.0 / s.prior.w2[r] + 1.0);
    }
  }

  void sweep(ChainState& s, Rng& rng) {
    update_theta(s, rng);
    update_z(s, rng);
    update_sigma2(s, rng);
    update_tau2_xi(s, rng);
    update_local_scales(s, rng);
#ifndef NDEBUG
    assert(s.sigma2 > 0.0 && s.tau2 > 0.0 && s.xi > 0.0);
    for (const auto& zi : s.z)
      for (double z : zi) assert(z > 0.0);
    for (Eigen::Index r = 0; r < s.prior.w2.size(); ++r)
      assert(s.prior.w2[r] > 0.0);
#endif
  }

  // theta' D' W^{-1} D theta = sum_l eta_l^2 / w_l^2
  double penalty_quadratic(const ChainState& s) const {
    const Eigen::VectorXd eta = model_->op.matrix * s.theta;
    return (eta.array().square() / s.prior.w2.array()).sum();
  }

 private:
  // Effective per-row prior variance tau^2 w_l^2, floored at the truncation
  // lower bound: below that the difference is already zero to double
  // precision and unfloored coefficients defeat the Cholesky (the likelihood
  // diagonal vanishes in cancellation).
  Eigen::VectorXd penalty_coefficients(const ChainState& s) const {
    return (s.tau2 * s.prior.w2.array())
        .max(model_->spec.bounds.lower)
        .inverse();
  }

  void fill_likelihood_terms(const ChainState& s, Eigen::VectorXd& diag,
                             Eigen::VectorXd& bvec) const {
    const Model& m = *model_;
    const double t2 = m.spec.t2(), psi = m.spec.psi();
    for (Eigen::Index i = 0; i < m.n(); ++i) {
      const auto& obs = m.data.observations[static_cast<std::size_t>(i)];
      const auto& zi = s.z[static_cast<std::size_t>(i)];
      double sz = 0.0, sb = 0.0;
      for (std::size_t j = 0; j < obs.size(); ++j) {
        sz += 1.0 / zi[j];
        sb += (obs[j] - psi * zi[j]) / zi[j];
      }
      diag[i] = sz / t2;
      bvec[i] = sb / t2;
    }
  }

  static constexpr double kGigFloor = 1e-12;

  const Model* model_;
  detail::PrecisionAssembler assembler_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> solver_;
  bool analyzed_ = false;
};

struct SamplingProtocol {
  long iterations = 5000;
  long burn_in = 0;
  long thin = 10;
  std::uint64_t seed = 1;
};

struct PosteriorSamples {
  Eigen::MatrixXd theta;  // retained draws by node
  Eigen::VectorXd sigma2;
  Eigen::VectorXd tau2;
  SamplingProtocol protocol;

  long retained() const { return theta.rows(); }
};

// Sweep order is theta, z, sigma^2, (tau^2, xi), local scales; retained
// count is (iterations - burn_in) / thin exactly.
inline PosteriorSamples run_gibbs(const Model& model,
                                  const SamplingProtocol& prot) {
  if (prot.thin < 1 || prot.burn_in < 0 || prot.iterations <= prot.burn_in)
    throw std::invalid_argument("run_gibbs: bad sampling protocol");
  const long retained = (prot.iterations - prot.burn_in) / prot.thin;
  if (retained < 1) throw std::invalid_argument("run_gibbs: nothing retained");

  GibbsSampler sampler(model);
  ChainState state = init_chain_state(model);
  Rng rng(prot.seed);

  PosteriorSamples out;
  out.protocol = prot;
  out.theta.resize(retained, model.n());
  out.sigma2.resize(retained);
  out.tau2.resize(retained);
  long kept = 0;
  const long total = prot.burn_in + retained * prot.thin;
  for (long t = 1; t <= total; ++t) {
    sampler.sweep(state, rng);
    if (t > prot.burn_in && (t - prot.burn_in) % prot.thin == 0) {
      out.theta.row(kept) = state.theta.transpose();
      out.sigma2[kept] = state.sigma2;
      out.tau2[kept] = state.tau2;
      ++kept;
    }
  }
  return out;
}

inline FitSummary summarize(const PosteriorSamples& s) {
  return summarize_draws(s.theta, "mcmc");
}

}  // namespace bqtf
