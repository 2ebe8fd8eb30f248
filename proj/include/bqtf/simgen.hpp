#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bqtf/dists.hpp"
#include "bqtf/model.hpp"
#include "bqtf/rng.hpp"

namespace bqtf {

enum class NoiseKind { gauss, beta, mixed_normal, contaminated };
enum class SignalKind { pc, vs, lattice };

inline std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::gauss: return "gauss";
    case NoiseKind::beta: return "beta";
    case NoiseKind::mixed_normal: return "mixed";
    case NoiseKind::contaminated: return "contaminated";
  }
  return "?";
}

inline NoiseKind noise_from_string(const std::string& s) {
  if (s == "gauss" || s == "gaussian") return NoiseKind::gauss;
  if (s == "beta") return NoiseKind::beta;
  if (s == "mixed" || s == "mixed_normal") return NoiseKind::mixed_normal;
  if (s == "contaminated") return NoiseKind::contaminated;
  throw std::invalid_argument("unknown noise kind: " + s);
}

inline std::string to_string(SignalKind k) {
  switch (k) {
    case SignalKind::pc: return "pc";
    case SignalKind::vs: return "vs";
    case SignalKind::lattice: return "lattice";
  }
  return "?";
}

inline SignalKind signal_from_string(const std::string& s) {
  if (s == "pc") return SignalKind::pc;
  if (s == "vs") return SignalKind::vs;
  if (s == "lattice") return SignalKind::lattice;
  throw std::invalid_argument("unknown scenario: " + s);
}

// piecewise constant: 2.5 on the first fifth, 1.0 on the second, 3.5 on the
// third, 1.5 on the rest (blocks 20/20/20/40 at n = 100)
inline Eigen::VectorXd pc_signal(int n = 100) {
  if (n < 1) throw std::invalid_argument("pc_signal: need n >= 1");
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(n);
    if (frac < 0.2)
      f[i] = 2.5;
    else if (frac < 0.4)
      f[i] = 1.0;
    else if (frac < 0.6)
      f[i] = 3.5;
    else
      f[i] = 1.5;
  }
  return f;
}

// varying smoothness: f(x) = 2 + sin(4x - 2) + 2 exp(-30 (4x - 2)^2), x = i/n
inline Eigen::VectorXd vs_signal(int n = 100) {
  if (n < 1) throw std::invalid_argument("vs_signal: need n >= 1");
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i + 1) / static_cast<double>(n);
    const double u = 4.0 * x - 2.0;
    f[i] = 2.0 + std::sin(u) + 2.0 * std::exp(-30.0 * u * u);
  }
  return f;
}

namespace detail {

// standard deviations of the two mixture components in scenario III; the
// printed 0.5 is read as a variance, with an sd-reading flag for sensitivity
inline double mixture_sd(bool sd_interpretation) {
  return sd_interpretation ? 0.5 : std::sqrt(0.5);
}

inline double bisect_quantile(double p, double lo, double hi,
                              const auto& cdf) {
  while (cdf(lo) > p) lo = lo * 2.0 - hi;
  while (cdf(hi) < p) hi = hi * 2.0 - lo;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo < 1e-10) break;
    if (cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// noise draws: (I) N(0, ((1+x^2)/4)^2), (II) Beta(1, 11-10x),
// (III) x N(-0.2, 0.5) + (1-x) N(0.2, 0.5),
// (contaminated) 0.95 N(0,1) + 0.05 N(mu,1)
inline double noise_draw(NoiseKind kind, double x, Rng& rng, double mu = 0.0,
                         bool sd_interpretation = false) {
  switch (kind) {
    case NoiseKind::gauss:
      return (1.0 + x * x) / 4.0 * rng.normal();
    case NoiseKind::beta: {
      const double shape2 = 11.0 - 10.0 * x;
      // Beta(1, b): inverse CDF of F(q) = 1 - (1-q)^b
      return 1.0 - std::pow(1.0 - rng.uniform(), 1.0 / shape2);
    }
    case NoiseKind::mixed_normal: {
      const double s = detail::mixture_sd(sd_interpretation);
      return (rng.uniform() < x) ? -0.2 + s * rng.normal()
                                 : 0.2 + s * rng.normal();
    }
    case NoiseKind::contaminated:
      return (rng.uniform() < 0.05) ? mu + rng.normal() : rng.normal();
  }
  throw std::invalid_argument("noise_draw: unknown kind");
}

// p-th quantile of the pointwise noise distribution
inline double true_quantile(NoiseKind kind, double x, double p, double mu = 0.0,
                            bool sd_interpretation = false) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("true_quantile: p must lie in (0,1)");
  switch (kind) {
    case NoiseKind::gauss:
      return (1.0 + x * x) / 4.0 * normal_quantile(p);
    case NoiseKind::beta:
      return 1.0 - std::pow(1.0 - p, 1.0 / (11.0 - 10.0 * x));
    case NoiseKind::mixed_normal: {
      const double s = detail::mixture_sd(sd_interpretation);
      auto cdf = [&](double q) {
        return x * normal_cdf((q + 0.2) / s) + (1.0 - x) * normal_cdf((q - 0.2) / s);
      };
      return detail::bisect_quantile(p, -5.0, 5.0, cdf);
    }
    case NoiseKind::contaminated: {
      auto cdf = [&](double q) {
        return 0.95 * normal_cdf(q) + 0.05 * normal_cdf(q - mu);
      };
      return detail::bisect_quantile(p, -10.0, std::abs(mu) + 10.0, cdf);
    }
  }
  throw std::invalid_argument("true_quantile: unknown kind");
}

// chain scenario truths and observations at x_i = i/n
inline Eigen::VectorXd chain_truth(SignalKind signal, NoiseKind noise, int n,
                                   double p) {
  Eigen::VectorXd f =
      (signal == SignalKind::pc) ? pc_signal(n) : vs_signal(n);
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i + 1) / static_cast<double>(n);
    f[i] += true_quantile(noise, x, p);
  }
  return f;
}

inline Eigen::VectorXd chain_observations(SignalKind signal, NoiseKind noise,
                                          int n, Rng& rng) {
  Eigen::VectorXd y =
      (signal == SignalKind::pc) ? pc_signal(n) : vs_signal(n);
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i + 1) / static_cast<double>(n);
    y[i] += noise_draw(noise, x, rng);
  }
  return y;
}

// the lattice block signal: height 5 on the centered block (the middle 4x4
// sub-block of a 10x10 grid), 0 elsewhere
inline Eigen::VectorXd lattice_block_signal(int rows, int cols) {
  const int br = std::max(1, (2 * rows) / 5);
  const int bc = std::max(1, (2 * cols) / 5);
  const int r0 = (rows - br) / 2;
  const int c0 = (cols - bc) / 2;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(rows * cols);
  for (int r = r0; r < r0 + br; ++r)
    for (int c = c0; c < c0 + bc; ++c) f[r * cols + c] = 5.0;
  return f;
}

struct LatticeScenario {
  Eigen::VectorXd truth;
  Eigen::VectorXd y;
};

// contaminated-signal scenario on the 2-D lattice
inline LatticeScenario lattice_scenario(int rows, int cols, double mu,
                                        Rng& rng) {
  LatticeScenario out;
  out.truth = lattice_block_signal(rows, cols);
  out.y = out.truth;
  for (int i = 0; i < out.y.size(); ++i)
    out.y[i] += noise_draw(NoiseKind::contaminated, 0.0, rng, mu);
  return out;
}

}  // namespace bqtf
