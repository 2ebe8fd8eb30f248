#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bqtf {

// empirical quantile with linear (type-7) interpolation
inline double quantile_type7(std::vector<double> x, double q) {
  if (x.empty()) throw std::invalid_argument("quantile_type7: empty sample");
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("quantile_type7: q must lie in [0,1]");
  std::sort(x.begin(), x.end());
  const double h = (static_cast<double>(x.size()) - 1.0) * q;
  const std::size_t j = static_cast<std::size_t>(std::floor(h));
  if (j + 1 >= x.size()) return x.back();
  const double g = h - static_cast<double>(j);
  return x[j] + g * (x[j + 1] - x[j]);
}

struct FitSummary {
  Eigen::VectorXd point;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::string method;
};

// columnwise posterior means and 2.5%/97.5% empirical quantiles
inline FitSummary summarize_draws(const Eigen::MatrixXd& draws,
                                  const std::string& method = "mcmc") {
  if (draws.rows() < 2)
    throw std::invalid_argument("summarize_draws: need at least two draws");
  const Eigen::Index n = draws.cols();
  FitSummary s;
  s.method = method;
  s.point.resize(n);
  s.lower.resize(n);
  s.upper.resize(n);
  std::vector<double> col(static_cast<std::size_t>(draws.rows()));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index r = 0; r < draws.rows(); ++r)
      col[static_cast<std::size_t>(r)] = draws(r, i);
    s.point[i] = draws.col(i).mean();
    s.lower[i] = quantile_type7(col, 0.025);
    s.upper[i] = quantile_type7(col, 0.975);
    assert(s.lower[i] <= s.upper[i]);
  }
  return s;
}

struct Metrics {
  double mse;
  double mad;
  double mciw;
  double cp;
};

// the four benchmark criteria against a known truth vector
inline Metrics metrics(const FitSummary& s, const Eigen::VectorXd& truth) {
  const Eigen::Index n = truth.size();
  if (s.point.size() != n || s.lower.size() != n || s.upper.size() != n)
    throw std::invalid_argument("metrics: dimension mismatch");
  Metrics m{0.0, 0.0, 0.0, 0.0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = s.point[i] - truth[i];
    m.mse += e * e;
    m.mad += std::abs(e);
    m.mciw += s.upper[i] - s.lower[i];
    if (s.lower[i] <= truth[i] && truth[i] <= s.upper[i]) m.cp += 1.0;
  }
  const double dn = static_cast<double>(n);
  m.mse /= dn;
  m.mad /= dn;
  m.mciw /= dn;
  m.cp /= dn;
  return m;
}

// biased ACF estimates for lags 0..max_lag; constant traces give zeros past
// lag 0 by convention
inline std::vector<double> autocorrelation(std::span<const double> x,
                                           int max_lag) {
  const long n = static_cast<long>(x.size());
  if (n <= max_lag)
    throw std::invalid_argument("autocorrelation: trace shorter than max_lag");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double denom = 0.0;
  for (double v : x) denom += (v - mean) * (v - mean);
  std::vector<double> acf(static_cast<std::size_t>(max_lag) + 1, 0.0);
  acf[0] = 1.0;
  if (denom <= 0.0) return acf;
  for (int lag = 1; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (long t = 0; t + lag < n; ++t)
      s += (x[static_cast<std::size_t>(t)] - mean) *
           (x[static_cast<std::size_t>(t + lag)] - mean);
    acf[static_cast<std::size_t>(lag)] = s / denom;
  }
  return acf;
}

}  // namespace bqtf
