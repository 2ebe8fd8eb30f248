// Test-side oracles, independent of the library's own evaluation paths:
// direct quadrature of densities, Bessel integral representations, dense
// matrix routes, and Kolmogorov-Smirnov machinery.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bqtf/graph.hpp"

namespace oracle {

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 14, tol);
}

// K_nu(x) straight from the integral representation
inline double bessel_k_integral(double nu, double x) {
  auto f = [&](double t) {
    return std::exp(-x * std::cosh(t)) * std::cosh(nu * t);
  };
  double hi = 1.0;
  while (x * std::cosh(hi) - std::abs(nu) * hi < 750.0 && hi < 100.0) hi += 1.0;
  return integrate(f, 0.0, hi);
}

// raw GIG kernel x^{nu-1} exp(-(a/x + b x)/2)
inline double gig_kernel(double nu, double a, double b, double x) {
  return std::pow(x, nu - 1.0) * std::exp(-0.5 * (a / x + b * x));
}

// moments of GIG restricted to [lo, hi] by direct quadrature on the log axis
struct TruncMoments {
  double mass;
  double mean;
  double inv_mean;
};

inline TruncMoments gig_truncated_by_quadrature(double nu, double a, double b,
                                                double lo, double hi) {
  auto kernel_t = [&](double t, double power) {
    return std::exp((nu + power) * t - 0.5 * (a * std::exp(-t) + b * std::exp(t)));
  };
  const double tl = std::log(lo), th = std::log(hi);
  const double z = integrate([&](double t) { return kernel_t(t, 0.0); }, tl, th);
  const double m1 = integrate([&](double t) { return kernel_t(t, 1.0); }, tl, th);
  const double mm1 = integrate([&](double t) { return kernel_t(t, -1.0); }, tl, th);
  return {z, m1 / z, mm1 / z};
}

inline TruncMoments ig_truncated_by_quadrature(double shape, double rate,
                                               double lo, double hi) {
  auto kernel_t = [&](double t, double power) {
    return std::exp((-shape + power) * t - rate * std::exp(-t));
  };
  const double tl = std::log(lo), th = std::log(hi);
  const double z = integrate([&](double t) { return kernel_t(t, 0.0); }, tl, th);
  const double m1 = integrate([&](double t) { return kernel_t(t, 1.0); }, tl, th);
  const double mm1 = integrate([&](double t) { return kernel_t(t, -1.0); }, tl, th);
  return {z, m1 / z, mm1 / z};
}

// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 l^2)
inline double kolmogorov_q(double lambda) {
  double s = 0.0;
  for (int k = 1; k <= 101; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1) ? term : -term;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

// one-sample KS p-value against a cdf
inline double ks_test(std::vector<double> x,
                      const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  const double en = std::sqrt(n);
  return kolmogorov_q((en + 0.12 + 0.11 / en) * d);
}

// two-sample KS p-value
inline double ks_test_two(std::vector<double> x, std::vector<double> y) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    if (x[i] <= y[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / x.size() -
                             static_cast<double>(j) / y.size()));
  }
  const double ne = std::sqrt(static_cast<double>(x.size()) *
                              static_cast<double>(y.size()) /
                              static_cast<double>(x.size() + y.size()));
  return kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
}

inline Eigen::MatrixXd dense_operator(const bqtf::DifferenceOperator& d) {
  return Eigen::MatrixXd(d.matrix);
}

struct MeanVar {
  double mean;
  double var;
  long n;
  double se() const { return std::sqrt(var / static_cast<double>(n)); }
};

inline MeanVar mean_var(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s2 = 0.0;
  for (double v : x) s2 += (v - m) * (v - m);
  s2 /= static_cast<double>(x.size() - 1);
  return {m, s2, static_cast<long>(x.size())};
}

}  // namespace oracle
