#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <vector>

#include "bqtf/posterior.hpp"
#include "bqtf/rng.hpp"

using namespace bqtf;
using Catch::Approx;

TEST_CASE("type-7 quantiles") {
  std::vector<double> x(100);
  for (int i = 0; i < 100; ++i) x[static_cast<std::size_t>(i)] = i + 1.0;
  CHECK(quantile_type7(x, 0.025) == Approx(3.475));
  CHECK(quantile_type7(x, 0.975) == Approx(97.525));
  CHECK(quantile_type7(x, 0.0) == 1.0);
  CHECK(quantile_type7(x, 1.0) == 100.0);
  CHECK_THROWS_AS(quantile_type7({}, 0.5), std::invalid_argument);
}

TEST_CASE("summarize draws") {
  SECTION("constant draws give zero-width intervals") {
    Eigen::MatrixXd draws = Eigen::MatrixXd::Constant(50, 3, 2.5);
    const FitSummary s = summarize_draws(draws);
    for (int i = 0; i < 3; ++i) {
      CHECK(s.point[i] == 2.5);
      CHECK(s.lower[i] == 2.5);
      CHECK(s.upper[i] == 2.5);
    }
  }

  SECTION("draws 1..100 on one node") {
    Eigen::MatrixXd draws(100, 1);
    for (int i = 0; i < 100; ++i) draws(i, 0) = i + 1.0;
    const FitSummary s = summarize_draws(draws);
    CHECK(s.point[0] == Approx(50.5));
    CHECK(s.lower[0] == Approx(3.475));
    CHECK(s.upper[0] == Approx(97.525));
  }

  SECTION("ordering invariant on random draws") {
    Rng rng(4);
    Eigen::MatrixXd draws(500, 4);
    for (Eigen::Index r = 0; r < draws.rows(); ++r)
      for (Eigen::Index c = 0; c < draws.cols(); ++c) draws(r, c) = rng.normal();
    const FitSummary s = summarize_draws(draws);
    for (int i = 0; i < 4; ++i) {
      CHECK(s.lower[i] <= s.point[i]);
      CHECK(s.point[i] <= s.upper[i]);
    }
  }

  SECTION("too few draws") {
    CHECK_THROWS_AS(summarize_draws(Eigen::MatrixXd::Zero(1, 2)),
                    std::invalid_argument);
  }
}

TEST_CASE("metrics") {
  FitSummary s;
  s.point = Eigen::VectorXd::Constant(4, 1.0);
  s.lower = Eigen::VectorXd::Constant(4, 0.5);
  s.upper = Eigen::VectorXd::Constant(4, 1.5);
  const Eigen::VectorXd truth = Eigen::VectorXd::Constant(4, 1.0);

  SECTION("perfect fit") {
    const Metrics m = metrics(s, truth);
    CHECK(m.mse == 0.0);
    CHECK(m.mad == 0.0);
    CHECK(m.mciw == Approx(1.0));
    CHECK(m.cp == 1.0);
  }

  SECTION("constant offset") {
    FitSummary off = s;
    off.point.array() += 0.1;
    const Metrics m = metrics(off, truth);
    CHECK(m.mse == Approx(0.01));
    CHECK(m.mad == Approx(0.1));
  }

  SECTION("translation equivariance") {
    FitSummary shifted = s;
    shifted.point.array() += 7.0;
    shifted.lower.array() += 7.0;
    shifted.upper.array() += 7.0;
    Eigen::VectorXd truth_shifted = truth.array() + 7.0;
    const Metrics a = metrics(s, truth);
    const Metrics b = metrics(shifted, truth_shifted);
    CHECK(a.mse == Approx(b.mse).margin(1e-12));
    CHECK(a.mad == Approx(b.mad).margin(1e-12));
    CHECK(a.mciw == Approx(b.mciw).margin(1e-12));
    CHECK(a.cp == b.cp);
  }

  SECTION("dimension mismatch") {
    CHECK_THROWS_AS(metrics(s, Eigen::VectorXd::Zero(3)), std::invalid_argument);
  }
}

TEST_CASE("autocorrelation") {
  SECTION("white noise stays inside the band") {
    Rng rng(11);
    std::vector<double> x(20000);
    for (auto& v : x) v = rng.normal();
    const auto acf = autocorrelation(x, 10);
    CHECK(acf[0] == 1.0);
    const double band = 4.0 / std::sqrt(static_cast<double>(x.size()));
    for (int lag = 1; lag <= 10; ++lag) CHECK(std::abs(acf[lag]) < band);
  }

  SECTION("AR(1) coefficient recovered") {
    Rng rng(12);
    std::vector<double> x(10000);
    double prev = 0.0;
    for (auto& v : x) {
      prev = 0.9 * prev + rng.normal();
      v = prev;
    }
    const auto acf = autocorrelation(x, 3);
    CHECK(acf[1] == Approx(0.9).margin(0.05));
  }

  SECTION("constant trace gives zeros past lag zero") {
    std::vector<double> x(100, 3.0);
    const auto acf = autocorrelation(x, 5);
    CHECK(acf[0] == 1.0);
    for (int lag = 1; lag <= 5; ++lag) CHECK(acf[lag] == 0.0);
  }

  SECTION("trace shorter than max_lag") {
    std::vector<double> x(5, 1.0);
    CHECK_THROWS_AS(autocorrelation(x, 5), std::invalid_argument);
  }
}
