#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "bqtf/dists.hpp"
#include "oracles.hpp"

using namespace bqtf;
using Catch::Approx;

TEST_CASE("check loss") {
  std::vector<double> r{1.0, -1.0};
  CHECK(check_loss(r, 0.5) == Approx(1.0));
  std::vector<double> r2{1.0};
  CHECK(check_loss(r2, 0.25) == Approx(0.25));
  std::vector<double> r3{-1.0};
  CHECK(check_loss(r3, 0.25) == Approx(0.75));
  CHECK_THROWS_AS(check_loss(r, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(check_loss(r, 1.0), std::invalid_argument);
}

TEST_CASE("asymmetric Laplace log density") {
  CHECK(al_log_density(0.0, 0.5, 1.0) == Approx(std::log(0.25)));
  CHECK(al_log_density(1.0, 0.5, 1.0) == Approx(std::log(0.25) - 0.5));
  CHECK(al_log_density(-2.0, 0.25, 2.0) == Approx(std::log(0.09375) - 0.75));
  CHECK_THROWS_AS(al_log_density(0.0, 0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(al_log_density(0.0, 0.5, -1.0), std::invalid_argument);
}

TEST_CASE("asymmetric Laplace density normalizes to one") {
  for (double p : {0.05, 0.25, 0.5, 0.75, 0.95}) {
    for (double sigma2 : {0.5, 1.0, 3.0}) {
      auto f = [&](double x) { return std::exp(al_log_density(x, p, sigma2)); };
      // exponential tails with rates p/sigma2 and (1-p)/sigma2
      const double span = 60.0 * sigma2 / std::min(p, 1.0 - p);
      const double total = oracle::integrate(f, -span, span, 1e-10);
      CHECK(total == Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("bessel ratio half-integer closed forms") {
  for (double x : {0.01, 0.5, 2.0, 50.0, 1e4}) {
    CHECK(bessel_k_ratio(0.5, x) == Approx(1.0 + 1.0 / x).epsilon(1e-12));
    CHECK(bessel_k_ratio(-0.5, x) == Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(bessel_k_ratio(0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(bessel_k_ratio(0.5, -2.0), std::invalid_argument);
}

TEST_CASE("bessel ratio matches integral representation") {
  // nu = 5/2, x = 2 against direct quadrature of K
  const double want =
      oracle::bessel_k_integral(3.5, 2.0) / oracle::bessel_k_integral(2.5, 2.0);
  CHECK(bessel_k_ratio(2.5, 2.0) == Approx(want).epsilon(1e-10));
}

TEST_CASE("bessel ratio against boost across orders") {
  for (double nu : {-1.5, -0.5, 0.0, 0.3, 0.5, 1.0, 2.5, 7.0, 10.5}) {
    for (double x : {0.05, 0.7, 3.0, 40.0}) {
      const double want = boost::math::cyl_bessel_k(std::abs(nu + 1.0), x) /
                          boost::math::cyl_bessel_k(std::abs(nu), x);
      const double tol = (nu == std::floor(nu) + 0.5 || nu == std::floor(nu) - 0.5)
                             ? 1e-12
                             : 1e-8;
      CHECK(bessel_k_ratio(nu, x) == Approx(want).epsilon(tol));
    }
  }
}

TEST_CASE("bessel ratio sanity lower bounds") {
  for (double nu : {-0.5, 0.5, 1.5, 10.0}) {
    for (double x : {0.1, 1.0, 10.0}) {
      const double r = bessel_k_ratio(nu, x);
      CHECK(r >= 1.0 - 1e-14);
      CHECK(r > 2.0 * nu / x - 1e-14);
    }
  }
}

TEST_CASE("gig moments closed-form case") {
  const auto m = gig_moments({0.5, 4.0, 1.0});
  CHECK(m.mean == Approx(3.0).epsilon(1e-12));
  CHECK(m.inv_mean == Approx(0.5).epsilon(1e-12));
  // the subtraction form sqrt(b/a) R_nu - 2 nu / a agrees
  const double sub = std::sqrt(1.0 / 4.0) * bessel_k_ratio(0.5, 2.0) - 1.0 / 4.0;
  CHECK(m.inv_mean == Approx(sub).epsilon(1e-12));
}

TEST_CASE("gig moments Cauchy-Schwarz") {
  for (double nu : {-0.5, 0.5, 1.5, 10.0})
    for (double a : {0.1, 1.0, 10.0})
      for (double b : {0.1, 1.0, 10.0}) {
        const auto m = gig_moments({nu, a, b});
        CHECK(m.mean * m.inv_mean >= 1.0 - 1e-12);
      }
}

TEST_CASE("gig sampler matches analytic moments on the parameter grid") {
  Rng rng(20240915);
  const long n = 200000;
  std::vector<double> draws(n);
  for (double nu : {-0.5, 0.5, 1.5, 10.0}) {
    for (double a : {0.1, 1.0, 10.0}) {
      for (double b : {0.1, 1.0, 10.0}) {
        const GigParams g{nu, a, b};
        for (long i = 0; i < n; ++i) draws[i] = sample_gig(g, rng);
        const auto mv = oracle::mean_var(draws);
        const auto want = gig_moments(g);
        INFO("nu=" << nu << " a=" << a << " b=" << b);
        CHECK(std::abs(mv.mean - want.mean) < 3.0 * mv.se());
        std::vector<double> inv(draws.size());
        for (std::size_t i = 0; i < draws.size(); ++i) inv[i] = 1.0 / draws[i];
        const auto mvi = oracle::mean_var(inv);
        CHECK(std::abs(mvi.mean - want.inv_mean) < 3.0 * mvi.se());
      }
    }
  }
}

TEST_CASE("gig sampler small-omega regime") {
  // exercises the piecewise-envelope branch (omega ~ 1e-6)
  Rng rng(7);
  const GigParams g{0.5, 1e-12, 2.0};
  const long n = 100000;
  std::vector<double> draws(n);
  for (long i = 0; i < n; ++i) {
    draws[i] = sample_gig(g, rng);
    REQUIRE(draws[i] > 0.0);
  }
  const auto mv = oracle::mean_var(draws);
  const auto want = gig_moments(g);
  CHECK(std::abs(mv.mean - want.mean) < 4.0 * mv.se());
}

TEST_CASE("gig sampler mean within one percent") {
  Rng rng(99);
  const GigParams g{0.5, 4.0, 1.0};
  double s = 0.0;
  const long n = 1000000;
  for (long i = 0; i < n; ++i) s += sample_gig(g, rng);
  CHECK(s / static_cast<double>(n) == Approx(3.0).epsilon(0.01));
}

TEST_CASE("gig reciprocal identity") {
  const double a = 2.0, b = 0.7;
  Rng r1(11), r2(22);
  std::vector<double> x(10000), y(10000);
  for (auto& v : x) v = sample_gig({-0.5, a, b}, r1);
  for (auto& v : y) v = 1.0 / sample_gig({0.5, b, a}, r2);
  CHECK(oracle::ks_test_two(x, y) > 0.01);
}

TEST_CASE("gig sampler determinism") {
  Rng r1(123), r2(123);
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_gig({1.5, 2.0, 3.0}, r1) == sample_gig({1.5, 2.0, 3.0}, r2));
  }
}

TEST_CASE("truncated gig sampler") {
  const GigParams g{0.5, 4.0, 1.0};
  TruncationBounds wide{};  // defaults span 20 decades

  SECTION("default bounds reproduce the untruncated law") {
    Rng r1(5), r2(6);
    std::vector<double> x(10000), y(10000);
    for (auto& v : x) v = sample_truncated_gig(g, wide, r1);
    for (auto& v : y) v = sample_gig(g, r2);
    CHECK(oracle::ks_test_two(x, y) > 0.01);
  }

  SECTION("support contract and quadrature mean on [1, 2]") {
    TruncationBounds tb{1.0, 2.0};
    Rng rng(42);
    double s = 0.0;
    const long n = 200000;
    for (long i = 0; i < n; ++i) {
      const double v = sample_truncated_gig(g, tb, rng);
      REQUIRE(v >= 1.0);
      REQUIRE(v <= 2.0);
      s += v;
    }
    const auto want = oracle::gig_truncated_by_quadrature(0.5, 4.0, 1.0, 1.0, 2.0);
    CHECK(s / static_cast<double>(n) == Approx(want.mean).epsilon(0.01));
  }

  SECTION("inverse-cdf fallback in a far tail still lands inside") {
    TruncationBounds tb{50.0, 60.0};  // mass ~ exp(-25) relative
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
      const double v = sample_truncated_gig(g, tb, rng);
      REQUIRE(v >= 50.0);
      REQUIRE(v <= 60.0);
    }
  }
}

TEST_CASE("truncated inverse gamma sampler") {
  SECTION("default bounds reproduce the untruncated law") {
    Rng r1(15), r2(16);
    TruncationBounds wide{};
    std::vector<double> x(10000), y(10000);
    for (auto& v : x) v = sample_truncated_inverse_gamma(1.7, 2.5, wide, r1);
    for (auto& v : y) v = r2.inverse_gamma(1.7, 2.5);
    CHECK(oracle::ks_test_two(x, y) > 0.01);
  }

  SECTION("support contract") {
    TruncationBounds tb{1.0, 2.0};
    Rng rng(8);
    for (int i = 0; i < 2000; ++i) {
      const double v = sample_truncated_inverse_gamma(0.5, 1.5, tb, rng);
      REQUIRE(v >= 1.0);
      REQUIRE(v <= 2.0);
    }
  }

  SECTION("shape one mean matches quadrature on [0.5, 1.5]") {
    TruncationBounds tb{0.5, 1.5};
    Rng rng(21);
    double s = 0.0;
    const long n = 200000;
    for (long i = 0; i < n; ++i)
      s += sample_truncated_inverse_gamma(1.0, 1.0, tb, rng);
    const auto want = oracle::ig_truncated_by_quadrature(1.0, 1.0, 0.5, 1.5);
    CHECK(s / static_cast<double>(n) == Approx(want.mean).epsilon(0.01));
  }
}

TEST_CASE("truncated gig expectations") {
  SECTION("default bounds recover the untruncated moments") {
    TruncationBounds wide{};
    for (double nu : {-0.5, 0.5, 1.5}) {
      const GigParams g{nu, 4.0, 1.0};
      const auto plain = gig_moments(g);
      const auto trunc = truncated_gig_expectations(g, wide);
      CHECK(trunc.mean == Approx(plain.mean).epsilon(1e-8));
      CHECK(trunc.inv_mean == Approx(plain.inv_mean).epsilon(1e-8));
    }
  }

  SECTION("matches quadrature on [1, 2]") {
    TruncationBounds tb{1.0, 2.0};
    const auto got = truncated_gig_expectations({0.5, 4.0, 1.0}, tb);
    const auto want = oracle::gig_truncated_by_quadrature(0.5, 4.0, 1.0, 1.0, 2.0);
    CHECK(got.mean == Approx(want.mean).epsilon(1e-6));
    CHECK(got.inv_mean == Approx(want.inv_mean).epsilon(1e-6));
  }
}

TEST_CASE("truncated inverse gamma expectations") {
  SECTION("IG(1, 2) at default bounds has E[1/X] = 1/2") {
    TruncationBounds wide{};
    CHECK(truncated_ig_expectations(1.0, 2.0, wide) == Approx(0.5).epsilon(1e-8));
  }

  SECTION("shape one matches quadrature on tight bounds") {
    TruncationBounds tb{0.5, 1.5};
    const auto want = oracle::ig_truncated_by_quadrature(1.0, 1.0, 0.5, 1.5);
    CHECK(truncated_ig_expectations(1.0, 1.0, tb) ==
          Approx(want.inv_mean).epsilon(1e-6));
  }

  SECTION("general shape matches quadrature") {
    TruncationBounds tb{0.25, 4.0};
    const auto want = oracle::ig_truncated_by_quadrature(2.5, 3.0, 0.25, 4.0);
    CHECK(truncated_ig_expectations(2.5, 3.0, tb) ==
          Approx(want.inv_mean).epsilon(1e-6));
  }

  SECTION("rate pinning the mass against the upper bound stays finite") {
    TruncationBounds wide{};
    const double v = truncated_ig_expectations(1.0, 1e15, wide);
    CHECK(v > 0.0);
    CHECK(v == Approx(1.0 / 1e15 + 1.0 / wide.upper).epsilon(1e-6));
  }

  SECTION("degenerate truncation raises") {
    TruncationBounds tb{1.0, 2.0};
    CHECK_THROWS_AS(truncated_ig_expectations(3.0, 1e7, tb), DegenerateTruncation);
  }
}

TEST_CASE("truncation bounds validation") {
  CHECK_THROWS_AS((TruncationBounds{0.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((TruncationBounds{2.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GigParams{0.5, 0.0, 1.0}.validate()), std::invalid_argument);
}
