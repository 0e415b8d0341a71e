#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "medlab/holder.hpp"

using namespace medlab;

namespace {
constexpr double kSineHalfMedian = 0.36703725189112835;
constexpr double kSineQuarterMedian = 0.424783810731889;
constexpr double kPoly3Median = 0.7074764851741444;  // (17/2)^(1/4) - 1
constexpr double kKinkHalfMedianR1 = 0.3792899160024079;
constexpr double kKinkHalfMedianR0 = 0.36372602280588084;
}  // namespace

TEST_CASE("params validation rejects nonsense") {
  HolderParams p;
  CHECK_NOTHROW(p.validate());
  HolderParams bad = p;
  bad.r = -1;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = p;
  bad.rho = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = p;
  bad.rho = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = p;
  bad.D = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = p;
  bad.H = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = p;
  bad.gamma = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = p;
  bad.gamma = bad.D + 1.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("catalog names and natural constants") {
  auto names = catalog_names();
  REQUIRE(names.size() == 5);
  CHECK(names[0] == "uniform");
  CHECK(names[1] == "sine-0.5");

  Density u = builtin_catalog("uniform", 1, 1.0);
  CHECK(u.params().D == doctest::Approx(1.0));
  CHECK(u.params().gamma == doctest::Approx(1.0));

  Density s = builtin_catalog("sine-0.5", 1, 1.0);
  CHECK(s.params().D == doctest::Approx(std::numbers::pi));
  CHECK(s.params().H == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi));
  CHECK(s.params().gamma == doctest::Approx(0.5));

  CHECK_THROWS_AS(builtin_catalog("nosuch", 1, 1.0), std::out_of_range);
  CHECK_THROWS_AS(builtin_catalog("sine-1.5", 1, 1.0), std::out_of_range);
  CHECK_THROWS_AS(builtin_catalog("kink-0", 1, 1.0), std::out_of_range);
}

TEST_CASE("query counter is exact and isolated") {
  Density d = builtin_catalog("sine-0.5", 1, 1.0);
  CHECK(d.queries() == 0);
  d.eval_counted(0.3, 0);
  d.eval_counted(0.7, 1);
  CHECK(d.queries() == 2);
  d.eval_uncounted(0.5, 0);
  CHECK(d.queries() == 2);

  Density shared = d;  // copies share the counter
  shared.eval_counted(0.1, 0);
  CHECK(d.queries() == 3);

  Density fresh = d.with_fresh_counter();
  CHECK(fresh.queries() == 0);
  fresh.eval_counted(0.2, 0);
  CHECK(fresh.queries() == 1);
  CHECK(d.queries() == 3);
}

TEST_CASE("eval argument checks") {
  Density d = builtin_catalog("sine-0.5", 1, 1.0);
  CHECK_THROWS_AS(d.eval_counted(-0.1, 0), std::domain_error);
  CHECK_THROWS_AS(d.eval_counted(1.1, 0), std::domain_error);
  CHECK_THROWS_AS(d.eval_counted(0.5, 2), std::domain_error);  // order > r
  CHECK_THROWS_AS(d.eval_counted(0.5, -1), std::domain_error);
}

TEST_CASE("derivatives match finite differences") {
  const double h = 1e-6;
  for (const char* name : {"sine-0.5", "poly-3", "kink-0.5"}) {
    Density d = builtin_catalog(name, 2, 1.0);
    for (int j = 1; j <= 2; ++j) {
      for (double x : {0.11, 0.26, 0.43, 0.55, 0.68, 0.81, 0.94}) {
        double fd =
            (d.eval_uncounted(x + h, j - 1) - d.eval_uncounted(x - h, j - 1)) / (2.0 * h);
        double exact = d.eval_uncounted(x, j);
        CHECK(fd == doctest::Approx(exact).epsilon(1e-4).scale(std::max(1.0, std::abs(exact))));
      }
    }
  }
}

TEST_CASE("reference cdf endpoints, monotonicity and quadrature cross-check") {
  for (const auto& name : catalog_names()) {
    Density d = builtin_catalog(name, 1, 1.0);
    REQUIRE(d.has_reference_cdf());
    CHECK(std::abs(d.reference_cdf(0.0)) <= 1e-10);
    CHECK(std::abs(d.reference_cdf(1.0) - 1.0) <= 1e-10);
    double prev = 0.0;
    for (int i = 1; i <= 64; ++i) {
      double cur = d.reference_cdf(static_cast<double>(i) / 64);
      CHECK(cur >= prev - 1e-12);
      prev = cur;
    }
    for (double x : {0.17, 0.5, 0.83}) {
      double quad = adaptive_integral([&](double t) { return d.eval_uncounted(t, 0); }, 0.0, x);
      CHECK(d.reference_cdf(x) == doctest::Approx(quad).epsilon(1e-9));
    }
  }
}

TEST_CASE("reference quantiles hit frozen medians") {
  CHECK(builtin_catalog("sine-0.5", 1, 1.0).reference_quantile(0.5) ==
        doctest::Approx(kSineHalfMedian).epsilon(1e-12));
  CHECK(builtin_catalog("sine-0.25", 1, 1.0).reference_quantile(0.5) ==
        doctest::Approx(kSineQuarterMedian).epsilon(1e-12));
  CHECK(builtin_catalog("poly-3", 1, 1.0).reference_quantile(0.5) ==
        doctest::Approx(kPoly3Median).epsilon(1e-12));
  CHECK(builtin_catalog("kink-0.5", 1, 1.0).reference_quantile(0.5) ==
        doctest::Approx(kKinkHalfMedianR1).epsilon(1e-12));
  CHECK(builtin_catalog("kink-0.5", 0, 1.0).reference_quantile(0.5) ==
        doctest::Approx(kKinkHalfMedianR0).epsilon(1e-12));

  Density d = builtin_catalog("sine-0.5", 1, 1.0);
  CHECK(d.reference_quantile(0.0) == 0.0);
  CHECK(d.reference_quantile(1.0) == 1.0);
  for (double a : {0.05, 0.25, 0.5, 0.75, 0.95})
    CHECK(d.reference_cdf(d.reference_quantile(a)) == doctest::Approx(a).epsilon(1e-10));
}

TEST_CASE("catalog members pass membership verification") {
  for (const auto& name : catalog_names()) {
    for (int r : {0, 1}) {
      Density d = builtin_catalog(name, r, 1.0);
      MembershipReport rep = verify_membership(d, 1024);
      INFO(name, " r=", r, " max_violation=", rep.max_violation);
      CHECK(rep.all_pass());
    }
  }
  MembershipReport rep = verify_membership(builtin_catalog("sine-0.5", 2, 1.0), 1024);
  CHECK(rep.all_pass());
  rep = verify_membership(builtin_catalog("kink-0.3", 1, 0.5), 1024);
  CHECK(rep.all_pass());
}

TEST_CASE("membership verification detects false claims") {
  Density d = builtin_catalog("sine-0.5", 1, 1.0);

  HolderParams tight = d.params();
  tight.gamma = 0.9;  // true minimum is 0.5
  MembershipReport rep = verify_membership(d.with_params(tight), 512);
  CHECK_FALSE(rep.is_separated);
  CHECK(rep.separation_violation == doctest::Approx(0.4).epsilon(1e-3));

  HolderParams small_d = d.params();
  small_d.D = 1.2;  // sup |f'| = pi
  small_d.gamma = 0.5;
  rep = verify_membership(d.with_params(small_d), 512);
  CHECK_FALSE(rep.is_holder);
  CHECK(rep.bound_violation > 1.0);

  HolderParams small_h = d.params();
  small_h.H = 1.0;  // true Hoelder constant of f' is 2 pi^2
  rep = verify_membership(d.with_params(small_h), 512);
  CHECK_FALSE(rep.is_holder);
  CHECK(rep.holder_violation > 1.0);
}

TEST_CASE("adaptive integral oracle is sharp") {
  double v = adaptive_integral(
      [](double x) { return 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * x); }, 0.0, 0.5);
  CHECK(v == doctest::Approx(0.5 + 1.0 / (2.0 * std::numbers::pi)).epsilon(1e-12));
  CHECK(adaptive_integral([](double) { return 1.0; }, 0.0, 1.0) == doctest::Approx(1.0));
  CHECK(adaptive_integral([](double x) { return x * x; }, 0.0, 1.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}
