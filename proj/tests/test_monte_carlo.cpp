#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "medlab/errors.hpp"
#include "medlab/monte_carlo.hpp"
#include "medlab/rng.hpp"

using namespace medlab;

TEST_CASE("repetition schedule") {
  CHECK(mc_repetitions(0.01) == 37);
  CHECK(mc_repetitions(1e-4) == 75);  // squaring delta at most doubles (+1)
  CHECK(mc_repetitions(0.4) % 2 == 1);
  for (double delta : {0.3, 0.1, 0.01, 1e-3}) {
    int k = mc_repetitions(delta);
    int k2 = mc_repetitions(delta * delta);
    CHECK(k2 <= 2 * k + 1);
    CHECK(k2 >= k);
  }
  CHECK_THROWS_AS(mc_repetitions(0.0), std::domain_error);
  CHECK_THROWS_AS(mc_repetitions(0.5), std::domain_error);
  CHECK_THROWS_AS(mc_repetitions(1.0), std::domain_error);
}

TEST_CASE("median of repetitions beats single-run failure") {
  // failure probability of a median of K Bernoulli(1/4) failures is at most
  // exp(-K/8); check the empirical rate against that envelope
  auto rng = make_engine(42);
  std::bernoulli_distribution fail(0.25);
  for (int K : {11, 21, 37}) {
    int bad = 0;
    const int sims = 20000;
    for (int s = 0; s < sims; ++s) {
      int count = 0;
      for (int j = 0; j < K; ++j) count += fail(rng) ? 1 : 0;
      if (2 * count >= K) ++bad;
    }
    double rate = static_cast<double>(bad) / sims;
    CHECK(rate <= std::exp(-K / 8.0));
  }
}

TEST_CASE("estimates stay within eps with high probability") {
  Density base = builtin_catalog("sine-0.5", 1, 1.0);
  double ref = base.reference_cdf(0.5);
  for (double eps : {1e-2, 1e-3}) {
    int failures = 0;
    for (int s = 0; s < 50; ++s) {
      auto rng = make_engine(mix_seed(99, s));
      Density d = base.with_fresh_counter();
      IntegralEstimate est = integrate_mc(d, 0.0, 0.5, eps, 0.01, rng);
      if (std::abs(est.value - ref) > eps) ++failures;
    }
    CHECK(failures <= 3);  // nominal failure budget is 1% per run
  }
}

TEST_CASE("query cost respects the frozen constant") {
  // queries <= C eps^(-1/(r+rho+1/2)) ceil(ln(1/delta)), C frozen at 24
  const double C = 24.0;
  Density base = builtin_catalog("sine-0.5", 1, 1.0);
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    for (double delta : {0.2, 0.01, 1e-4}) {
      Density d = base.with_fresh_counter();
      auto rng = make_engine(7);
      integrate_mc(d, 0.0, 0.5, eps, delta, rng);
      double budget =
          C * std::pow(eps, -1.0 / 2.5) * std::ceil(std::log(1.0 / delta));
      INFO("eps=", eps, " delta=", delta, " queries=", d.queries(), " budget=", budget);
      CHECK(static_cast<double>(d.queries()) <= budget);
      CHECK(d.queries() > 0);
    }
  }
}

TEST_CASE("reproducible for a fixed engine state") {
  Density base = builtin_catalog("poly-3", 1, 1.0);
  auto r1 = make_engine(123), r2 = make_engine(123);
  double v1 = integrate_mc(base.with_fresh_counter(), 0.1, 0.9, 1e-3, 0.05, r1).value;
  double v2 = integrate_mc(base.with_fresh_counter(), 0.1, 0.9, 1e-3, 0.05, r2).value;
  CHECK(v1 == v2);
}

TEST_CASE("argument gates") {
  Density d = builtin_catalog("uniform", 1, 1.0);
  auto rng = make_engine(1);
  CHECK_THROWS_AS(integrate_mc(d, 0.0, 1.0, 0.0, 0.01, rng), std::domain_error);
  CHECK_THROWS_AS(integrate_mc(d, 0.0, 1.0, 1e-3, 0.5, rng), std::domain_error);
  CHECK_THROWS_AS(integrate_mc(d, 0.0, 1.0, 1e-3, 0.0, rng), std::domain_error);
  IntegralEstimate empty = integrate_mc(d, 0.5, 0.5, 1e-3, 0.01, rng);
  CHECK(empty.value == 0.0);
  CHECK(empty.queries == 0);
}

TEST_CASE("samples escaping the declared class raise an invariant error") {
  // claims the uniform class but evaluates a jump: the interpolation envelope
  // cannot hold, and the sampler must notice rather than return garbage
  HolderParams p;
  p.r = 1;
  p.rho = 1.0;
  p.D = 1.0;
  p.H = 1.0;
  p.gamma = 0.5;
  Density liar("jump", p, [](double x, int) { return x > 0.6 ? 1.4 : 0.8; });
  auto rng = make_engine(5);
  CHECK_THROWS_AS(integrate_mc(liar, 0.0, 1.0, 1e-3, 0.01, rng), invariant_error);
}
