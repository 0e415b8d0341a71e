#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "medlab/quadrature.hpp"

namespace medlab {

// Classical simulator of the amplitude-estimation query model: the sampler
// below draws measurement outcomes from the exact distribution and charges
// the oracle calls the real circuit would have made.
struct QuerySimState {
  std::uint64_t queries_used = 0;
  std::mt19937_64 rng;
};

// Outcome distribution of M-point phase estimation on amplitude a: outcome
// y in 0..M-1 yields the estimate sin^2(pi y / M). Sums to 1 exactly.
Eigen::VectorXd qae_pmf(double a, int M);

// Draw one outcome y and return the estimate sin^2(pi y / M); costs M oracle
// calls.
double qae_sample(double a, int M, QuerySimState& state);

// Median repetitions pushing the per-run failure 1 - 8/pi^2 below delta.
int quantum_repetitions(double delta);

// Mean of f(0), ..., f(N-1), all values in [0,1], to additive error eps with
// failure probability <= delta. Falls back to exact summation (charging N)
// when the phase grid would cost at least that much.
double qmean(const std::function<double(std::uint64_t)>& f, std::uint64_t N, double eps,
             double delta, QuerySimState& state);

// Interpolant + amplitude estimation of the leftover residual mass.
IntegralEstimate integrate_quantum(const Density& d, double lo, double hi, double eps,
                                   double delta, QuerySimState& state);

}  // namespace medlab
