#pragma once

#include <random>

#include "medlab/quadrature.hpp"

namespace medlab {

// Median-of-repetitions count driving the failure probability below delta:
// each repetition misses with probability <= 1/4 (Chebyshev), so
// ceil(8 ln(1/delta)) repetitions suffice; forced odd for a unique median.
int mc_repetitions(double delta);

// Control-variate Monte Carlo: integrates f - p against a piecewise
// interpolant p built once, then adds back the exact integral of p.
// P(|value - integral| > eps) <= delta.
IntegralEstimate integrate_mc(const Density& d, double lo, double hi, double eps, double delta,
                              std::mt19937_64& rng);

}  // namespace medlab
