#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "medlab/median.hpp"

namespace medlab {

struct QuantileResult {
  std::vector<double> alphas;  // input levels sorted nondecreasing
  std::vector<double> xhat;
  std::uint64_t classical_queries = 0;
  std::uint64_t quantum_queries = 0;
  std::uint64_t total_queries = 0;
  double monotonicity_violation = 0.0;   // largest inversion clipped away
  std::vector<MedianResult> per_target;  // bisection route only
};

// One bisection per level, failure budget split k ways.
QuantileResult quantiles_bisect(const Density& d, const std::vector<double>& alphas, double eps,
                                Setting setting, Criterion criterion, std::uint64_t seed);

// Truncated power series b of 1 / sum a_k t^k; needs a[0] != 0.
Eigen::VectorXd reciprocal_series(const Eigen::VectorXd& a);

struct TaylorStep {
  double t0 = 0.0;
  Eigen::VectorXd coeffs;  // z(t0 + s) = sum coeffs[k] s^k, order r+1
};

struct TaylorSolution {
  std::vector<TaylorStep> steps;
  double step = 0.0;
  double eval(double t) const;
};

struct IvpOptions {
  std::optional<int> steps_override;
};

// Deterministic quantile vector through the inverse-CDF flow z' = 1/f(z),
// z(0) = 0, advanced by order-(r+1) Taylor steps; vectors of any length k
// cost the same single pass. Needs gamma > 0.
QuantileResult quantiles_ivp_det(const Density& d, const std::vector<double>& alphas, double eps,
                                 const IvpOptions& opt = {});

}  // namespace medlab
