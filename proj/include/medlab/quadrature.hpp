#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "medlab/holder.hpp"

namespace medlab {

// Worst-case |f - p| on one subinterval of width h for the piecewise
// interpolant below: constant at the midpoint for r = 0, degree-r
// interpolation on equispaced nodes (endpoints included) for r >= 1.
double interpolation_residual_bound(const HolderParams& p, double h);

// Weights w on the unit-interval nodes i/r, i = 0..r, solving
// sum_i w_i (i/r)^j = 1/(j+1) for j = 0..r. r = 0 gives {1} (midpoint rule).
Eigen::VectorXd newton_cotes_weights(int r);

struct PiecewiseInterpolant {
  double lo = 0.0, hi = 1.0;
  int subintervals = 1;
  int degree = 1;
  std::vector<double> node_values;  // n*degree+1 values, or n midpoints when degree 0
  double integral = 0.0;            // exact integral of the interpolant
  double residual_bound = 0.0;      // guaranteed sup |f - p| per subinterval

  double eval(double x) const;
};

// Samples f once per distinct node (shared endpoints are not re-queried).
PiecewiseInterpolant build_interpolant(const Density& d, double lo, double hi, int n,
                                       bool counted = true);

// Smallest subinterval count n with kappa * length^(1+r+rho) / n^(r+rho) <= eps,
// where kappa = interpolation_residual_bound(p, 1). Zero length gives 1.
int det_budget(double eps, const HolderParams& p, double length);

struct IntegralEstimate {
  double value = 0.0;
  std::uint64_t queries = 0;
  int subintervals = 0;
  double residual_bound = 0.0;  // sup |f - p| over [lo, hi]
};

// Integral of the piecewise interpolant on [lo, hi] with n subintervals.
IntegralEstimate integrate_det(const Density& d, double lo, double hi, int n);

}  // namespace medlab
