#pragma once

#include <Eigen/Dense>

namespace medlab {

// Dense polynomials in the monomial basis, coefficient c[k] on t^k.
// Shared by the bump construction, the piecewise catalog density and the
// Taylor stepper; sizes stay tiny (degree <= ~25).

inline double poly_eval(const Eigen::VectorXd& c, double t) {
  double acc = 0.0;
  for (Eigen::Index k = c.size() - 1; k >= 0; --k) acc = acc * t + c[k];
  return acc;
}

inline Eigen::VectorXd poly_derivative(const Eigen::VectorXd& c) {
  if (c.size() <= 1) return Eigen::VectorXd::Zero(1);
  Eigen::VectorXd d(c.size() - 1);
  for (Eigen::Index k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
  return d;
}

// Antiderivative with zero constant term.
inline Eigen::VectorXd poly_antiderivative(const Eigen::VectorXd& c) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(c.size() + 1);
  for (Eigen::Index k = 0; k < c.size(); ++k) a[k + 1] = c[k] / static_cast<double>(k + 1);
  return a;
}

// Coefficients of psi(t) = t^(r+1) (1-t)^(r+1) on [0,1]. Extending psi by
// zero gives a C^r function whose r-th derivative is Lipschitz, which is why
// both the kink density and the lower-bound family are built from it.
inline Eigen::VectorXd bump_profile_coeffs(int r) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * (r + 1) + 1);
  double binom = 1.0;
  for (int i = 0; i <= r + 1; ++i) {
    c[r + 1 + i] = (i % 2 == 0 ? 1.0 : -1.0) * binom;
    binom = binom * (r + 1 - i) / (i + 1.0);
  }
  return c;
}

}  // namespace medlab
