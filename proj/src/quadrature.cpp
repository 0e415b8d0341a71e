#include "medlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace medlab {

double interpolation_residual_bound(const HolderParams& p, double h) {
  if (h <= 0.0) return 0.0;
  if (p.r == 0) return p.H * std::pow(0.5 * h, p.rho);
  double node_factor = 4.0 * std::pow(static_cast<double>(p.r), p.r + 1);
  return p.H * std::pow(h, p.r + p.rho) / node_factor;
}

Eigen::VectorXd newton_cotes_weights(int r) {
  if (r < 0) throw std::domain_error("newton_cotes_weights: r must be >= 0");
  if (r == 0) return Eigen::VectorXd::Ones(1);
  int m = r + 1;
  Eigen::MatrixXd vander(m, m);
  Eigen::VectorXd moments(m);
  for (int j = 0; j < m; ++j) {
    moments[j] = 1.0 / (j + 1);
    for (int i = 0; i < m; ++i) vander(j, i) = std::pow(static_cast<double>(i) / r, j);
  }
  return vander.fullPivLu().solve(moments);
}

double PiecewiseInterpolant::eval(double x) const {
  int n = subintervals, r = degree;
  double u = (x - lo) / (hi - lo) * n;
  int k = std::clamp(static_cast<int>(std::floor(u)), 0, n - 1);
  if (r == 0) return node_values[k];
  double t = u - k;
  // barycentric weights for equispaced nodes are (-1)^i C(r,i)
  const double* v = node_values.data() + static_cast<std::size_t>(k) * r;
  double num = 0.0, den = 0.0, binom = 1.0;
  for (int i = 0; i <= r; ++i) {
    double dist = t - static_cast<double>(i) / r;
    if (std::abs(dist) < 1e-13) return v[i];
    double w = (i % 2 == 0 ? binom : -binom) / dist;
    num += w * v[i];
    den += w;
    binom = binom * (r - i) / (i + 1.0);
  }
  return num / den;
}

PiecewiseInterpolant build_interpolant(const Density& d, double lo, double hi, int n,
                                       bool counted) {
  if (!(hi > lo)) throw std::domain_error("build_interpolant: need hi > lo");
  if (n < 1) throw std::domain_error("build_interpolant: need n >= 1");
  const HolderParams& p = d.params();
  PiecewiseInterpolant ip;
  ip.lo = lo;
  ip.hi = hi;
  ip.subintervals = n;
  ip.degree = p.r;
  double length = hi - lo, h = length / n;
  ip.residual_bound = interpolation_residual_bound(p, h);
  auto query = [&](double x) {
    x = std::clamp(x, 0.0, 1.0);
    return counted ? d.eval_counted(x, 0) : d.eval_uncounted(x, 0);
  };
  if (p.r == 0) {
    ip.node_values.resize(n);
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      double v = query(lo + (k + 0.5) * h);
      ip.node_values[k] = v;
      acc += v;
    }
    ip.integral = acc * h;
    return ip;
  }
  std::size_t total = static_cast<std::size_t>(n) * p.r + 1;
  ip.node_values.resize(total);
  for (std::size_t t = 0; t < total; ++t)
    ip.node_values[t] = query(lo + length * static_cast<double>(t) / (total - 1));
  Eigen::VectorXd w = newton_cotes_weights(p.r);
  double acc = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i <= p.r; ++i)
      acc += w[i] * ip.node_values[static_cast<std::size_t>(k) * p.r + i];
  ip.integral = acc * h;
  return ip;
}

int det_budget(double eps, const HolderParams& p, double length) {
  if (!(eps > 0.0)) throw std::domain_error("det_budget: eps must be positive");
  if (length < 0.0) throw std::domain_error("det_budget: length must be >= 0");
  if (length == 0.0) return 1;
  double beta = p.r + p.rho;
  double kappa = interpolation_residual_bound(p, 1.0);
  double n = length * std::pow(kappa * length / eps, 1.0 / beta);
  if (n > 5e8) throw std::domain_error("det_budget: subinterval count above 5e8");
  return std::max(1, static_cast<int>(std::ceil(n - 1e-9)));
}

IntegralEstimate integrate_det(const Density& d, double lo, double hi, int n) {
  if (!(0.0 <= lo && lo <= hi && hi <= 1.0))
    throw std::domain_error("integrate_det: need 0 <= lo <= hi <= 1");
  if (n < 1) throw std::domain_error("integrate_det: need n >= 1");
  IntegralEstimate est;
  if (hi == lo) return est;
  std::uint64_t before = d.queries();
  PiecewiseInterpolant ip = build_interpolant(d, lo, hi, n, true);
  est.value = ip.integral;
  est.queries = d.queries() - before;
  est.subintervals = n;
  est.residual_bound = ip.residual_bound;
  return est;
}

}  // namespace medlab
