#include "medlab/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "medlab/errors.hpp"

namespace medlab {

int mc_repetitions(double delta) {
  if (!(delta > 0.0 && delta < 0.5))
    throw std::domain_error("mc_repetitions: delta must be in (0,1/2)");
  int k = std::max(1, static_cast<int>(std::ceil(8.0 * std::log(1.0 / delta))));
  return k % 2 == 0 ? k + 1 : k;
}

IntegralEstimate integrate_mc(const Density& d, double lo, double hi, double eps, double delta,
                              std::mt19937_64& rng) {
  if (!(eps > 0.0)) throw std::domain_error("integrate_mc: eps must be positive");
  if (!(delta > 0.0 && delta < 0.5))
    throw std::domain_error("integrate_mc: delta must be in (0,1/2)");
  IntegralEstimate est;
  if (!(hi > lo)) return est;
  const HolderParams& p = d.params();
  double length = hi - lo;
  double smooth = p.r + p.rho;
  double kappa = interpolation_residual_bound(p, 1.0);
  // n^(r+rho+1/2) = 2 kappa L^(1+r+rho) / eps balances nodes against samples
  double raw = std::pow(2.0 * kappa * std::pow(length, 1.0 + smooth) / eps, 1.0 / (smooth + 0.5));
  int n = std::max(1, static_cast<int>(std::ceil(raw - 1e-9)));
  if (n > 5e7) throw std::domain_error("integrate_mc: node count above 5e7");

  std::uint64_t before = d.queries();
  PiecewiseInterpolant ip = build_interpolant(d, lo, hi, n, true);
  double rn = ip.residual_bound;
  long long m = std::max(1LL, static_cast<long long>(
                                  std::ceil(4.0 * length * length * rn * rn / (eps * eps))));
  int reps = mc_repetitions(delta);
  if (static_cast<double>(m) * reps > 4e9) throw std::domain_error("integrate_mc: sample count above 4e9");

  double envelope = rn * (1.0 + 1e-9) + 1e-15;
  std::uniform_real_distribution<double> unif(lo, hi);
  std::vector<double> medians(reps);
  for (int j = 0; j < reps; ++j) {
    double acc = 0.0;
    for (long long t = 0; t < m; ++t) {
      double x = unif(rng);
      double diff = d.eval_counted(x, 0) - ip.eval(x);
      if (std::abs(diff) > envelope)
        throw invariant_error("integrate_mc: sample escaped the interpolation envelope");
      acc += diff;
    }
    medians[j] = ip.integral + length * acc / static_cast<double>(m);
  }
  std::nth_element(medians.begin(), medians.begin() + reps / 2, medians.end());
  est.value = medians[reps / 2];
  est.queries = d.queries() - before;
  est.subintervals = n;
  est.residual_bound = rn;
  return est;
}

}  // namespace medlab
