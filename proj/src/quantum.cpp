#include "medlab/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "medlab/errors.hpp"

namespace medlab {

// Fejer factor sin^2(M pi d) / (M sin(pi d))^2, periodic in d with period 1.
static double fejer_factor(double d, int M) {
  d -= std::round(d);
  if (std::abs(d) < 1e-14) return 1.0;
  double ratio = std::sin(M * std::numbers::pi * d) / (M * std::sin(std::numbers::pi * d));
  return ratio * ratio;
}

Eigen::VectorXd qae_pmf(double a, int M) {
  if (!(a >= 0.0 && a <= 1.0)) throw std::domain_error("qae_pmf: amplitude outside [0,1]");
  if (M < 1) throw std::domain_error("qae_pmf: M must be >= 1");
  double theta = std::asin(std::sqrt(a)) / std::numbers::pi;  // in [0, 1/2]
  Eigen::VectorXd pmf(M);
  for (int y = 0; y < M; ++y) {
    double frac = static_cast<double>(y) / M;
    pmf[y] = 0.5 * (fejer_factor(theta - frac, M) + fejer_factor(theta + frac, M));
  }
  return pmf;
}

double qae_sample(double a, int M, QuerySimState& state) {
  Eigen::VectorXd pmf = qae_pmf(a, M);
  state.queries_used += static_cast<std::uint64_t>(M);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(state.rng), acc = 0.0;
  int y = M - 1;
  for (int i = 0; i < M; ++i) {
    acc += pmf[i];
    if (u <= acc) {
      y = i;
      break;
    }
  }
  double s = std::sin(std::numbers::pi * y / static_cast<double>(M));
  return s * s;
}

int quantum_repetitions(double delta) {
  if (!(delta > 0.0 && delta < 0.5))
    throw std::domain_error("quantum_repetitions: delta must be in (0,1/2)");
  return 2 * static_cast<int>(std::ceil(3.0 * std::log(1.0 / delta))) + 1;
}

double qmean(const std::function<double(std::uint64_t)>& f, std::uint64_t N, double eps,
             double delta, QuerySimState& state) {
  if (N == 0) throw std::domain_error("qmean: empty domain");
  if (!(eps > 0.0)) throw std::domain_error("qmean: eps must be positive");
  if (!(delta > 0.0 && delta < 0.5)) throw std::domain_error("qmean: delta must be in (0,1/2)");
  double acc = 0.0;
  for (std::uint64_t i = 0; i < N; ++i) {
    double v = f(i);
    if (!(v >= -1e-9 && v <= 1.0 + 1e-9)) throw invariant_error("qmean: value outside [0,1]");
    acc += std::clamp(v, 0.0, 1.0);
  }
  double a = acc / static_cast<double>(N);

  // pi/M + (pi/M)^2 <= eps once M >= 2 pi / eps
  double target = 2.0 * std::numbers::pi / std::min(eps, 1.0);
  std::uint64_t M = 1;
  while (static_cast<double>(M) < target) M <<= 1;
  if (M >= N) {  // reading every point is cheaper than one phase run
    state.queries_used += N;
    return a;
  }

  int reps = quantum_repetitions(delta);
  std::vector<double> est(reps);
  for (int j = 0; j < reps; ++j) est[j] = qae_sample(a, static_cast<int>(M), state);
  std::nth_element(est.begin(), est.begin() + reps / 2, est.end());
  return est[reps / 2];
}

IntegralEstimate integrate_quantum(const Density& d, double lo, double hi, double eps,
                                   double delta, QuerySimState& state) {
  if (!(eps > 0.0)) throw std::domain_error("integrate_quantum: eps must be positive");
  if (!(delta > 0.0 && delta < 0.5))
    throw std::domain_error("integrate_quantum: delta must be in (0,1/2)");
  IntegralEstimate est;
  if (!(hi > lo)) return est;
  const HolderParams& p = d.params();
  double length = hi - lo;
  double smooth = p.r + p.rho;
  double kappa = interpolation_residual_bound(p, 1.0);
  // n^(r+rho+1) = 8 pi kappa L^(1+r+rho) / eps balances nodes against the phase grid
  double raw = std::pow(
      8.0 * std::numbers::pi * kappa * std::pow(length, 1.0 + smooth) / eps, 1.0 / (smooth + 1.0));
  int n = std::max(1, static_cast<int>(std::ceil(raw - 1e-9)));
  if (n > 5e7) throw std::domain_error("integrate_quantum: node count above 5e7");

  std::uint64_t before_c = d.queries(), before_q = state.queries_used;
  PiecewiseInterpolant ip = build_interpolant(d, lo, hi, n, true);
  double rn = ip.residual_bound;
  est.subintervals = n;
  est.residual_bound = rn;
  if (length * rn <= 0.25 * eps) {  // interpolant alone is already inside budget
    est.value = ip.integral;
    est.queries = (d.queries() - before_c) + (state.queries_used - before_q);
    return est;
  }

  // Midpoint refinement of each subinterval so that discretizing the
  // residual f - p costs at most eps/4 of the budget.
  double h = length / n;
  long long m;
  if (p.r == 0) {
    m = static_cast<long long>(
        std::ceil(0.5 * h * std::pow(4.0 * length * p.H / eps, 1.0 / p.rho)));
  } else {
    double rr = std::pow(static_cast<double>(p.r), p.r + 1);
    double cr = 0.5 / rr + (p.r + 1) / std::tgamma(p.r + 1.0);
    m = static_cast<long long>(std::ceil(cr * length * p.H * std::pow(h, smooth) / eps));
  }
  m = std::max(m, 1LL);
  std::uint64_t total = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(m);
  if (total > (1ull << 31)) throw std::domain_error("integrate_quantum: refinement above 2^31");

  double sub = h / static_cast<double>(m);
  double envelope = rn * (1.0 + 1e-9) + 1e-15;
  auto residual01 = [&](std::uint64_t i) {
    std::uint64_t cell = i / static_cast<std::uint64_t>(m);
    std::uint64_t j = i % static_cast<std::uint64_t>(m);
    double x = std::clamp(lo + cell * h + (j + 0.5) * sub, 0.0, 1.0);
    double g = d.eval_uncounted(x, 0) - ip.eval(x);
    if (std::abs(g) > envelope)
      throw invariant_error("integrate_quantum: residual escaped the interpolation envelope");
    return std::clamp(g / (2.0 * rn) + 0.5, 0.0, 1.0);
  };
  double eps_amp = eps / (4.0 * length * rn);
  double uhat = qmean(residual01, total, eps_amp, delta, state);
  est.value = ip.integral + 2.0 * length * rn * (uhat - 0.5);
  est.queries = (d.queries() - before_c) + (state.queries_used - before_q);
  return est;
}

}  // namespace medlab
