#include "medlab/quantiles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "medlab/errors.hpp"
#include "medlab/polynomial.hpp"
#include "medlab/rng.hpp"

namespace medlab {

// Levels may arrive in any order; results are reported against the sorted copy.
static std::vector<double> normalize_alphas(std::vector<double> alphas) {
  if (alphas.empty()) throw std::domain_error("quantiles: need at least one level");
  for (double a : alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw std::domain_error("quantiles: levels must lie in [0,1]");
  std::sort(alphas.begin(), alphas.end());
  return alphas;
}

static void enforce_monotone(QuantileResult& out) {
  for (std::size_t j = 1; j < out.xhat.size(); ++j)
    if (out.xhat[j] < out.xhat[j - 1]) {
      out.monotonicity_violation =
          std::max(out.monotonicity_violation, out.xhat[j - 1] - out.xhat[j]);
      out.xhat[j] = out.xhat[j - 1];
    }
}

QuantileResult quantiles_bisect(const Density& d, const std::vector<double>& alphas, double eps,
                                Setting setting, Criterion criterion, std::uint64_t seed) {
  std::vector<double> levels = normalize_alphas(alphas);
  auto delta = delta_budget(setting, eps, static_cast<int>(levels.size()));
  QuantileResult out;
  out.alphas = levels;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    BisectOptions opt;
    opt.target = levels[j];
    if (delta) opt.delta_override = delta;
    MedianResult m =
        median_bisection(d, eps, setting, criterion, mix_seed(seed, j), opt);
    out.xhat.push_back(m.xhat);
    out.classical_queries += m.trace.classical_queries;
    out.quantum_queries += m.trace.quantum_queries;
    out.per_target.push_back(std::move(m));
  }
  out.total_queries = out.classical_queries + out.quantum_queries;
  enforce_monotone(out);
  return out;
}

Eigen::VectorXd reciprocal_series(const Eigen::VectorXd& a) {
  if (a.size() == 0 || a[0] == 0.0)
    throw std::domain_error("reciprocal_series: leading coefficient must be nonzero");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(a.size());
  b[0] = 1.0 / a[0];
  for (Eigen::Index k = 1; k < a.size(); ++k) {
    double s = 0.0;
    for (Eigen::Index i = 1; i <= k; ++i) s += a[i] * b[k - i];
    b[k] = -s / a[0];
  }
  return b;
}

// Coefficients 0..deg of sum_j phi[j] (z(t) - z(t0))^j given the z-series c.
static Eigen::VectorXd compose_shifted(const Eigen::VectorXd& phi, const Eigen::VectorXd& c,
                                       int deg) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(deg + 1);  // z - z0, no constant term
  for (int i = 1; i <= deg && i < c.size(); ++i) w[i] = c[i];
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(deg + 1);
  for (Eigen::Index j = phi.size() - 1; j >= 0; --j) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(deg + 1);
    for (int u = 0; u <= deg; ++u) {
      if (acc[u] == 0.0) continue;
      for (int v = 1; u + v <= deg; ++v) next[u + v] += acc[u] * w[v];
    }
    next[0] += phi[j];
    acc = next;
  }
  return acc;
}

double TaylorSolution::eval(double t) const {
  t = std::clamp(t, 0.0, 1.0);
  auto k = std::min(static_cast<std::size_t>(t / step), steps.size() - 1);
  return poly_eval(steps[k].coeffs, t - steps[k].t0);
}

// Grid estimate of the rho-Hoelder constant of (1/f)^(r), via the reciprocal
// series at each grid point. Probe only, so evaluations are uncounted.
static double reciprocal_holder_estimate(const Density& d) {
  const HolderParams& p = d.params();
  const int grid = 257;
  std::vector<double> top(grid);
  for (int i = 0; i < grid; ++i) {
    double z = static_cast<double>(i) / (grid - 1);
    Eigen::VectorXd a(p.r + 1);
    double fact = 1.0;
    for (int j = 0; j <= p.r; ++j) {
      if (j > 0) fact *= j;
      a[j] = d.eval_uncounted(z, j) / fact;
    }
    if (!(a[0] > 0.0)) throw invariant_error("quantiles_ivp_det: density vanishes on the grid");
    Eigen::VectorXd b = reciprocal_series(a);
    double rfact = 1.0;
    for (int j = 2; j <= p.r; ++j) rfact *= j;
    top[i] = b[p.r] * rfact;
  }
  double worst = 0.0;
  for (int i = 0; i < grid; ++i)
    for (int j = i + 1; j < grid; ++j) {
      double dz = static_cast<double>(j - i) / (grid - 1);
      worst = std::max(worst, std::abs(top[j] - top[i]) / std::pow(dz, p.rho));
    }
  return worst;
}

QuantileResult quantiles_ivp_det(const Density& d, const std::vector<double>& alphas, double eps,
                                 const IvpOptions& opt) {
  std::vector<double> levels = normalize_alphas(alphas);
  const HolderParams& p = d.params();
  if (!(p.gamma > 0.0)) throw std::domain_error("quantiles_ivp_det: needs gamma > 0");
  if (!(eps > 0.0 && eps < 0.5))
    throw std::domain_error("quantiles_ivp_det: eps must be in (0,1/2)");

  double smooth = p.r + p.rho;
  int steps;
  if (opt.steps_override) {
    steps = *opt.steps_override;
    if (steps < 1) throw std::domain_error("quantiles_ivp_det: steps_override must be >= 1");
  } else {
    double chat = std::max(1.0, 1.5 * reciprocal_holder_estimate(d)) * std::pow(p.gamma, -smooth);
    steps = std::max(4, static_cast<int>(std::ceil(std::pow(chat / eps, 1.0 / smooth) - 1e-9)));
  }
  if (steps > 2e7) throw std::domain_error("quantiles_ivp_det: step count above 2e7");

  std::uint64_t before = d.queries();
  double h = 1.0 / steps;
  TaylorSolution sol;
  sol.step = h;
  sol.steps.reserve(steps);
  double z0 = 0.0;
  for (int k = 0; k < steps; ++k) {
    Eigen::VectorXd phi(p.r + 1);
    double fact = 1.0;
    for (int j = 0; j <= p.r; ++j) {
      if (j > 0) fact *= j;
      phi[j] = d.eval_counted(std::clamp(z0, 0.0, 1.0), j) / fact;
    }
    if (!(phi[0] > 0.0)) throw invariant_error("quantiles_ivp_det: nonpositive density on path");
    Eigen::VectorXd c = Eigen::VectorXd::Zero(p.r + 2);
    c[0] = z0;
    for (int deg = 0; deg <= p.r; ++deg) {
      Eigen::VectorXd a = compose_shifted(phi, c, deg);  // f(z(t)) to order deg
      Eigen::VectorXd b = reciprocal_series(a);          // z'(t) to order deg
      c[deg + 1] = b[deg] / (deg + 1);
    }
    sol.steps.push_back({k * h, c});
    z0 = std::clamp(poly_eval(c, h), 0.0, 1.0);
  }

  QuantileResult out;
  out.alphas = levels;
  for (double alpha : levels) out.xhat.push_back(std::clamp(sol.eval(alpha), 0.0, 1.0));
  out.classical_queries = d.queries() - before;
  out.total_queries = out.classical_queries;
  enforce_monotone(out);
  if (out.monotonicity_violation > eps)
    throw invariant_error("quantiles_ivp_det: non-monotone beyond tolerance");
  return out;
}

}  // namespace medlab
