#include "medlab/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "medlab/polynomial.hpp"
#include "medlab/rng.hpp"

namespace medlab {

static double grid_sup_abs(const Eigen::VectorXd& c, int n = 2001) {
  double sup = 0.0;
  for (int i = 0; i < n; ++i)
    sup = std::max(sup, std::abs(poly_eval(c, static_cast<double>(i) / (n - 1))));
  return sup;
}

static double grid_holder_quotient(const Eigen::VectorXd& c, double rho, int n = 1001) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = poly_eval(c, static_cast<double>(i) / (n - 1));
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      worst = std::max(worst,
                       std::abs(v[j] - v[i]) / std::pow(static_cast<double>(j - i) / (n - 1), rho));
  return worst;
}

BumpFamily make_bump_family(int r, double rho, double eps1) {
  if (r < 0 || r > 10 || !(rho > 0.0 && rho <= 1.0))
    throw std::domain_error("make_bump_family: bad smoothness parameters");
  if (!(eps1 > 0.0 && eps1 <= 1.0 / 16.0))
    throw std::domain_error("make_bump_family: eps1 must be in (0, 1/16]");

  BumpFamily fam;
  fam.r = r;
  fam.rho = rho;
  fam.eps1 = eps1;
  fam.profile = bump_profile_coeffs(r);
  fam.profile_max = std::pow(4.0, -(r + 1.0));
  fam.profile_mass = poly_eval(poly_antiderivative(fam.profile), 1.0);

  double smooth = r + rho;
  // slot count tuned so the bump amplitude stays <= 1/3 for any admissible eps1
  double cn = (4.0 / 3.0) * fam.profile_mass / fam.profile_max;
  fam.n = std::max(1, static_cast<int>(std::floor(cn * std::pow(eps1, -1.0 / smooth))));
  if (fam.n > 2'000'000) throw std::domain_error("make_bump_family: slot count above 2e6");
  fam.slot = 0.25 / fam.n;
  fam.width = fam.slot;
  fam.mass = std::pow(eps1, 1.0 + 1.0 / smooth);
  double unit = fam.mass / (fam.width * fam.profile_mass);  // scale A of one bump
  fam.amplitude = unit * fam.profile_max;
  if (!(fam.amplitude <= 1.0 / 3.0 + 1e-12))
    throw std::domain_error("make_bump_family: amplitude exceeds 1/3");

  std::vector<Eigen::VectorXd> deriv(r + 2);
  deriv[0] = fam.profile;
  for (int j = 1; j <= r + 1; ++j) deriv[j] = poly_derivative(deriv[j - 1]);
  HolderParams p;
  p.r = r;
  p.rho = rho;
  double sup = 1.0 + fam.amplitude;
  for (int j = 1; j <= r; ++j)
    sup = std::max(sup, unit * std::pow(fam.width, -j) * grid_sup_abs(deriv[j]) * 1.02);
  p.D = sup;
  // within-slot quotient times 2 covers pairs straddling slot or mirror edges
  p.H = 2.0 * unit * grid_holder_quotient(deriv[r], rho) * std::pow(fam.width, -smooth) * 1.02;
  p.gamma = 2.0 / 3.0;
  p.validate();
  fam.params = p;
  return fam;
}

Density make_adversarial_density(const BumpFamily& fam, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != fam.n)
    throw std::domain_error("make_adversarial_density: coefficient count must equal slot count");
  for (double v : x)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::domain_error("make_adversarial_density: coefficients must be in [0,1]");

  auto deriv = std::make_shared<std::vector<Eigen::VectorXd>>();
  deriv->push_back(fam.profile);
  for (int j = 1; j <= fam.r; ++j) deriv->push_back(poly_derivative(deriv->back()));
  Eigen::VectorXd anti = poly_antiderivative(fam.profile);
  auto coef = std::make_shared<std::vector<double>>(x);

  double s = fam.slot, w = fam.width;
  double unit = fam.mass / (fam.width * fam.profile_mass);
  int n = fam.n;

  auto eval = [deriv, coef, s, w, unit, n](double x0, int order) {
    double base = order == 0 ? 1.0 : 0.0;
    double sign, u;
    if (x0 < 0.25) {
      sign = 1.0;
      u = x0;
    } else if (x0 > 0.75) {
      sign = -1.0;
      u = x0 - 0.75;
    } else {
      return base;
    }
    int i = std::min(static_cast<int>(u / s), n - 1);
    double c = (*coef)[i];
    if (c == 0.0) return base;
    double t = std::clamp((u - i * s) / w, 0.0, 1.0);
    return base + sign * c * unit * std::pow(w, -order) * poly_eval((*deriv)[order], t);
  };

  auto cdf = [anti, coef, s, w, unit, n](double x0) {
    auto bump_mass = [&](double offset) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        double c = (*coef)[i];
        double t = std::clamp((x0 - offset - i * s) / w, 0.0, 1.0);
        if (t <= 0.0) break;  // later slots start even further right
        total += c * unit * w * poly_eval(anti, t);
      }
      return total;
    };
    return x0 + bump_mass(0.0) - bump_mass(0.75);
  };

  return Density("adversarial", fam.params, eval, cdf);
}

double check_median_identity(const BumpFamily& fam, const std::vector<double>& x, double xi_ref) {
  double total = 0.0;
  for (double v : x) total += v;
  return std::abs(total - (0.5 - xi_ref) / fam.mass);
}

HardnessProbeReport hardness_probe(Setting setting, int r, double rho, double eps, int trials,
                                   std::uint64_t seed) {
  if (trials < 1) throw std::domain_error("hardness_probe: trials must be >= 1");
  if (!(eps > 0.0 && eps < 0.5))
    throw std::domain_error("hardness_probe: eps must be in (0,1/2)");
  double smooth = r + rho;
  double eps1 = 0.0;
  switch (setting) {
    case Setting::deterministic: eps1 = 4.0 * eps; break;
    case Setting::randomized: eps1 = std::pow(eps, smooth / (smooth + 0.5)); break;
    case Setting::quantum: eps1 = std::pow(eps, smooth / (smooth + 1.0)); break;
  }
  eps1 = std::min(eps1, 1.0 / 16.0);
  BumpFamily fam = make_bump_family(r, rho, eps1);

  HardnessProbeReport rep;
  rep.setting = setting;
  rep.r = r;
  rep.rho = rho;
  rep.eps = eps;
  rep.eps1 = eps1;
  rep.n_bits = fam.n;
  rep.mass = fam.mass;
  rep.trials = trials;

  double acc_med = 0.0, acc_rec = 0.0, acc_q = 0.0;
  for (int t = 0; t < trials; ++t) {
    auto rng = make_engine(mix_seed(seed, t));
    std::vector<double> x(fam.n);
    std::bernoulli_distribution coin(0.5);
    double total = 0.0;
    for (auto& v : x) {
      v = coin(rng) ? 1.0 : 0.0;
      total += v;
    }
    Density d = make_adversarial_density(fam, x);
    MedianResult m =
        median_bisection(d, eps, setting, Criterion::residual, mix_seed(seed, 1000003 + t));
    double median = 0.5 - fam.mass * total;
    double recovered = (0.5 - m.xhat) / (fam.n * fam.mass);
    acc_med += std::abs(m.xhat - median);
    acc_rec += std::abs(recovered - total / fam.n);
    acc_q += static_cast<double>(m.trace.total_queries);
  }
  rep.mean_median_error = acc_med / trials;
  rep.mean_recovery_error = acc_rec / trials;
  rep.mean_queries = acc_q / trials;
  return rep;
}

}  // namespace medlab
