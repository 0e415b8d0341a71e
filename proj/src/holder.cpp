#include "medlab/holder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "medlab/polynomial.hpp"

namespace medlab {

void HolderParams::validate() const {
  if (r < 0 || r > 10) throw std::domain_error("HolderParams: r must be in [0,10]");
  if (!(rho > 0.0) || rho > 1.0) throw std::domain_error("HolderParams: rho must be in (0,1]");
  if (!(D > 0.0) || !std::isfinite(D)) throw std::domain_error("HolderParams: D must be positive");
  if (!(H > 0.0) || !std::isfinite(H)) throw std::domain_error("HolderParams: H must be positive");
  if (gamma < 0.0 || gamma > D) throw std::domain_error("HolderParams: need 0 <= gamma <= D");
}

Density::Density(std::string name, HolderParams params, DerivFn f, CdfFn reference_cdf)
    : name_(std::move(name)),
      params_(params),
      f_(std::move(f)),
      cdf_(std::move(reference_cdf)),
      counter_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
  params_.validate();
  if (!f_) throw std::domain_error("Density: evaluator must not be empty");
}

static void check_eval_args(const HolderParams& p, double x, int order) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("Density::eval: x outside [0,1]");
  if (order < 0 || order > p.r) throw std::domain_error("Density::eval: derivative order above r");
}

double Density::eval_counted(double x, int order) const {
  check_eval_args(params_, x, order);
  counter_->fetch_add(1, std::memory_order_relaxed);
  return f_(x, order);
}

double Density::eval_uncounted(double x, int order) const {
  check_eval_args(params_, x, order);
  return f_(x, order);
}

Density Density::with_fresh_counter() const {
  Density d = *this;
  d.counter_ = std::make_shared<std::atomic<std::uint64_t>>(0);
  return d;
}

Density Density::with_params(const HolderParams& p) const {
  p.validate();
  Density d = *this;
  d.params_ = p;
  return d;
}

double Density::reference_cdf(double x) const {
  if (!cdf_) throw std::logic_error("Density: no reference CDF attached");
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("reference_cdf: x outside [0,1]");
  return cdf_(x);
}

double Density::reference_quantile(double alpha) const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error("reference_quantile: alpha outside [0,1]");
  if (alpha == 0.0) return 0.0;
  if (alpha == 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 120 && hi - lo > 1e-16; ++i) {
    double mid = 0.5 * (lo + hi);
    (reference_cdf(mid) >= alpha ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------- quadrature
// Plain adaptive Simpson, used as the integral oracle that is independent of
// the reference CDFs. Base panels keep narrow bumps from being skipped.

static double simpson_rec(const std::function<double(double)>& f, double a, double b,
                          double fa, double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_integral(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const int base = 128;
  double h = (b - a) / base, acc = 0.0;
  for (int k = 0; k < base; ++k) {
    double x0 = a + k * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
    double f0 = f(x0), fm = f(xm), f1 = f(x1);
    double whole = h / 6.0 * (f0 + 4.0 * fm + f1);
    acc += simpson_rec(f, x0, x1, f0, fm, f1, whole, tol / base, 38);
  }
  return acc;
}

// ---------------------------------------------------------- membership check

MembershipReport verify_membership(const Density& d, int grid_n, double tol) {
  if (grid_n < 8) throw std::domain_error("verify_membership: grid_n too small");
  const HolderParams& p = d.params();
  MembershipReport rep;

  std::vector<double> xs(grid_n);
  for (int i = 0; i < grid_n; ++i) xs[i] = static_cast<double>(i) / (grid_n - 1);

  std::vector<double> top(grid_n);  // r-th derivative, reused for the quotient scan
  double min_f = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= p.r; ++j) {
    double sup = 0.0;
    for (int i = 0; i < grid_n; ++i) {
      double v = d.eval_uncounted(xs[i], j);
      sup = std::max(sup, std::abs(v));
      if (j == 0) min_f = std::min(min_f, v);
      if (j == p.r) top[i] = v;
    }
    rep.bound_violation = std::max(rep.bound_violation, sup - p.D);
  }
  rep.nonneg_violation = std::max(0.0, -min_f);
  rep.separation_violation = std::max(0.0, p.gamma - min_f);

  double worst_q = 0.0;
  for (int i = 0; i < grid_n; ++i)
    for (int j = i + 1; j < grid_n; ++j) {
      double q = std::abs(top[j] - top[i]) / std::pow(xs[j] - xs[i], p.rho);
      worst_q = std::max(worst_q, q);
    }
  rep.holder_violation = std::max(0.0, worst_q - p.H);

  double integral = adaptive_integral([&](double x) { return d.eval_uncounted(x, 0); }, 0.0, 1.0);
  rep.integral_error = std::abs(integral - 1.0);

  rep.is_density = rep.integral_error <= tol && rep.nonneg_violation <= tol;
  rep.is_holder = std::max(rep.bound_violation, rep.holder_violation) <= tol;
  rep.is_separated = rep.separation_violation <= tol;
  rep.max_violation = std::max({rep.integral_error, rep.nonneg_violation, rep.bound_violation,
                                rep.holder_violation, rep.separation_violation});
  return rep;
}

// ----------------------------------------------------------------- catalog

// Oscillation/Lipschitz data of f^(r) transferred to a rho-Hoelder constant:
// |df| <= min(lip*s, osc) <= (lip*s)^rho * osc^(1-rho). pieces > 1 adds the
// 2^(1-rho) triangle factor for functions glued at knots.
static double holder_const(double osc, double lip, double rho, int pieces) {
  double h = (rho == 1.0) ? lip : std::pow(osc, 1.0 - rho) * std::pow(lip, rho);
  if (pieces > 1) h *= std::pow(2.0, 1.0 - rho);
  return std::max(h, 1.0);  // floor keeps H > 0 when f^(r) is constant
}

static Density make_uniform(int r, double rho) {
  HolderParams p{r, rho, 1.0, 1.0, 1.0};
  return Density("uniform", p,
                 [](double, int order) { return order == 0 ? 1.0 : 0.0; },
                 [](double x) { return x; });
}

static Density make_sine(double a, int r, double rho) {
  const double w = 2.0 * std::numbers::pi;
  double sup_deriv = std::abs(a) * std::pow(w, r);  // sup |f^(r)|, r >= 1
  HolderParams p;
  p.r = r;
  p.rho = rho;
  p.D = r == 0 ? 1.0 + std::abs(a) : std::max(1.0 + std::abs(a), sup_deriv);
  double osc = 2.0 * std::abs(a) * std::pow(w, r);
  double lip = std::abs(a) * std::pow(w, r + 1);
  p.H = holder_const(osc, lip, rho, 1);
  p.gamma = 1.0 - std::abs(a);
  char buf[64];
  std::snprintf(buf, sizeof buf, "sine-%g", a);
  return Density(buf, p,
                 [a, w](double x, int order) {
                   if (order == 0) return 1.0 + a * std::sin(w * x);
                   return a * std::pow(w, order) * std::sin(w * x + order * std::numbers::pi / 2.0);
                 },
                 [a, w](double x) { return x + a * (1.0 - std::cos(w * x)) / w; });
}

static double falling_factorial(int k, int j) {
  double v = 1.0;
  for (int i = 0; i < j; ++i) v *= static_cast<double>(k - i);
  return v;
}

static Density make_poly(int k, int r, double rho) {
  double c = static_cast<double>(k + 1) / (std::pow(2.0, k + 1) - 1.0);
  HolderParams p;
  p.r = r;
  p.rho = rho;
  double sup = 0.0;
  for (int j = 0; j <= std::min(r, k); ++j)
    sup = std::max(sup, c * falling_factorial(k, j) * std::pow(2.0, k - j));
  p.D = std::max(sup, c * std::pow(2.0, k));
  double sup_r = r <= k ? c * falling_factorial(k, r) * std::pow(2.0, k - r) : 0.0;
  double lip = r + 1 <= k ? c * falling_factorial(k, r + 1) * std::pow(2.0, k - r - 1) : 0.0;
  p.H = holder_const(2.0 * sup_r, lip, rho, 1);
  p.gamma = c;  // increasing on [0,1], minimum at 0
  return Density("poly-" + std::to_string(k), p,
                 [c, k](double x, int order) {
                   if (order > k) return 0.0;
                   return c * falling_factorial(k, order) * std::pow(1.0 + x, k - order);
                 },
                 [c, k](double x) { return c * (std::pow(1.0 + x, k + 1) - 1.0) / (k + 1); });
}

static double grid_sup_abs(const Eigen::VectorXd& c, int n = 4001) {
  double sup = 0.0;
  for (int i = 0; i < n; ++i)
    sup = std::max(sup, std::abs(poly_eval(c, static_cast<double>(i) / (n - 1))));
  return sup;
}

static Density make_kink(double s, int r, double rho) {
  Eigen::VectorXd psi = bump_profile_coeffs(r);
  double psi_max = std::pow(4.0, -(r + 1));
  double scale = s / psi_max;

  std::vector<Eigen::VectorXd> deriv(r + 2);
  deriv[0] = psi;
  for (int j = 1; j <= r + 1; ++j) deriv[j] = poly_derivative(deriv[j - 1]);
  Eigen::VectorXd anti = poly_antiderivative(psi);
  double full_mass = poly_eval(anti, 1.0);

  HolderParams p;
  p.r = r;
  p.rho = rho;
  double sup_d = 1.0 + s;
  for (int j = 1; j <= r; ++j)
    sup_d = std::max(sup_d, scale * std::pow(2.0, j) * grid_sup_abs(deriv[j]) * 1.02);
  p.D = sup_d;
  double osc = 2.0 * scale * std::pow(2.0, r) * grid_sup_abs(deriv[r]) * 1.02;
  double lip = scale * std::pow(2.0, r + 1) * grid_sup_abs(deriv[r + 1]) * 1.02;
  p.H = holder_const(osc, lip, rho, 2);
  p.gamma = 1.0 - s;

  char buf[64];
  std::snprintf(buf, sizeof buf, "kink-%g", s);
  auto eval = [scale, deriv](double x, int order) {
    double sign = x < 0.5 ? 1.0 : -1.0;
    double t = x < 0.5 ? 2.0 * x : 2.0 * x - 1.0;
    double base = order == 0 ? 1.0 : 0.0;
    return base + sign * scale * std::pow(2.0, order) * poly_eval(deriv[order], t);
  };
  auto cdf = [scale, anti, full_mass](double x) {
    if (x < 0.5) return x + 0.5 * scale * poly_eval(anti, 2.0 * x);
    return x + 0.5 * scale * (full_mass - poly_eval(anti, 2.0 * x - 1.0));
  };
  return Density(buf, p, eval, cdf);
}

Density builtin_catalog(const std::string& name, int r, double rho) {
  auto parse_tail = [&](const char* prefix) {
    return name.substr(std::string(prefix).size());
  };
  try {
    if (name == "uniform") return make_uniform(r, rho);
    if (name.rfind("sine-", 0) == 0) {
      double a = std::stod(parse_tail("sine-"));
      if (!(std::abs(a) < 1.0)) throw std::out_of_range("catalog: sine amplitude must satisfy |a| < 1");
      return make_sine(a, r, rho);
    }
    if (name.rfind("poly-", 0) == 0) {
      int k = std::stoi(parse_tail("poly-"));
      if (k < 0 || k > 12) throw std::out_of_range("catalog: poly degree must be in [0,12]");
      return make_poly(k, r, rho);
    }
    if (name.rfind("kink-", 0) == 0) {
      double s = std::stod(parse_tail("kink-"));
      if (!(s > 0.0 && s < 1.0)) throw std::out_of_range("catalog: kink size must be in (0,1)");
      return make_kink(s, r, rho);
    }
  } catch (const std::invalid_argument&) {
    throw std::out_of_range("catalog: malformed density name '" + name + "'");
  }
  throw std::out_of_range("catalog: unknown density '" + name + "'");
}

std::vector<std::string> catalog_names() {
  return {"uniform", "sine-0.5", "sine-0.25", "poly-3", "kink-0.5"};
}

}  // namespace medlab
