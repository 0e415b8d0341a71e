#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace medlab {

// Smoothness class constants for densities on [0,1]: r continuous
// derivatives, the r-th one rho-Hoelder with constant H, every derivative
// bounded by D, and (optionally) f >= gamma > 0 for the absolute-error
// criterion. gamma = 0 means no lower separation is claimed.
struct HolderParams {
  int r = 1;
  double rho = 1.0;
  double D = 2.0;
  double H = 10.0;
  double gamma = 0.5;

  void validate() const;  // throws std::domain_error on nonsense values
};

// A density together with its declared class constants and a query counter.
// Solvers gather information exclusively through eval_counted (value or
// derivative at a point, one query each). eval_uncounted exists for test
// oracles, membership verification and the quantum simulator's internal
// realization of measurement distributions; solvers must not use it.
//
// Copies share the underlying function and the counter; with_fresh_counter
// gives an isolated counter for a new trial. The counter is atomic so
// concurrent trials on shared densities stay well-defined.
class Density {
 public:
  using DerivFn = std::function<double(double x, int order)>;
  using CdfFn = std::function<double(double x)>;

  Density(std::string name, HolderParams params, DerivFn f, CdfFn reference_cdf = nullptr);

  const std::string& name() const { return name_; }
  const HolderParams& params() const { return params_; }

  double eval_counted(double x, int order) const;
  double eval_uncounted(double x, int order) const;

  std::uint64_t queries() const { return counter_->load(std::memory_order_relaxed); }
  Density with_fresh_counter() const;
  Density with_params(const HolderParams& p) const;  // re-declare class constants

  bool has_reference_cdf() const { return static_cast<bool>(cdf_); }
  // Exact-to-machine-precision CDF; testing/diagnostics only, never charged.
  double reference_cdf(double x) const;
  // Inverts the reference CDF by bisection to ~1e-15.
  double reference_quantile(double alpha) const;

 private:
  std::string name_;
  HolderParams params_;
  DerivFn f_;
  CdfFn cdf_;
  std::shared_ptr<std::atomic<std::uint64_t>> counter_;
};

struct MembershipReport {
  bool is_density = false;     // integrates to 1 and is nonnegative
  bool is_holder = false;      // derivative bounds and Hoelder quotient hold
  bool is_separated = false;   // f >= gamma on the grid
  double integral_error = 0.0;       // |integral - 1|
  double nonneg_violation = 0.0;     // max(0, -min f)
  double bound_violation = 0.0;      // max over j<=r of (sup|f^(j)| - D)+
  double holder_violation = 0.0;     // (sup quotient - H)+
  double separation_violation = 0.0; // (gamma - min f)+
  double max_violation = 0.0;

  bool all_pass() const { return is_density && is_holder && is_separated; }
};

// Grid-based class membership check: derivative bounds and Hoelder quotients
// over all grid pairs, nonnegativity and separation on the grid, and the
// unit integral via adaptive quadrature (independent of any reference CDF).
MembershipReport verify_membership(const Density& d, int grid_n = 4096, double tol = 1e-8);

// Built-in densities. Names: "uniform", "sine-<a>" (1 + a sin 2 pi x, |a|<1),
// "poly-<k>" (normalized (1+x)^k, integer k >= 0), "kink-<s>" (piecewise
// polynomial whose r-th derivative sits exactly at the Hoelder boundary,
// 0 < s < 1). Class constants are derived from the analytic form and are
// valid for the given (r, rho). Unknown names throw std::out_of_range.
Density builtin_catalog(const std::string& name, int r, double rho);
inline Density builtin_catalog(const std::string& name) { return builtin_catalog(name, 1, 1.0); }

// Representative set used by tests and the acceptance suite.
std::vector<std::string> catalog_names();

// Adaptive Simpson on an uncounted evaluator; the independent integral oracle
// behind verify_membership and the CDF cross-checks.
double adaptive_integral(const std::function<double(double)>& f, double a, double b,
                         double tol = 1e-12);

}  // namespace medlab
