#include "medlab/median.hpp"

#include <cmath>
#include <stdexcept>

#include "medlab/errors.hpp"
#include "medlab/monte_carlo.hpp"
#include "medlab/quadrature.hpp"
#include "medlab/quantum.hpp"
#include "medlab/rng.hpp"

namespace medlab {

Setting parse_setting(const std::string& s) {
  if (s == "det" || s == "deterministic") return Setting::deterministic;
  if (s == "rand" || s == "randomized") return Setting::randomized;
  if (s == "quant" || s == "quantum") return Setting::quantum;
  throw config_error("unknown setting '" + s + "'");
}

Criterion parse_criterion(const std::string& s) {
  if (s == "res" || s == "residual") return Criterion::residual;
  if (s == "abs" || s == "absolute") return Criterion::absolute;
  throw config_error("unknown criterion '" + s + "'");
}

std::string to_string(Setting s) {
  switch (s) {
    case Setting::deterministic: return "deterministic";
    case Setting::randomized: return "randomized";
    case Setting::quantum: return "quantum";
  }
  return "?";
}

std::string to_string(Criterion c) {
  return c == Criterion::residual ? "residual" : "absolute";
}

std::string to_string(StopReason sr) {
  return sr == StopReason::residual_small ? "residual_small" : "max_iters";
}

int bisection_iteration_cap(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("bisection_iteration_cap: eps must be in (0,1)");
  int i = 0;
  double w = 1.0;
  while (w > eps) {
    w *= 0.5;
    ++i;
  }
  return i;
}

std::optional<double> delta_budget(Setting s, double eps, int k) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::domain_error("delta_budget: eps must be in (0,1/2)");
  if (k < 1) throw std::domain_error("delta_budget: k must be >= 1");
  double cap = static_cast<double>(bisection_iteration_cap(eps));
  switch (s) {
    case Setting::deterministic: return std::nullopt;
    case Setting::randomized: return eps * eps / cap / k;
    case Setting::quantum: return 1.0 / (4.0 * cap) / k;
  }
  return std::nullopt;
}

MedianResult median_bisection(const Density& d, double eps, Setting setting, Criterion criterion,
                              std::uint64_t seed, const BisectOptions& opt) {
  const HolderParams& p = d.params();
  if (!(eps > 0.0 && eps < 0.5))
    throw std::domain_error("median_bisection: eps must be in (0,1/2)");
  double alpha = opt.target;
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::domain_error("median_bisection: target must be in [0,1]");
  if (criterion == Criterion::absolute && !(p.gamma > 0.0))
    throw std::domain_error("median_bisection: absolute criterion needs gamma > 0");
  if (opt.incremental && setting != Setting::deterministic)
    throw std::domain_error("median_bisection: incremental mode is deterministic-only");

  MedianResult res;
  res.target = alpha;
  res.eps = eps;
  res.setting = setting;
  res.criterion = criterion;
  if (alpha == 0.0 || alpha == 1.0) {  // F(0) = 0 and F(1) = 1 hold exactly
    res.xhat = alpha;
    res.trace.final_interval = {alpha, alpha};
    res.trace.stop_reason = StopReason::residual_small;
    return res;
  }

  int cap = bisection_iteration_cap(eps);
  double delta = 0.0;
  if (setting != Setting::deterministic) {
    auto budget = opt.delta_override ? opt.delta_override : delta_budget(setting, eps);
    delta = *budget;
    if (!(delta > 0.0 && delta < 1.0))
      throw std::domain_error("median_bisection: failure budget outside (0,1)");
  }

  std::uint64_t before = d.queries();
  auto rng = make_engine(seed);
  QuerySimState qs{0, make_engine(mix_seed(seed, 0x7134))};

  double lo = 0.0, hi = 1.0;
  double prefix = 0.0, prefix_at = 0.0;  // incremental mode: CDF estimate at prefix_at
  double seg_eps = eps / cap;
  double x = 0.5;
  for (int i = 1; i <= cap; ++i) {
    x = 0.5 * (lo + hi);
    res.trace.intervals.push_back({lo, hi});
    res.trace.points.push_back(x);
    double fhat = 0.0;
    switch (setting) {
      case Setting::deterministic:
        fhat = opt.incremental
                   ? prefix + integrate_det(d, prefix_at, x, det_budget(seg_eps, p, x - prefix_at)).value
                   : integrate_det(d, 0.0, x, det_budget(eps, p, x)).value;
        break;
      case Setting::randomized:
        fhat = integrate_mc(d, 0.0, x, eps, delta, rng).value;
        break;
      case Setting::quantum:
        fhat = integrate_quantum(d, 0.0, x, eps, delta, qs).value;
        break;
    }
    double g = fhat - alpha;
    res.trace.g_values.push_back(g);
    res.trace.iterations = i;
    if (std::abs(g) <= eps) {
      res.trace.stop_reason = StopReason::residual_small;
      break;
    }
    if (g >= 0.0) {
      hi = x;
    } else {
      if (opt.incremental) {
        prefix = fhat;
        prefix_at = x;
      }
      lo = x;
    }
  }
  res.xhat = x;
  res.trace.final_interval = {lo, hi};
  res.trace.classical_queries = d.queries() - before;
  res.trace.quantum_queries = qs.queries_used;
  res.trace.total_queries = res.trace.classical_queries + res.trace.quantum_queries;
  return res;
}

}  // namespace medlab
