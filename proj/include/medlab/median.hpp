#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "medlab/holder.hpp"

namespace medlab {

enum class Setting { deterministic, randomized, quantum };
enum class Criterion { residual, absolute };

Setting parse_setting(const std::string& s);
Criterion parse_criterion(const std::string& s);
std::string to_string(Setting s);
std::string to_string(Criterion c);

// Smallest i with 2^-i <= eps, by exact halving.
int bisection_iteration_cap(double eps);

// Per-iteration failure budget: the union bound over the iteration cap keeps
// the whole run above success probability 1 - eps^2 (randomized) or 3/4
// (quantum). k > 1 splits the budget across simultaneous quantile targets.
// Deterministic evaluations cannot fail, hence nullopt.
std::optional<double> delta_budget(Setting s, double eps, int k = 1);

enum class StopReason { residual_small, max_iters };
std::string to_string(StopReason sr);

struct BisectionTrace {
  std::vector<double> points;                    // midpoints probed, in order
  std::vector<std::array<double, 2>> intervals;  // bracket before each probe
  std::vector<double> g_values;                  // estimated F(x) - alpha
  std::array<double, 2> final_interval{0.0, 1.0};
  StopReason stop_reason = StopReason::max_iters;
  int iterations = 0;
  std::uint64_t classical_queries = 0;
  std::uint64_t quantum_queries = 0;
  std::uint64_t total_queries = 0;
};

struct BisectOptions {
  double target = 0.5;                   // quantile level alpha
  bool incremental = false;              // deterministic only: reuse the CDF prefix
  std::optional<double> delta_override;  // per-iteration failure budget
};

struct MedianResult {
  double xhat = 0.0;
  double target = 0.5;
  double eps = 0.0;
  Setting setting = Setting::deterministic;
  Criterion criterion = Criterion::residual;
  BisectionTrace trace;
};

// Bisection on G(x) = F(x) - alpha with per-iteration estimates of accuracy
// eps; stops early once |G| <= eps, else after the iteration cap. The
// returned point then satisfies |F(xhat) - alpha| <= max(2, D) eps under the
// residual criterion, and |xhat - quantile| <= max(1, 2/gamma) eps under the
// absolute one (high probability in the non-deterministic settings).
MedianResult median_bisection(const Density& d, double eps, Setting setting, Criterion criterion,
                              std::uint64_t seed, const BisectOptions& opt = {});

}  // namespace medlab
