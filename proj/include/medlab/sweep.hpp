#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "medlab/median.hpp"

namespace medlab {

struct SweepConfig {
  std::vector<Setting> settings{Setting::deterministic, Setting::randomized, Setting::quantum};
  std::vector<Criterion> criteria{Criterion::residual};
  std::vector<std::string> densities{"uniform", "sine-0.5", "sine-0.25", "poly-3", "kink-0.5"};
  int r = 1;
  double rho = 1.0;
  std::optional<double> D, H, gamma;  // override the catalog's class constants
  std::vector<int> eps_pows{4, 5, 6, 7, 8, 9, 10, 11, 12};  // eps = 2^-pow
  int trials_det = 1;
  int trials_rand = 200;
  int trials_quant = 200;
  std::uint64_t base_seed = 1;
  int threads = 0;              // 0 picks hardware concurrency
  std::string timing = "none";  // "none" keeps wall_time at an exact 0 for stable bytes

  void validate() const;
};

// Flat key=value lines, '#' comments; unknown keys are config errors.
SweepConfig parse_sweep_config(std::istream& in);
SweepConfig parse_sweep_config_file(const std::string& path);

struct SweepRecord {
  std::string setting;
  std::string criterion;
  std::string density;
  int r = 1;
  double rho = 1.0, D = 0.0, H = 0.0, gamma = 0.0, eps = 0.0;
  std::uint64_t seed = 0, queries = 0;
  double achieved_error_abs = 0.0, achieved_error_res = 0.0;
  int success = 1;
  double wall_time = 0.0;
};

// Median runs over the full cartesian grid; record order and seeds depend
// only on the config, never on thread scheduling.
std::vector<SweepRecord> run_sweep(const SweepConfig& cfg);

void write_sweep_csv(const std::vector<SweepRecord>& recs, std::ostream& os);
std::string sweep_csv(const std::vector<SweepRecord>& recs);
std::vector<SweepRecord> read_sweep_csv(std::istream& in);

struct FitResult {
  std::string setting;
  double exponent_hat = 0.0;
  double constant_hat = 0.0;
  double r_squared = 0.0;
  double theory_exponent = 0.0;
  std::string log_correction;
  int points = 0;
};

// Least squares of log2(mean queries / correction) against log2(1/eps);
// needs at least 5 distinct eps spanning a factor of 2^8.
FitResult fit_exponent(const std::vector<SweepRecord>& recs, Setting s, int r, double rho);

std::string fits_json(const std::vector<FitResult>& fits);

// Writes sweep.csv, fits.json and one plot_<setting>.svg per fit into dir.
void emit_sweep_outputs(const std::vector<SweepRecord>& recs, const std::vector<FitResult>& fits,
                        const std::string& dir);

}  // namespace medlab
