#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "medlab/holder.hpp"
#include "medlab/median.hpp"

namespace medlab {

// Family of sign-selectable bump pairs: bump i adds x_i * mass over slot i of
// [0,1/4] and removes the same amount from the mirrored slot of [3/4,1], so
// the median moves by mass * sum(x) while the class constants stay fixed.
struct BumpFamily {
  int r = 1;
  double rho = 1.0;
  double eps1 = 0.0;        // resolution the family is calibrated to
  int n = 0;                // number of slots / selectable bits
  double slot = 0.0;        // slot width 1/(4n)
  double width = 0.0;       // bump support width (fills the slot)
  double mass = 0.0;        // integral of one bump
  double amplitude = 0.0;   // sup of one bump, kept <= 1/3
  Eigen::VectorXd profile;  // psi(t) = t^(r+1) (1-t)^(r+1)
  double profile_max = 0.0;
  double profile_mass = 0.0;
  HolderParams params;      // class every member of the family lies in
};

BumpFamily make_bump_family(int r, double rho, double eps1);

// Member selected by coefficients x in [0,1]^n.
Density make_adversarial_density(const BumpFamily& fam, const std::vector<double>& x);

// |sum(x) - (1/2 - xi_ref)/mass| for a reference median xi_ref.
double check_median_identity(const BumpFamily& fam, const std::vector<double>& x, double xi_ref);

struct HardnessProbeReport {
  Setting setting = Setting::deterministic;
  int r = 1;
  double rho = 1.0;
  double eps = 0.0;   // accuracy the median solver is run at
  double eps1 = 0.0;  // family resolution matched to the setting's exponent
  int n_bits = 0;
  double mass = 0.0;
  int trials = 0;
  double mean_median_error = 0.0;    // |xhat - median| averaged over trials
  double mean_recovery_error = 0.0;  // |recovered bit mean - true bit mean|
  double mean_queries = 0.0;
};

// Runs the median solver against random members of the family calibrated so
// that recovering the hidden bit mean needs the setting's full query budget.
HardnessProbeReport hardness_probe(Setting setting, int r, double rho, double eps, int trials,
                                   std::uint64_t seed);

}  // namespace medlab
