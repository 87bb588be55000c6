#pragma once

// Closed-form analytics for the doubly symmetric binary setting: DSBS
// constructors, the BSC-cascade auxiliary parameter, the common-information
// closed form, the closed-form gap lower bound between direct and remote
// synthesis at zero common randomness, and its grid tabulation.

#include <vector>

#include "coordlab/prob.hpp"
#include "coordlab/regions.hpp"

namespace coordlab {

// theta = q_{Z,Y}(Y != Z), tau = q_{X,Z}(X != Z); both in the open (0, 1/2),
// with tau < tau + (1-2 tau) theta (strict ordering of the disagreement
// probabilities).
struct GapInputs {
  double theta;
  double tau;

  GapInputs(double theta, double tau);
  // derived q_{X,Y}(X != Y)
  double xy_flip() const { return tau + (1.0 - 2.0 * tau) * theta; }
};

// 2x2 joint with off-diagonal mass theta/2 each; both marginals Ber(1/2).
JointTable dsbs_joint(double theta);

// Binary symmetric channel with crossover probability t.
Channel bsc(double t);

// 1/2 - (1/2) sqrt(1 - 2 theta); the crossover of the two identical BSCs
// whose cascade equals BSC(theta).
double wyner_theta_tilde(double theta);

// C(Z,Y) for DSBS(theta): 1 + h(theta) - 2 h(theta_tilde).
double dsbs_wyner_ci(double theta);

// h(theta) + h(1/2 - (1/2 - tau) sqrt(1-2 theta)) - h(theta_tilde)
//   - h(tau + (1-2 tau) theta), evaluated directly in four-entropy form.
double rcs_gap_lower_bound(const GapInputs& g);

// The explicit BSC-cascade witness: q_XZ = DSBS(tau), both channels
// BSC(theta_tilde).
RegionWitness case5_witness(const GapInputs& g);

struct GapGridRow {
  double theta;
  double tau;
  double gap_bits;
};

// Rows (theta, tau, gap) over a steps x steps grid of the two ranges.
std::vector<GapGridRow> figure4_grid(double theta_min, double theta_max,
                                     double tau_min, double tau_max,
                                     int steps);

}  // namespace coordlab
