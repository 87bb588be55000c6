#include "coordlab/dsbs.hpp"

#include <cmath>
#include <stdexcept>

namespace coordlab {

GapInputs::GapInputs(double theta_, double tau_) : theta(theta_), tau(tau_) {
  if (!(theta > 0.0 && theta < 0.5)) {
    throw std::domain_error("GapInputs: theta must lie in (0, 1/2)");
  }
  if (!(tau > 0.0 && tau < 0.5)) {
    throw std::domain_error("GapInputs: tau must lie in (0, 1/2)");
  }
  // 0 < q_{X,Z}(X!=Z) < q_{X,Y}(X!=Y) < 1/2 is automatic on the open square,
  // but guard anyway.
  double flip = xy_flip();
  if (!(tau < flip && flip < 0.5)) {
    throw std::domain_error("GapInputs: disagreement ordering violated");
  }
}

JointTable dsbs_joint(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw std::domain_error("dsbs_joint: theta outside [0,1]");
  }
  double diag = (1.0 - theta) / 2.0, off = theta / 2.0;
  return JointTable({2, 2}, {diag, off, off, diag});
}

Channel bsc(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::domain_error("bsc: crossover outside [0,1]");
  }
  return Channel(2, 2, {1.0 - t, t, t, 1.0 - t});
}

double wyner_theta_tilde(double theta) {
  if (!(theta >= 0.0 && theta <= 0.5)) {
    throw std::domain_error("wyner_theta_tilde: theta outside [0, 1/2]");
  }
  return 0.5 - 0.5 * std::sqrt(1.0 - 2.0 * theta);
}

double dsbs_wyner_ci(double theta) {
  if (!(theta > 0.0 && theta < 0.5)) {
    throw std::domain_error("dsbs_wyner_ci: theta outside (0, 1/2)");
  }
  return 1.0 + binary_entropy(theta) - 2.0 * binary_entropy(wyner_theta_tilde(theta));
}

double rcs_gap_lower_bound(const GapInputs& g) {
  double root = std::sqrt(1.0 - 2.0 * g.theta);
  double xw_flip = 0.5 - (0.5 - g.tau) * root;
  return binary_entropy(g.theta) + binary_entropy(xw_flip) -
         binary_entropy(wyner_theta_tilde(g.theta)) -
         binary_entropy(g.xy_flip());
}

RegionWitness case5_witness(const GapInputs& g) {
  Channel ch = bsc(wyner_theta_tilde(g.theta));
  JointTable joint = markov_chain_joint(dsbs_joint(g.tau), ch, ch);
  RegionWitness w{joint, 0, 0, 0, 0};
  std::size_t gz[] = {1}, gw[] = {2}, gxy[] = {0, 3}, gzy[] = {1, 3};
  w.i_zw = mutual_information(joint, gz, gw);
  w.i_xyw = mutual_information(joint, gxy, gw);
  w.i_zyw = mutual_information(joint, gzy, gw);
  std::size_t keep_xy[] = {0, 3};
  w.marginal_residual =
      tv_distance(marginalize(joint, keep_xy), dsbs_joint(g.xy_flip()));
  return w;
}

std::vector<GapGridRow> figure4_grid(double theta_min, double theta_max,
                                     double tau_min, double tau_max,
                                     int steps) {
  if (!(theta_min > 0.0 && theta_max < 0.5 && theta_min <= theta_max &&
        tau_min > 0.0 && tau_max < 0.5 && tau_min <= tau_max)) {
    throw std::domain_error("figure4_grid: ranges must lie inside (0, 1/2)");
  }
  if (steps < 1) throw std::domain_error("figure4_grid: steps must be >= 1");
  std::vector<GapGridRow> rows;
  rows.reserve(static_cast<std::size_t>(steps) * steps);
  for (int i = 0; i < steps; ++i) {
    double theta = steps == 1 ? theta_min
                              : theta_min + (theta_max - theta_min) * i / (steps - 1);
    for (int j = 0; j < steps; ++j) {
      double tau = steps == 1 ? tau_min
                              : tau_min + (tau_max - tau_min) * j / (steps - 1);
      rows.push_back({theta, tau, rcs_gap_lower_bound(GapInputs(theta, tau))});
    }
  }
  return rows;
}

}  // namespace coordlab
