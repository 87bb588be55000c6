#pragma once

// Minimal compression rates on the boundaries of the remote region and the
// direct region, plus Wyner common information, via multi-start penalized
// first-order optimization, with a brute-force grid oracle for desk-scale
// validation.

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "coordlab/feasibility.hpp"
#include "coordlab/prob.hpp"

namespace coordlab {

struct SolverOptions {
  int starts = 32;
  std::uint64_t seed = 0;
  double marginal_tol = 1e-4;
  int max_outer = 18;
  int max_inner = 400;
  double penalty0 = 10.0;
  int threads = 1;  // multi-start parallelism; result is schedule-independent
};

struct RatePoint {
  double r = 0.0;
  double rc = 0.0;
};

enum class RegionKind { kRcs, kDcs };

struct RegionWitness {
  JointTable joint;  // (X, Z, W, Y)
  double i_zw = 0.0;
  double i_xyw = 0.0;
  double i_zyw = 0.0;
  double marginal_residual = 0.0;
};

struct NonConvergence : std::runtime_error {
  double best_residual;
  NonConvergence(const std::string& msg, double residual)
      : std::runtime_error(msg), best_residual(residual) {}
};

// min over p in D^(r.c.s.) of max(I(Z;W), I(X,Y;W) - rc), the minimal R such
// that (R, rc) lies in the remote region. |W| = |Y||Z| + 1.
std::pair<double, RegionWitness> min_rate_rcs(const JointTable& q_xz,
                                              const JointTable& q_xy, double rc,
                                              const SolverOptions& opts = {});

// min over p in D^(d.c.s.)(q_xzy) of max(I(Z;W), I(Z,Y;W) - rc).
// q_xzy must satisfy Markov X - Z - Y within 1e-8.
std::pair<double, RegionWitness> min_rate_dcs(const JointTable& q_xzy, double rc,
                                              const SolverOptions& opts = {});

// C(Z,Y) = min_{W: Z-W-Y} I(Z,Y;W); equals min_rate_dcs at rc = 0.
double wyner_common_information(const JointTable& q_zy,
                                const SolverOptions& opts = {});

// Minimizes min_rate_dcs over the compatibility polytope: all vertices plus
// local refinement over convex combinations of them.
std::tuple<double, Channel, RegionWitness> min_rate_dcs_over_compatible(
    const JointTable& q_xz, const JointTable& q_xy, double rc,
    const SolverOptions& opts = {});

struct BoundaryRow {
  double rc;
  double r_rcs;
  double r_dcs;
  double residual_rcs;
  double residual_dcs;
};

std::vector<BoundaryRow> region_boundary(const JointTable& q_xz,
                                         const JointTable& q_xy,
                                         const std::vector<double>& rc_grid,
                                         const SolverOptions& opts = {});

bool check_in_region(const RegionWitness& witness, const RatePoint& point,
                     RegionKind kind, double tol = 1e-9);

// Exhaustive grid over the channel parameters of p_{W|Z} and p_{Y|W} for
// binary X, Z, Y; keeps candidates with tv(p_XY, q_XY) <= step/2 (widening
// toward 2*step only if grid rounding leaves the band empty) and charges each
// candidate a (2/ln 2)*tv displacement allowance. An over/under-estimate
// band, not a certified optimum; least reliable when the marginals of the
// target are strongly skewed.
double grid_oracle_min_rate(const JointTable& q_xz, const JointTable& q_xy,
                            double rc, std::size_t w_size, double step);

namespace detail {

// Penalized objective used by the solvers, exposed for gradient checks.
// Parameter vector = row-major logits; channels are normalized-exponential
// per row. Returns the objective and fills `grad` (same length as x).
class RcsObjective {
 public:
  RcsObjective(const JointTable& q_xz, const JointTable& q_xy, double rc,
               std::size_t w_size);
  std::size_t dim() const;
  double eval(const std::vector<double>& x, std::vector<double>* grad,
              double penalty_weight) const;
  // Decoded channels (p_{W|Z}, p_{Y|W}) from a parameter vector.
  std::pair<Channel, Channel> decode(const std::vector<double>& x) const;
  // p_XY - q_XY at x, flattened.
  std::vector<double> constraint(const std::vector<double>& x) const;

  std::size_t nx, nz, ny, nw;
  double rc;
  std::vector<double> qxz;  // nx*nz
  std::vector<double> qxy;  // nx*ny
  std::vector<double> qz;   // nz
  // multiplier estimates for the marginal equalities (augmented-Lagrangian
  // shift on top of the quadratic penalty); empty means all-zero
  std::vector<double> lam;
};

class DcsObjective {
 public:
  DcsObjective(const JointTable& q_zy, double rc, std::size_t w_size);
  std::size_t dim() const;
  double eval(const std::vector<double>& x, std::vector<double>* grad,
              double penalty_weight) const;
  // Decoded (p_W, p_{Z|W}, p_{Y|W}).
  std::tuple<Pmf, Channel, Channel> decode(const std::vector<double>& x) const;
  // p_ZY - q_ZY at x, flattened.
  std::vector<double> constraint(const std::vector<double>& x) const;

  std::size_t nz, ny, nw;
  double rc;
  std::vector<double> qzy;  // nz*ny
  std::vector<double> lam;  // multiplier estimates, empty = all-zero
};

}  // namespace detail

}  // namespace coordlab
