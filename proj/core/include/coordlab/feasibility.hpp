#pragma once

// Feasibility of a (q_XZ, q_XY) pair: existence of a channel q_{Y|Z} whose
// composition with q_XZ reproduces the target q_XY, plus enumeration of the
// compatibility polytope's vertices.

#include <optional>
#include <stdexcept>
#include <vector>

#include "coordlab/prob.hpp"

namespace coordlab {

// Numerical failure of the LP machinery; distinct from "infeasible".
struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CompatibilityResult {
  bool feasible = false;
  // Declared feasible, but the LP optimum sits in the (1e-9, 1e-6] band.
  bool marginal = false;
  std::optional<Channel> witness_channel;
  double residual = 0.0;  // max absolute equality violation
};

// Solves the linear feasibility problem in q_{Y|Z}(y|z) >= 0, rows summing
// to 1, with |X||Y| equality constraints, by minimizing the max violation.
CompatibilityResult find_compatible_channel(const JointTable& q_xz,
                                            const JointTable& q_xy,
                                            double tol = 1e-9);

// q(x,z,y) = q_xz(x,z) * ch(y|z); Markov X - Z - Y by construction.
JointTable compatible_joint(const JointTable& q_xz, const Channel& ch);

struct PolytopeVertices {
  std::vector<Channel> vertices;
  bool capped = false;       // enumeration hit the subset cap
  std::size_t cap_limit = 0;
};

// Vertices of the compatibility polytope, by enumeration over
// active-constraint subsets. Exact for binary alphabets; best-effort capped
// beyond that.
PolytopeVertices compatible_polytope_vertices(const JointTable& q_xz,
                                              const JointTable& q_xy,
                                              double tol = 1e-9);

}  // namespace coordlab
