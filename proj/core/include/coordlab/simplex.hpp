#pragma once

// Self-contained dense two-phase simplex for small LPs in standard form:
//   minimize c'x  subject to  A x = b,  x >= 0.
// Bland's rule throughout, so it cannot cycle. Intended for desk-scale
// problems (tens of variables); no factorization or sparsity.

#include <cstddef>
#include <vector>

namespace coordlab {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kIterationLimit;
  double objective = 0.0;
  std::vector<double> x;
};

// A is row-major, num_rows x num_cols. b may have any sign.
LpResult solve_lp(const std::vector<double>& a, const std::vector<double>& b,
                  const std::vector<double>& c, std::size_t num_rows,
                  std::size_t num_cols, std::size_t max_iters = 100000);

}  // namespace coordlab
