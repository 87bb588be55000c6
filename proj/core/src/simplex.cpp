#include "coordlab/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace coordlab {

namespace {

constexpr double kPivotEps = 1e-11;

// Tableau with rows 0..m-1 the constraints and row m the objective (reduced
// costs); column layout: structural+slack-free columns 0..n-1, RHS last.
struct Tableau {
  std::size_t m, n;
  std::vector<double> t;  // (m+1) x (n+1)
  std::vector<std::size_t> basis;

  double& at(std::size_t r, std::size_t c) { return t[r * (n + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return t[r * (n + 1) + c]; }

  void pivot(std::size_t pr, std::size_t pc) {
    double piv = at(pr, pc);
    for (std::size_t c = 0; c <= n; ++c) at(pr, c) /= piv;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == pr) continue;
      double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= n; ++c) at(r, c) -= f * at(pr, c);
    }
    basis[pr] = pc;
  }

  // Bland: entering = lowest-index column with negative reduced cost.
  bool iterate(std::size_t max_iters, std::size_t* used) {
    for (std::size_t it = 0; it < max_iters; ++it) {
      std::size_t pc = n;
      for (std::size_t c = 0; c < n; ++c) {
        if (at(m, c) < -kPivotEps) { pc = c; break; }
      }
      if (pc == n) { *used = it; return true; }  // optimal
      std::size_t pr = m;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m; ++r) {
        double a = at(r, pc);
        if (a > kPivotEps) {
          double ratio = at(r, n) / a;
          if (ratio < best_ratio - kPivotEps ||
              (ratio < best_ratio + kPivotEps && (pr == m || basis[r] < basis[pr]))) {
            best_ratio = ratio;
            pr = r;
          }
        }
      }
      if (pr == m) { *used = it; return false; }  // unbounded
      pivot(pr, pc);
    }
    *used = max_iters;
    throw std::runtime_error("simplex: iteration limit");
  }
};

}  // namespace

LpResult solve_lp(const std::vector<double>& a, const std::vector<double>& b,
                  const std::vector<double>& c, std::size_t num_rows,
                  std::size_t num_cols, std::size_t max_iters) {
  if (a.size() != num_rows * num_cols || b.size() != num_rows ||
      c.size() != num_cols) {
    throw std::invalid_argument("solve_lp: shape mismatch");
  }
  const std::size_t m = num_rows;
  const std::size_t n = num_cols + num_rows;  // structural + artificial

  Tableau tb;
  tb.m = m;
  tb.n = n;
  tb.t.assign((m + 1) * (n + 1), 0.0);
  tb.basis.resize(m);

  for (std::size_t r = 0; r < m; ++r) {
    double sign = b[r] < 0.0 ? -1.0 : 1.0;
    for (std::size_t cc = 0; cc < num_cols; ++cc) {
      tb.at(r, cc) = sign * a[r * num_cols + cc];
    }
    tb.at(r, num_cols + r) = 1.0;  // artificial
    tb.at(r, n) = sign * b[r];
    tb.basis[r] = num_cols + r;
  }
  // Phase 1 objective: minimize sum of artificials.
  for (std::size_t cc = 0; cc < num_cols; ++cc) {
    double s = 0.0;
    for (std::size_t r = 0; r < m; ++r) s += tb.at(r, cc);
    tb.at(m, cc) = -s;
  }
  {
    double s = 0.0;
    for (std::size_t r = 0; r < m; ++r) s += tb.at(r, n);
    tb.at(m, n) = -s;
  }

  LpResult res;
  std::size_t used = 0;
  try {
    if (!tb.iterate(max_iters, &used)) {
      res.status = LpStatus::kUnbounded;  // phase 1 cannot be unbounded in exact arithmetic
      return res;
    }
  } catch (const std::runtime_error&) {
    res.status = LpStatus::kIterationLimit;
    return res;
  }
  if (tb.at(m, n) < -1e-7) {
    res.status = LpStatus::kInfeasible;
    return res;
  }
  // Drive remaining artificials out of the basis where possible.
  for (std::size_t r = 0; r < m; ++r) {
    if (tb.basis[r] >= num_cols) {
      std::size_t pc = num_cols;
      for (std::size_t cc = 0; cc < num_cols; ++cc) {
        if (std::abs(tb.at(r, cc)) > 1e-8) { pc = cc; break; }
      }
      if (pc < num_cols) tb.pivot(r, pc);
      // else the row is redundant; its artificial stays basic at zero
    }
  }

  // Phase 2 objective.
  for (std::size_t cc = 0; cc <= n; ++cc) tb.at(m, cc) = 0.0;
  for (std::size_t cc = 0; cc < num_cols; ++cc) tb.at(m, cc) = c[cc];
  // Large cost keeps leftover degenerate artificials at zero.
  double big = 1.0;
  for (double x : c) big += std::abs(x);
  for (std::size_t r = 0; r < m; ++r) tb.at(m, num_cols + r) = 1e6 * big;
  // Make reduced costs of basic columns zero.
  for (std::size_t r = 0; r < m; ++r) {
    double f = tb.at(m, tb.basis[r]);
    if (f == 0.0) continue;
    for (std::size_t cc = 0; cc <= n; ++cc) tb.at(m, cc) -= f * tb.at(r, cc);
  }

  try {
    if (!tb.iterate(max_iters, &used)) {
      res.status = LpStatus::kUnbounded;
      return res;
    }
  } catch (const std::runtime_error&) {
    res.status = LpStatus::kIterationLimit;
    return res;
  }

  res.status = LpStatus::kOptimal;
  res.x.assign(num_cols, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    if (tb.basis[r] < num_cols) res.x[tb.basis[r]] = tb.at(r, n);
  }
  res.objective = 0.0;
  for (std::size_t cc = 0; cc < num_cols; ++cc) res.objective += c[cc] * res.x[cc];
  return res;
}

}  // namespace coordlab
