#include "coordlab/feasibility.hpp"

#include <algorithm>
#include <cmath>

#include "coordlab/simplex.hpp"

namespace coordlab {

namespace {

struct Problem {
  std::size_t nx, nz, ny;
  std::vector<std::size_t> zs;      // z symbols with q_Z(z) > 0
  std::vector<double> qxz;          // nx x nz
  std::vector<double> qxy;          // nx x ny
};

Problem make_problem(const JointTable& q_xz, const JointTable& q_xy) {
  if (q_xz.num_axes() != 2 || q_xy.num_axes() != 2) {
    throw std::invalid_argument("feasibility: inputs must be 2-way joints");
  }
  if (q_xz.axis_size(0) != q_xy.axis_size(0)) {
    throw std::invalid_argument("feasibility: X-axis size mismatch");
  }
  Problem pb;
  pb.nx = q_xz.axis_size(0);
  pb.nz = q_xz.axis_size(1);
  pb.ny = q_xy.axis_size(1);
  pb.qxz = q_xz.probs();
  pb.qxy = q_xy.probs();
  for (std::size_t z = 0; z < pb.nz; ++z) {
    double mass = 0.0;
    for (std::size_t x = 0; x < pb.nx; ++x) mass += pb.qxz[x * pb.nz + z];
    if (mass > 0.0) pb.zs.push_back(z);
  }
  return pb;
}

// Max absolute violation of the marginal equalities for channel rows v over
// the supported z symbols (v is zs.size() x ny, row-major).
double max_violation(const Problem& pb, const std::vector<double>& v) {
  double worst = 0.0;
  for (std::size_t x = 0; x < pb.nx; ++x) {
    for (std::size_t y = 0; y < pb.ny; ++y) {
      double s = 0.0;
      for (std::size_t k = 0; k < pb.zs.size(); ++k) {
        s += pb.qxz[x * pb.nz + pb.zs[k]] * v[k * pb.ny + y];
      }
      worst = std::max(worst, std::abs(s - pb.qxy[x * pb.ny + y]));
    }
  }
  return worst;
}

Channel build_channel(const Problem& pb, const std::vector<double>& v) {
  std::vector<double> rows(pb.nz * pb.ny, 1.0 / static_cast<double>(pb.ny));
  for (std::size_t k = 0; k < pb.zs.size(); ++k) {
    double total = 0.0;
    for (std::size_t y = 0; y < pb.ny; ++y) total += std::max(0.0, v[k * pb.ny + y]);
    for (std::size_t y = 0; y < pb.ny; ++y) {
      rows[pb.zs[k] * pb.ny + y] =
          total > 0.0 ? std::max(0.0, v[k * pb.ny + y]) / total
                      : 1.0 / static_cast<double>(pb.ny);
    }
  }
  return Channel(pb.nz, pb.ny, std::move(rows));
}

// Unique solution of E u = f (r x c, r >= c) if it exists; Gaussian
// elimination with partial pivoting.
std::optional<std::vector<double>> solve_unique(std::vector<double> e,
                                                std::vector<double> f,
                                                std::size_t r, std::size_t c) {
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_col(c, r);
  for (std::size_t col = 0; col < c && rank < r; ++col) {
    std::size_t best = rank;
    for (std::size_t i = rank + 1; i < r; ++i) {
      if (std::abs(e[i * c + col]) > std::abs(e[best * c + col])) best = i;
    }
    if (std::abs(e[best * c + col]) < 1e-10) return std::nullopt;  // rank-deficient
    if (best != rank) {
      for (std::size_t j = 0; j < c; ++j) std::swap(e[best * c + j], e[rank * c + j]);
      std::swap(f[best], f[rank]);
    }
    double piv = e[rank * c + col];
    for (std::size_t i = 0; i < r; ++i) {
      if (i == rank) continue;
      double m = e[i * c + col] / piv;
      if (m == 0.0) continue;
      for (std::size_t j = col; j < c; ++j) e[i * c + j] -= m * e[rank * c + j];
      f[i] -= m * f[rank];
    }
    pivot_col[col] = rank;
    ++rank;
  }
  if (rank < c) return std::nullopt;
  // consistency of the remaining rows
  for (std::size_t i = rank; i < r; ++i) {
    if (std::abs(f[i]) > 1e-8) return std::nullopt;
  }
  std::vector<double> u(c);
  for (std::size_t col = 0; col < c; ++col) {
    std::size_t row = pivot_col[col];
    u[col] = f[row] / e[row * c + col];
  }
  return u;
}

std::size_t matrix_rank(std::vector<double> e, std::size_t r, std::size_t c) {
  std::size_t rank = 0;
  for (std::size_t col = 0; col < c && rank < r; ++col) {
    std::size_t best = rank;
    for (std::size_t i = rank + 1; i < r; ++i) {
      if (std::abs(e[i * c + col]) > std::abs(e[best * c + col])) best = i;
    }
    if (std::abs(e[best * c + col]) < 1e-10) continue;
    if (best != rank) {
      for (std::size_t j = 0; j < c; ++j) std::swap(e[best * c + j], e[rank * c + j]);
    }
    for (std::size_t i = rank + 1; i < r; ++i) {
      double m = e[i * c + col] / e[rank * c + col];
      if (m == 0.0) continue;
      for (std::size_t j = col; j < c; ++j) e[i * c + j] -= m * e[rank * c + j];
    }
    ++rank;
  }
  return rank;
}

// Equality system E v = f over the supported-row channel entries:
// row sums (one per supported z) then marginal constraints (nx*ny rows).
void build_equalities(const Problem& pb, std::vector<double>& e,
                      std::vector<double>& f, std::size_t& rows,
                      std::size_t& cols) {
  std::size_t ns = pb.zs.size();
  cols = ns * pb.ny;
  rows = ns + pb.nx * pb.ny;
  e.assign(rows * cols, 0.0);
  f.assign(rows, 0.0);
  for (std::size_t k = 0; k < ns; ++k) {
    for (std::size_t y = 0; y < pb.ny; ++y) e[k * cols + k * pb.ny + y] = 1.0;
    f[k] = 1.0;
  }
  for (std::size_t x = 0; x < pb.nx; ++x) {
    for (std::size_t y = 0; y < pb.ny; ++y) {
      std::size_t row = ns + x * pb.ny + y;
      for (std::size_t k = 0; k < ns; ++k) {
        e[row * cols + k * pb.ny + y] = pb.qxz[x * pb.nz + pb.zs[k]];
      }
      f[row] = pb.qxy[x * pb.ny + y];
    }
  }
}

}  // namespace

CompatibilityResult find_compatible_channel(const JointTable& q_xz,
                                            const JointTable& q_xy,
                                            double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("find_compatible_channel: tol must be > 0");
  Problem pb = make_problem(q_xz, q_xy);
  const std::size_t ns = pb.zs.size();
  const std::size_t nv = ns * pb.ny;
  const std::size_t neq = pb.nx * pb.ny;

  // LP variables: [v (nv), t (1), s1 (neq), s2 (neq)], all >= 0.
  // Row sums of v are exact; each marginal equality is |.| <= t.
  const std::size_t num_cols = nv + 1 + 2 * neq;
  const std::size_t num_rows = ns + 2 * neq;
  std::vector<double> a(num_rows * num_cols, 0.0);
  std::vector<double> b(num_rows, 0.0);
  std::vector<double> c(num_cols, 0.0);
  c[nv] = 1.0;  // minimize t

  for (std::size_t k = 0; k < ns; ++k) {
    for (std::size_t y = 0; y < pb.ny; ++y) a[k * num_cols + k * pb.ny + y] = 1.0;
    b[k] = 1.0;
  }
  for (std::size_t x = 0; x < pb.nx; ++x) {
    for (std::size_t y = 0; y < pb.ny; ++y) {
      std::size_t eq = x * pb.ny + y;
      double rhs = pb.qxy[x * pb.ny + y];
      std::size_t r1 = ns + 2 * eq, r2 = ns + 2 * eq + 1;
      for (std::size_t k = 0; k < ns; ++k) {
        double coef = pb.qxz[x * pb.nz + pb.zs[k]];
        a[r1 * num_cols + k * pb.ny + y] = coef;
        a[r2 * num_cols + k * pb.ny + y] = coef;
      }
      a[r1 * num_cols + nv] = -1.0;          // sum - t <= rhs
      a[r1 * num_cols + nv + 1 + eq] = 1.0;  // slack s1
      a[r2 * num_cols + nv] = 1.0;           // sum + t >= rhs
      a[r2 * num_cols + nv + 1 + neq + eq] = -1.0;  // surplus s2
      b[r1] = rhs;
      b[r2] = rhs;
    }
  }

  LpResult lp = solve_lp(a, b, c, num_rows, num_cols);
  if (lp.status != LpStatus::kOptimal) {
    throw SolverFailure("find_compatible_channel: LP did not reach optimality");
  }

  std::vector<double> v(lp.x.begin(), lp.x.begin() + nv);
  CompatibilityResult res;
  res.residual = max_violation(pb, v);
  if (res.residual <= tol) {
    res.feasible = true;
  } else if (res.residual <= 1e-6) {
    res.feasible = true;
    res.marginal = true;
  }
  if (res.feasible) res.witness_channel = build_channel(pb, v);
  return res;
}

JointTable compatible_joint(const JointTable& q_xz, const Channel& ch) {
  if (q_xz.num_axes() != 2) {
    throw std::invalid_argument("compatible_joint: q_xz must be 2-way");
  }
  std::size_t nx = q_xz.axis_size(0), nz = q_xz.axis_size(1);
  if (ch.in_size() != nz) {
    throw std::invalid_argument("compatible_joint: channel input size mismatch");
  }
  std::size_t ny = ch.out_size();
  std::vector<double> v(nx * nz * ny);
  std::size_t flat = 0;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t z = 0; z < nz; ++z)
      for (std::size_t y = 0; y < ny; ++y)
        v[flat++] = q_xz[x * nz + z] * ch(y, z);
  return JointTable({nx, nz, ny}, std::move(v));
}

PolytopeVertices compatible_polytope_vertices(const JointTable& q_xz,
                                              const JointTable& q_xy,
                                              double tol) {
  CompatibilityResult check = find_compatible_channel(q_xz, q_xy, tol);
  if (!check.feasible) {
    throw std::invalid_argument("compatible_polytope_vertices: infeasible pair");
  }
  Problem pb = make_problem(q_xz, q_xy);
  std::size_t rows = 0, cols = 0;
  std::vector<double> e, f;
  build_equalities(pb, e, f, rows, cols);

  std::size_t rank = matrix_rank(e, rows, cols);
  std::size_t dim = cols - rank;  // polytope dimension upper bound

  PolytopeVertices out;
  out.cap_limit = 5000;

  std::vector<std::vector<double>> found;
  auto try_subset = [&](const std::vector<std::size_t>& zero_set) {
    // Restrict to the non-zeroed coordinates and solve.
    std::vector<bool> zeroed(cols, false);
    for (std::size_t i : zero_set) zeroed[i] = true;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < cols; ++i)
      if (!zeroed[i]) keep.push_back(i);
    std::vector<double> er(rows * keep.size());
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < keep.size(); ++j)
        er[r * keep.size() + j] = e[r * cols + keep[j]];
    auto u = solve_unique(er, f, rows, keep.size());
    if (!u) return;
    std::vector<double> v(cols, 0.0);
    for (std::size_t j = 0; j < keep.size(); ++j) {
      if ((*u)[j] < -1e-9) return;
      v[keep[j]] = std::max(0.0, (*u)[j]);
    }
    if (max_violation(pb, v) > std::max(tol, 1e-8)) return;
    for (const auto& w : found) {
      double dist = 0.0;
      for (std::size_t i = 0; i < cols; ++i) dist = std::max(dist, std::abs(w[i] - v[i]));
      if (dist < 1e-7) return;
    }
    found.push_back(v);
    out.vertices.push_back(build_channel(pb, v));
  };

  if (dim == 0) {
    try_subset({});
  } else {
    // All subsets of coordinates of size `dim`, in lexicographic order.
    std::vector<std::size_t> idx(dim);
    for (std::size_t i = 0; i < dim; ++i) idx[i] = i;
    std::size_t tried = 0;
    while (true) {
      if (tried++ >= out.cap_limit) {
        out.capped = true;
        break;
      }
      try_subset(idx);
      // next combination
      std::size_t i = dim;
      while (i > 0) {
        --i;
        if (idx[i] != i + cols - dim) {
          ++idx[i];
          for (std::size_t j = i + 1; j < dim; ++j) idx[j] = idx[j - 1] + 1;
          break;
        }
        if (i == 0) { i = dim + 1; break; }
      }
      if (i == dim + 1 || dim == 0) break;
    }
  }

  if (out.vertices.empty() && check.witness_channel) {
    // Fall back to the LP witness so callers always get a point.
    out.vertices.push_back(*check.witness_channel);
  }
  return out;
}

}  // namespace coordlab
