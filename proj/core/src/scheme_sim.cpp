#include "coordlab/scheme_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace coordlab {

namespace {

// Kernels of the single-letter witness (X, Z, W, Y), precomputed once per
// exact computation.
struct Kernels {
  std::size_t nx, nz, nw, ny;
  Pmf pw;
  Channel pz_w;   // rows w -> z
  Channel py_w;   // rows w -> y
  Channel qx_z;   // rows z -> x
  Pmf qz;
  JointTable qxz;  // (X, Z)
  JointTable qxy;  // (X, Y)
  std::vector<double> pxy_w;  // [w][(x*ny + y)]

  explicit Kernels(const JointTable& p)
      : nx(p.axis_size(0)),
        nz(p.axis_size(1)),
        nw(p.axis_size(2)),
        ny(p.axis_size(3)),
        pw(marginal_pmf(p, 2)),
        pz_w(conditional(p, 2, 1)),
        py_w(conditional(p, 2, 3)),
        qx_z(conditional(p, 1, 0)),
        qz(marginal_pmf(p, 1)),
        qxz([&] {
          std::size_t k[] = {0, 1};
          return marginalize(p, k);
        }()),
        qxy([&] {
          std::size_t k[] = {0, 3};
          return marginalize(p, k);
        }()) {
    pxy_w.assign(nw * nx * ny, 0.0);
    for (std::size_t w = 0; w < nw; ++w)
      for (std::size_t z = 0; z < nz; ++z) {
        double pz = pz_w(z, w);
        if (pz == 0.0) continue;
        for (std::size_t x = 0; x < nx; ++x) {
          double a = pz * qx_z(x, z);
          for (std::size_t y = 0; y < ny; ++y) {
            pxy_w[w * nx * ny + x * ny + y] += a * py_w(y, w);
          }
        }
      }
  }
};

void require_witness_shape(const JointTable& p) {
  if (p.num_axes() != 4) {
    throw std::invalid_argument("scheme witness must have axes (X, Z, W, Y)");
  }
}

std::size_t checked_pow(std::size_t base, int n, std::size_t budget) {
  std::size_t v = 1;
  for (int t = 0; t < n; ++t) {
    if (v > budget / base) throw BudgetExceeded(budget + 1, budget);
    v *= base;
  }
  return v;
}

void decode_digits(std::size_t idx, std::size_t base, int n,
                   std::size_t* out) {
  for (int t = n; t-- > 0;) {
    out[t] = idx % base;
    idx /= base;
  }
}

// Regroup a per-letter-interleaved table (pair digit a_t*nb + b_t, t = 0
// slowest) into grouped axes [na^n, nb^n].
JointTable group_pairs(const std::vector<double>& inter, std::size_t na,
                       std::size_t nb, int n) {
  const std::size_t nab = na * nb;
  std::size_t cells = inter.size();
  std::size_t big_a = 1, big_b = 1;
  for (int t = 0; t < n; ++t) {
    big_a *= na;
    big_b *= nb;
  }
  std::vector<double> out(cells, 0.0);
  std::vector<std::size_t> pair(static_cast<std::size_t>(n));
  for (std::size_t flat = 0; flat < cells; ++flat) {
    decode_digits(flat, nab, n, pair.data());
    std::size_t ai = 0, bi = 0;
    for (int t = 0; t < n; ++t) {
      ai = ai * na + pair[t] / nb;
      bi = bi * nb + pair[t] % nb;
    }
    out[ai * big_b + bi] = inter[flat];
  }
  return JointTable({big_a, big_b}, std::move(out));
}

// Accumulates weight * prod_t letter_vec(t) into `inter` (interleaved layout,
// letter vectors of length `k`).
void rank_one_accumulate(std::vector<double>& scratch,
                         std::vector<double>& inter, double weight,
                         const double* const* letters, std::size_t k, int n) {
  scratch.assign(1, weight);
  for (int t = 0; t + 1 < n; ++t) {
    std::size_t old = scratch.size();
    std::vector<double> next(old * k);
    for (std::size_t i = 0; i < old; ++i)
      for (std::size_t c = 0; c < k; ++c) next[i * k + c] = scratch[i] * letters[t][c];
    scratch.swap(next);
  }
  const double* last = letters[n - 1];
  for (std::size_t i = 0; i < scratch.size(); ++i) {
    double s = scratch[i];
    if (s == 0.0) continue;
    for (std::size_t c = 0; c < k; ++c) inter[i * k + c] += s * last[c];
  }
}

std::size_t floor_pow2_rate(double rate_bits, int n) {
  double v = std::floor(std::pow(2.0, rate_bits * n));
  if (v < 1.0) return 1;
  if (v > 9.0e15) throw std::overflow_error("codebook index set too large");
  return static_cast<std::size_t>(v);
}

// Encoder posteriors for every (j, z^n), flattened [j][zidx][m].
std::vector<double> all_encoder_posteriors(const Codebook& cb,
                                           const Kernels& ker,
                                           std::size_t zn_cells) {
  const int n = cb.n;
  std::vector<double> enc(cb.j_size * zn_cells * cb.m_size);
  std::vector<std::size_t> zdig(static_cast<std::size_t>(n));
  for (std::size_t zi = 0; zi < zn_cells; ++zi) {
    decode_digits(zi, ker.nz, n, zdig.data());
    for (std::size_t j = 0; j < cb.j_size; ++j) {
      double total = 0.0;
      double* row = enc.data() + (j * zn_cells + zi) * cb.m_size;
      for (std::size_t m = 0; m < cb.m_size; ++m) {
        double lik = 1.0;
        for (int t = 0; t < n; ++t) {
          lik *= ker.pz_w(zdig[t], cb.symbol(t, m, j));
        }
        row[m] = lik;
        total += lik;
      }
      if (total > 0.0) {
        for (std::size_t m = 0; m < cb.m_size; ++m) row[m] /= total;
      } else {
        for (std::size_t m = 0; m < cb.m_size; ++m) row[m] = 1.0 / cb.m_size;
      }
    }
  }
  return enc;
}

}  // namespace

SchemeSpec::SchemeSpec(JointTable p_, double r_, double rc_, double eps_, int n_)
    : p(std::move(p_)), r(r_), rc(rc_), eps(eps_), n(n_) {
  require_witness_shape(p);
  if (r < 0.0 || rc < 0.0 || eps < 0.0) {
    throw std::invalid_argument("SchemeSpec: rates must be non-negative");
  }
  if (n < 1) throw std::invalid_argument("SchemeSpec: n must be >= 1");
  std::size_t gx[] = {0}, gz[] = {1}, gw[] = {2}, gy[] = {3}, gwy[] = {2, 3},
              gxz[] = {0, 1};
  double v1 = conditional_mutual_information(p, gx, gwy, gz);
  double v2 = conditional_mutual_information(p, gxz, gy, gw);
  if (std::max(v1, v2) > 1e-8) {
    throw std::invalid_argument("SchemeSpec: witness violates X - Z - W - Y");
  }
}

std::size_t SchemeSpec::m_size() const { return floor_pow2_rate(r + eps, n); }
std::size_t SchemeSpec::j_size() const { return floor_pow2_rate(rc, n); }

bool SchemeSpec::inside_region(double slack) const {
  std::size_t gz[] = {1}, gw[] = {2}, gxy[] = {0, 3};
  double i_zw = mutual_information(p, gz, gw);
  double i_xyw = mutual_information(p, gxy, gw);
  double r_eff = std::log2(static_cast<double>(m_size())) / n;
  double rc_eff = std::log2(static_cast<double>(j_size())) / n;
  return r_eff >= i_zw - slack && r_eff + rc_eff >= i_xyw - slack;
}

Codebook sample_codebook(const SchemeSpec& spec, std::uint64_t seed,
                         std::size_t budget_cells) {
  Kernels ker(spec.p);
  Codebook cb;
  cb.n = spec.n;
  cb.m_size = spec.m_size();
  cb.j_size = spec.j_size();
  cb.w_alphabet = ker.nw;
  cb.seed = seed;
  if (ker.nw > 65535) throw std::invalid_argument("W alphabet too large");
  std::size_t cells = cb.m_size;
  if (cells > budget_cells / cb.j_size ||
      cells * cb.j_size > budget_cells / static_cast<std::size_t>(cb.n)) {
    throw BudgetExceeded(cb.m_size * cb.j_size * cb.n, budget_cells);
  }
  cb.words.resize(cb.m_size * cb.j_size * static_cast<std::size_t>(cb.n));
  std::mt19937_64 rng(seed);
  std::size_t idx = 0;
  for (std::size_t m = 0; m < cb.m_size; ++m) {
    for (std::size_t j = 0; j < cb.j_size; ++j) {
      for (int t = 0; t < cb.n; ++t) {
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        double acc = 0.0;
        std::size_t w = ker.nw - 1;
        for (std::size_t k = 0; k < ker.nw; ++k) {
          acc += ker.pw(k);
          if (u < acc) {
            w = k;
            break;
          }
        }
        cb.words[idx++] = static_cast<std::uint16_t>(w);
      }
    }
  }
  return cb;
}

Pmf likelihood_encoder(const Codebook& cb, const JointTable& p, std::size_t j,
                       std::span<const std::size_t> z_seq,
                       bool* zero_likelihood) {
  require_witness_shape(p);
  if (j >= cb.j_size) throw std::out_of_range("likelihood_encoder: j");
  if (z_seq.size() != static_cast<std::size_t>(cb.n)) {
    throw std::invalid_argument("likelihood_encoder: z sequence length != n");
  }
  Channel pz_w = conditional(p, 2, 1);
  std::size_t nz = p.axis_size(1);
  std::vector<double> lik(cb.m_size);
  double total = 0.0;
  for (std::size_t m = 0; m < cb.m_size; ++m) {
    double v = 1.0;
    for (int t = 0; t < cb.n; ++t) {
      std::size_t z = z_seq[static_cast<std::size_t>(t)];
      if (z >= nz) throw std::out_of_range("likelihood_encoder: z symbol");
      v *= pz_w(z, cb.symbol(t, m, j));
    }
    lik[m] = v;
    total += v;
  }
  if (zero_likelihood) *zero_likelihood = (total == 0.0);
  if (total == 0.0) return Pmf::uniform(cb.m_size);
  for (double& v : lik) v /= total;
  return Pmf(std::move(lik));
}

JointTable exact_q_xy(const Codebook& cb, const JointTable& p,
                      std::size_t budget_cells) {
  require_witness_shape(p);
  Kernels ker(p);
  const int n = cb.n;
  const std::size_t nab = ker.nx * ker.ny;
  std::size_t cells = checked_pow(nab, n, budget_cells);
  std::vector<double> inter(cells, 0.0), scratch;
  std::vector<const double*> letters(static_cast<std::size_t>(n));
  const double weight = 1.0 / (static_cast<double>(cb.m_size) *
                               static_cast<double>(cb.j_size));
  for (std::size_t m = 0; m < cb.m_size; ++m) {
    for (std::size_t j = 0; j < cb.j_size; ++j) {
      for (int t = 0; t < n; ++t) {
        letters[static_cast<std::size_t>(t)] =
            ker.pxy_w.data() + cb.symbol(t, m, j) * nab;
      }
      rank_one_accumulate(scratch, inter, weight, letters.data(), nab, n);
    }
  }
  return group_pairs(inter, ker.nx, ker.ny, n);
}

JointTable exact_q_jz(const Codebook& cb, const JointTable& p,
                      std::size_t budget_cells) {
  require_witness_shape(p);
  Kernels ker(p);
  const int n = cb.n;
  std::size_t zn_cells = checked_pow(ker.nz, n, budget_cells);
  if (zn_cells > budget_cells / cb.j_size) {
    throw BudgetExceeded(zn_cells * cb.j_size, budget_cells);
  }
  // per-w rows over z
  std::vector<double> zrow(ker.nw * ker.nz);
  for (std::size_t w = 0; w < ker.nw; ++w)
    for (std::size_t z = 0; z < ker.nz; ++z) zrow[w * ker.nz + z] = ker.pz_w(z, w);

  std::vector<double> out(cb.j_size * zn_cells, 0.0);
  std::vector<double> inter(zn_cells), scratch;
  std::vector<const double*> letters(static_cast<std::size_t>(n));
  const double weight = 1.0 / (static_cast<double>(cb.m_size) *
                               static_cast<double>(cb.j_size));
  for (std::size_t j = 0; j < cb.j_size; ++j) {
    std::fill(inter.begin(), inter.end(), 0.0);
    for (std::size_t m = 0; m < cb.m_size; ++m) {
      for (int t = 0; t < n; ++t) {
        letters[static_cast<std::size_t>(t)] =
            zrow.data() + cb.symbol(t, m, j) * ker.nz;
      }
      rank_one_accumulate(scratch, inter, weight, letters.data(), ker.nz, n);
    }
    std::copy(inter.begin(), inter.end(), out.begin() + j * zn_cells);
  }
  return JointTable({cb.j_size, zn_cells}, std::move(out));
}

JointTable induced_p_xy(const Codebook& cb, const SchemeSpec& spec,
                        std::size_t budget_cells) {
  Kernels ker(spec.p);
  const int n = cb.n;
  const std::size_t nab = ker.nx * ker.ny;
  std::size_t cells = checked_pow(nab, n, budget_cells);
  std::size_t zn_cells = checked_pow(ker.nz, n, budget_cells);
  if (zn_cells > budget_cells / (cb.j_size * cb.m_size)) {
    throw BudgetExceeded(zn_cells * cb.j_size * cb.m_size, budget_cells);
  }

  // per (z, w) letter vectors over (x, y)
  std::vector<double> letter(ker.nz * ker.nw * nab, 0.0);
  for (std::size_t z = 0; z < ker.nz; ++z)
    for (std::size_t w = 0; w < ker.nw; ++w)
      for (std::size_t x = 0; x < ker.nx; ++x)
        for (std::size_t y = 0; y < ker.ny; ++y)
          letter[(z * ker.nw + w) * nab + x * ker.ny + y] =
              ker.qx_z(x, z) * ker.py_w(y, w);

  std::vector<double> inter(cells, 0.0), scratch;
  std::vector<const double*> letters(static_cast<std::size_t>(n));
  std::vector<std::size_t> zdig(static_cast<std::size_t>(n));
  std::vector<double> lik(cb.m_size);
  for (std::size_t zi = 0; zi < zn_cells; ++zi) {
    decode_digits(zi, ker.nz, n, zdig.data());
    double qzn = 1.0;
    for (int t = 0; t < n; ++t) qzn *= ker.qz(zdig[static_cast<std::size_t>(t)]);
    if (qzn == 0.0) continue;
    for (std::size_t j = 0; j < cb.j_size; ++j) {
      double total = 0.0;
      for (std::size_t m = 0; m < cb.m_size; ++m) {
        double v = 1.0;
        for (int t = 0; t < n; ++t) {
          v *= ker.pz_w(zdig[static_cast<std::size_t>(t)], cb.symbol(t, m, j));
        }
        lik[m] = v;
        total += v;
      }
      for (std::size_t m = 0; m < cb.m_size; ++m) {
        double enc = total > 0.0 ? lik[m] / total : 1.0 / cb.m_size;
        double weight = qzn * enc / static_cast<double>(cb.j_size);
        if (weight == 0.0) continue;
        for (int t = 0; t < n; ++t) {
          letters[static_cast<std::size_t>(t)] =
              letter.data() +
              (zdig[static_cast<std::size_t>(t)] * ker.nw + cb.symbol(t, m, j)) *
                  nab;
        }
        rank_one_accumulate(scratch, inter, weight, letters.data(), nab, n);
      }
    }
  }
  return group_pairs(inter, ker.nx, ker.ny, n);
}

JointTable exact_q_full(const Codebook& cb, const SchemeSpec& spec,
                        std::size_t budget_cells) {
  Kernels ker(spec.p);
  const int n = cb.n;
  std::size_t xn = checked_pow(ker.nx, n, budget_cells);
  std::size_t zn = checked_pow(ker.nz, n, budget_cells);
  std::size_t yn = checked_pow(ker.ny, n, budget_cells);
  double total_cells = static_cast<double>(cb.j_size) * xn * zn * cb.m_size * yn;
  if (total_cells > static_cast<double>(budget_cells)) {
    throw BudgetExceeded(static_cast<std::size_t>(total_cells), budget_cells);
  }
  std::vector<double> out(static_cast<std::size_t>(total_cells), 0.0);
  std::vector<std::size_t> xd(n), zd(n), yd(n);
  const double base_w = 1.0 / (static_cast<double>(cb.j_size) *
                               static_cast<double>(cb.m_size));
  std::size_t flat = 0;
  for (std::size_t j = 0; j < cb.j_size; ++j)
    for (std::size_t xi = 0; xi < xn; ++xi) {
      decode_digits(xi, ker.nx, n, xd.data());
      for (std::size_t zi = 0; zi < zn; ++zi) {
        decode_digits(zi, ker.nz, n, zd.data());
        double xz = 1.0;
        for (int t = 0; t < n; ++t) xz *= ker.qx_z(xd[t], zd[t]);
        for (std::size_t m = 0; m < cb.m_size; ++m) {
          double zw = 1.0;
          for (int t = 0; t < n; ++t) zw *= ker.pz_w(zd[t], cb.symbol(t, m, j));
          double pre = base_w * xz * zw;
          for (std::size_t yi = 0; yi < yn; ++yi) {
            decode_digits(yi, ker.ny, n, yd.data());
            double yw = 1.0;
            for (int t = 0; t < n; ++t) yw *= ker.py_w(yd[t], cb.symbol(t, m, j));
            out[flat++] = pre * yw;
          }
        }
      }
    }
  return JointTable({cb.j_size, xn, zn, cb.m_size, yn}, std::move(out));
}

JointTable induced_p_full(const Codebook& cb, const SchemeSpec& spec,
                          std::size_t budget_cells) {
  Kernels ker(spec.p);
  const int n = cb.n;
  std::size_t xn = checked_pow(ker.nx, n, budget_cells);
  std::size_t zn = checked_pow(ker.nz, n, budget_cells);
  std::size_t yn = checked_pow(ker.ny, n, budget_cells);
  double total_cells = static_cast<double>(cb.j_size) * xn * zn * cb.m_size * yn;
  if (total_cells > static_cast<double>(budget_cells)) {
    throw BudgetExceeded(static_cast<std::size_t>(total_cells), budget_cells);
  }
  std::vector<double> enc = all_encoder_posteriors(cb, ker, zn);
  std::vector<double> out(static_cast<std::size_t>(total_cells), 0.0);
  std::vector<std::size_t> xd(n), zd(n), yd(n);
  std::size_t flat = 0;
  for (std::size_t j = 0; j < cb.j_size; ++j)
    for (std::size_t xi = 0; xi < xn; ++xi) {
      decode_digits(xi, ker.nx, n, xd.data());
      for (std::size_t zi = 0; zi < zn; ++zi) {
        decode_digits(zi, ker.nz, n, zd.data());
        double xz = 1.0;
        for (int t = 0; t < n; ++t) {
          xz *= ker.qxz[xd[t] * ker.nz + zd[t]];
        }
        for (std::size_t m = 0; m < cb.m_size; ++m) {
          double pre = xz * enc[(j * zn + zi) * cb.m_size + m] /
                       static_cast<double>(cb.j_size);
          for (std::size_t yi = 0; yi < yn; ++yi) {
            decode_digits(yi, ker.ny, n, yd.data());
            double yw = 1.0;
            for (int t = 0; t < n; ++t) yw *= ker.py_w(yd[t], cb.symbol(t, m, j));
            out[flat++] = pre * yw;
          }
        }
      }
    }
  return JointTable({cb.j_size, xn, zn, cb.m_size, yn}, std::move(out));
}

JointTable iid_product(const JointTable& q, int n) {
  if (q.num_axes() != 2) {
    throw std::invalid_argument("iid_product: base must be a 2-way joint");
  }
  std::size_t na = q.axis_size(0), nb = q.axis_size(1), nab = na * nb;
  std::vector<double> inter = {1.0};
  for (int t = 0; t < n; ++t) {
    std::vector<double> next(inter.size() * nab);
    for (std::size_t i = 0; i < inter.size(); ++i)
      for (std::size_t c = 0; c < nab; ++c) next[i * nab + c] = inter[i] * q[c];
    inter.swap(next);
  }
  return group_pairs(inter, na, nb, n);
}

double coordination_error(const JointTable& p_xy, const JointTable& q_xy,
                          int n) {
  JointTable ideal = iid_product(q_xy, n);
  if (p_xy.axis_sizes() != ideal.axis_sizes()) {
    throw std::invalid_argument("coordination_error: shape mismatch");
  }
  return tv_distance(p_xy, ideal);
}

SoftCoveringCurve soft_covering_curve(const SchemeSpec& spec,
                                      const std::vector<int>& n_list,
                                      int trials, std::uint64_t base_seed,
                                      std::size_t budget_cells) {
  if (trials < 1) throw std::invalid_argument("soft_covering_curve: trials >= 1");
  SoftCoveringCurve curve;
  std::size_t kxy[] = {0, 3};
  JointTable q_xy = marginalize(spec.p, kxy);
  Pmf qz = marginal_pmf(spec.p, 1);
  for (int n : n_list) {
    SchemeSpec sn(spec.p, spec.r, spec.rc, spec.eps, n);
    std::vector<double> txy, tjz, tpxy;
    try {
      for (int i = 0; i < trials; ++i) {
        Codebook cb = sample_codebook(sn, base_seed + static_cast<std::uint64_t>(i),
                                      budget_cells);
        JointTable qxy_n = exact_q_xy(cb, spec.p, budget_cells);
        txy.push_back(coordination_error(qxy_n, q_xy, n));
        JointTable qjz = exact_q_jz(cb, spec.p, budget_cells);
        JointTable ideal_jz = [&] {
          JointTable zprod = iid_product(
              JointTable({1, qz.size()}, qz.probs()), n);  // [1, nz^n]
          std::vector<double> v;
          v.reserve(cb.j_size * zprod.cells());
          for (std::size_t j = 0; j < cb.j_size; ++j)
            for (std::size_t c = 0; c < zprod.cells(); ++c)
              v.push_back(zprod[c] / static_cast<double>(cb.j_size));
          return JointTable({cb.j_size, zprod.cells()}, std::move(v));
        }();
        tjz.push_back(tv_distance(qjz, ideal_jz));
        JointTable pxy = induced_p_xy(cb, sn, budget_cells);
        tpxy.push_back(coordination_error(pxy, q_xy, n));
      }
    } catch (const BudgetExceeded&) {
      curve.truncated = true;
      curve.truncated_at_n = n;
      break;
    }
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    double m_pxy = mean(tpxy);
    double var = 0.0;
    for (double x : tpxy) var += (x - m_pxy) * (x - m_pxy);
    double stderr_pxy =
        tpxy.size() > 1
            ? std::sqrt(var / (static_cast<double>(tpxy.size()) - 1.0)) /
                  std::sqrt(static_cast<double>(tpxy.size()))
            : 0.0;
    curve.rows.push_back({n, mean(txy), *std::min_element(txy.begin(), txy.end()),
                          mean(tjz), m_pxy, stderr_pxy});
  }
  return curve;
}

SingleLetterResult single_letterize(const Codebook& cb, const SchemeSpec& spec,
                                    std::uint64_t /*seed*/,
                                    std::size_t budget_cells) {
  Kernels ker(spec.p);
  const int n = cb.n;
  std::size_t zn = checked_pow(ker.nz, n, budget_cells);
  std::size_t w_size = cb.m_size * cb.j_size * static_cast<std::size_t>(n);
  double total_cells =
      static_cast<double>(ker.nx) * ker.nz * w_size * ker.ny;
  if (total_cells > static_cast<double>(budget_cells)) {
    throw BudgetExceeded(static_cast<std::size_t>(total_cells), budget_cells);
  }
  std::vector<double> enc = all_encoder_posteriors(cb, ker, zn);

  // joint over (X, Z, W'=(M,J,T), Y), axes sizes (nx, nz, M*J*n, ny)
  std::vector<double> out(static_cast<std::size_t>(total_cells), 0.0);
  const std::size_t stride_y = 1;
  const std::size_t stride_w = ker.ny;
  const std::size_t stride_z = stride_w * w_size;
  const std::size_t stride_x = stride_z * ker.nz;
  std::vector<std::size_t> zd(n);
  for (std::size_t zi = 0; zi < zn; ++zi) {
    decode_digits(zi, ker.nz, n, zd.data());
    double qzn = 1.0;
    for (int t = 0; t < n; ++t) qzn *= ker.qz(zd[t]);
    if (qzn == 0.0) continue;
    for (std::size_t j = 0; j < cb.j_size; ++j) {
      for (std::size_t m = 0; m < cb.m_size; ++m) {
        double w_base = qzn * enc[(j * zn + zi) * cb.m_size + m] /
                        (static_cast<double>(cb.j_size) * n);
        if (w_base == 0.0) continue;
        for (int t = 0; t < n; ++t) {
          std::size_t wp = (m * cb.j_size + j) * static_cast<std::size_t>(n) +
                           static_cast<std::size_t>(t);
          std::size_t w_sym = cb.symbol(t, m, j);
          for (std::size_t x = 0; x < ker.nx; ++x) {
            double wx = w_base * ker.qx_z(x, zd[t]);
            if (wx == 0.0) continue;
            std::size_t base =
                x * stride_x + zd[t] * stride_z + wp * stride_w;
            for (std::size_t y = 0; y < ker.ny; ++y) {
              out[base + y * stride_y] += wx * ker.py_w(y, w_sym);
            }
          }
        }
      }
    }
  }
  SingleLetterResult res{
      JointTable({ker.nx, ker.nz, w_size, ker.ny}, std::move(out)), 0.0, 0.0};
  std::size_t gz[] = {1}, gw[] = {2}, gxy[] = {0, 3};
  res.i_zw = mutual_information(res.joint, gz, gw);
  res.i_xyw = mutual_information(res.joint, gxy, gw);
  return res;
}

double g_epsilon(double eps, std::size_t x_size, std::size_t y_size) {
  if (!(eps > 0.0 && eps < 0.5)) {
    throw std::domain_error("g_epsilon: eps outside (0, 1/2)");
  }
  return 4.0 * eps *
         (std::log2(static_cast<double>(x_size)) +
          std::log2(static_cast<double>(y_size)) + std::log2(1.0 / eps));
}

AuditReport converse_audit(const Codebook& cb, const SchemeSpec& spec,
                           std::uint64_t seed, std::size_t budget_cells) {
  SingleLetterResult sl = single_letterize(cb, spec, seed, budget_cells);
  std::size_t kxy[] = {0, 3};
  JointTable q_xy = marginalize(spec.p, kxy);
  AuditReport rep;
  rep.eps_obs = tv_distance(marginalize(sl.joint, kxy), q_xy);
  rep.i_zw = sl.i_zw;
  rep.i_xyw = sl.i_xyw;
  std::size_t gx[] = {0}, gz[] = {1}, gw[] = {2}, gy[] = {3}, gwy[] = {2, 3},
              gxz[] = {0, 1};
  rep.chain_violation =
      std::max(conditional_mutual_information(sl.joint, gx, gwy, gz),
               conditional_mutual_information(sl.joint, gxz, gy, gw));
  rep.chain_ok = rep.chain_violation <= 1e-8;
  double slack = 2.0 * g_epsilon(std::max(rep.eps_obs, 1e-6),
                                 spec.p.axis_size(0), spec.p.axis_size(3));
  rep.bounds_ok = rep.i_zw <= spec.r + spec.eps + 1e-9 &&
                  rep.i_xyw <= spec.r + spec.eps + spec.rc + slack + 1e-9;
  return rep;
}

}  // namespace coordlab
