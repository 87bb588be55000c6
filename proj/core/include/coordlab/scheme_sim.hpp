#pragma once

// Exact small-blocklength realization of the random-codebook / likelihood-
// encoder achievability scheme: the auxiliary distribution Q induced by a
// codebook, the code distribution P with the corrected (X^n, Z^n, J)
// marginal, total-variation coordination error, soft-covering sweeps over
// seeds and blocklengths, and the single-letterization converse audit.
//
// All "exact_*" outputs are exact dense tables (no sampling); the only
// randomness is the codebook draw, fully determined by its seed.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "coordlab/prob.hpp"

namespace coordlab {

inline constexpr std::size_t kDefaultBudgetCells = std::size_t{1} << 20;

struct BudgetExceeded : std::runtime_error {
  std::size_t required, budget;
  BudgetExceeded(std::size_t required_, std::size_t budget_)
      : std::runtime_error("exact table needs " + std::to_string(required_) +
                           " cells, budget is " + std::to_string(budget_)),
        required(required_),
        budget(budget_) {}
};

// Single-letter witness plus nominal rates; the witness joint has axes
// (X, Z, W, Y) and must satisfy the Markov chain X - Z - W - Y within 1e-8.
struct SchemeSpec {
  JointTable p;
  double r = 0.0;    // compression rate, bits/sample
  double rc = 0.0;   // common randomness rate, bits/sample
  double eps = 0.0;  // rate excess on the message index
  int n = 1;

  SchemeSpec(JointTable p, double r, double rc, double eps, int n);

  std::size_t m_size() const;  // floor(2^{n (r + eps)})
  std::size_t j_size() const;  // floor(2^{n rc})

  // Whether the (floor-rounded) effective rates log2(m_size)/n and
  // log2(j_size)/n satisfy the single-letter region inequalities.
  bool inside_region(double slack = 1e-9) const;
};

struct Codebook {
  int n = 0;
  std::size_t m_size = 0, j_size = 0;
  std::size_t w_alphabet = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint16_t> words;  // [(m * j_size + j) * n + t]

  std::size_t symbol(std::size_t t, std::size_t m, std::size_t j) const {
    return words[(m * j_size + j) * n + t];
  }
};

Codebook sample_codebook(const SchemeSpec& spec, std::uint64_t seed,
                         std::size_t budget_cells = kDefaultBudgetCells);

// Posterior over the message index m given (j, z^n), proportional to the
// codeword likelihood prod_t p_{Z|W=w_t}(z_t). If every codeword has zero
// likelihood the result is uniform and *zero_likelihood is set.
Pmf likelihood_encoder(const Codebook& cb, const JointTable& p, std::size_t j,
                       std::span<const std::size_t> z_seq,
                       bool* zero_likelihood = nullptr);

// Q_{X^n,Y^n | codebook}: average over (m, j) of the product distribution
// prod_t p_{X,Y|W=w_t}. Axes [|X|^n, |Y|^n].
JointTable exact_q_xy(const Codebook& cb, const JointTable& p,
                      std::size_t budget_cells = kDefaultBudgetCells);

// Q_{J,Z^n | codebook}. Axes [j_size, |Z|^n].
JointTable exact_q_jz(const Codebook& cb, const JointTable& p,
                      std::size_t budget_cells = kDefaultBudgetCells);

// The code distribution's (X^n, Y^n) marginal: the likelihood-encoder code
// run on the true source q_{X,Z}^{otimes n}. Axes [|X|^n, |Y|^n].
JointTable induced_p_xy(const Codebook& cb, const SchemeSpec& spec,
                        std::size_t budget_cells = kDefaultBudgetCells);

// Full joints over (J, X^n, Z^n, M, Y^n), for the marginal-correction
// identity at tiny n.
JointTable exact_q_full(const Codebook& cb, const SchemeSpec& spec,
                        std::size_t budget_cells = kDefaultBudgetCells);
JointTable induced_p_full(const Codebook& cb, const SchemeSpec& spec,
                          std::size_t budget_cells = kDefaultBudgetCells);

// n-fold memoryless extension of a 2-way joint, grouped axes [a^n, b^n].
JointTable iid_product(const JointTable& q, int n);

// tv against the n-fold product of q_xy.
double coordination_error(const JointTable& p_xy, const JointTable& q_xy,
                          int n);

struct SoftCoveringRow {
  int n;
  double mean_tv_xy, min_tv_xy, mean_tv_jz, mean_tv_pxy, stderr_pxy;
};

struct SoftCoveringCurve {
  std::vector<SoftCoveringRow> rows;
  bool truncated = false;  // some n exceeded the budget; table is partial
  int truncated_at_n = -1;
};

SoftCoveringCurve soft_covering_curve(
    const SchemeSpec& spec, const std::vector<int>& n_list, int trials,
    std::uint64_t base_seed, std::size_t budget_cells = kDefaultBudgetCells);

struct SingleLetterResult {
  JointTable joint;  // (X_T, Z_T, W', Y_T) with W' = (M, J, T)
  double i_zw = 0.0;
  double i_xyw = 0.0;
};

SingleLetterResult single_letterize(
    const Codebook& cb, const SchemeSpec& spec, std::uint64_t seed = 0,
    std::size_t budget_cells = kDefaultBudgetCells);

// g(eps) = 4 eps (log2|X| + log2|Y| + log2(1/eps)), eps in (0, 1/2).
double g_epsilon(double eps, std::size_t x_size, std::size_t y_size);

struct AuditReport {
  double eps_obs = 0.0;  // tv(P_{X_T,Y_T}, q_XY)
  double i_zw = 0.0;
  double i_xyw = 0.0;
  double chain_violation = 0.0;
  bool bounds_ok = false;
  bool chain_ok = false;
};

AuditReport converse_audit(const Codebook& cb, const SchemeSpec& spec,
                           std::uint64_t seed = 0,
                           std::size_t budget_cells = kDefaultBudgetCells);

}  // namespace coordlab
