#include <cmath>
#include <cstddef>
#include <vector>

#include <doctest.h>

#include "coordlab/dsbs.hpp"
#include "coordlab/scheme_sim.hpp"

using namespace coordlab;

namespace {

// reference single-letter witness: DSBS(0.1) observation, DSBS(0.26) target
SchemeSpec case5_spec(double r_slack, double eps, int n) {
  RegionWitness w = case5_witness(GapInputs(0.2, 0.1));
  double r = w.i_zw + r_slack;
  double rc = w.i_xyw - w.i_zw;
  return SchemeSpec(w.joint, r, rc, eps, n);
}

double table_sum(const JointTable& t) {
  double s = 0.0;
  for (double v : t.probs()) s += v;
  return s;
}

}  // namespace

TEST_CASE("spec validation and index sizes") {
  RegionWitness w = case5_witness(GapInputs(0.2, 0.1));

  SchemeSpec s(w.joint, 1.0 / 4.0, 0.5, 0.0, 4);
  // floor(2^{n(r+eps)}) and floor(2^{n rc}) with n = 4
  CHECK(s.m_size() == 2);
  CHECK(s.j_size() == 4);
  SchemeSpec s2(w.joint, 1.0 - 0.5, 0.5, 0.5, 4);
  CHECK(s2.m_size() == 16);
  CHECK(s2.j_size() == 4);

  // effective-rate region membership
  SchemeSpec good(w.joint, w.i_zw + 0.2, w.i_xyw - w.i_zw + 0.2, 0.3, 4);
  CHECK(good.inside_region());
  SchemeSpec bad(w.joint, 0.01, 0.0, 0.0, 4);
  CHECK_FALSE(bad.inside_region());

  // non-chain input is rejected
  std::vector<double> probs = {0.4, 0.0, 0.05, 0.05, 0.05, 0.05, 0.0, 0.4};
  // promote to a 4-axis table (X,Z,W,Y) with a W that breaks the chain
  std::vector<double> bad4(16, 0.0);
  for (std::size_t i = 0; i < 8; ++i) bad4[i * 2 + (i % 2)] = probs[i];
  CHECK_THROWS(SchemeSpec(JointTable({2, 2, 2, 2}, bad4), 1.0, 1.0, 0.0, 2));

  CHECK_THROWS(SchemeSpec(w.joint, -0.1, 0.0, 0.0, 2));
  CHECK_THROWS(SchemeSpec(w.joint, 1.0, 0.0, 0.0, 0));
}

TEST_CASE("codebook sampling is seed-deterministic") {
  SchemeSpec spec = case5_spec(0.3, 0.3, 4);
  Codebook a = sample_codebook(spec, 7);
  Codebook b = sample_codebook(spec, 7);
  CHECK(a.words == b.words);
  Codebook c = sample_codebook(spec, 8);
  CHECK(a.words != c.words);
  CHECK(a.words.size() == a.m_size * a.j_size * 4);
  for (std::uint16_t s : a.words) CHECK(s < a.w_alphabet);
}

TEST_CASE("likelihood encoder posterior") {
  // two codewords with likelihoods 0.9 and 0.1 yield posterior (0.9, 0.1)
  // (X,Z,W,Y) binary: Z=X, W noisy copy of Z with flip 0.1, Y constant 0
  std::vector<double> p = {0.45, 0.0, 0.05, 0.0, 0.0, 0.0, 0.0, 0.0,
                           0.0,  0.0, 0.0,  0.0, 0.05, 0.0, 0.45, 0.0};
  JointTable joint({2, 2, 2, 2}, p);
  Codebook cb;
  cb.n = 1;
  cb.m_size = 2;
  cb.j_size = 1;
  cb.w_alphabet = 2;
  cb.words = {0, 1};  // codeword 0 emits W=0, codeword 1 emits W=1
  std::size_t z_seq[] = {0};
  Pmf post = likelihood_encoder(cb, joint, 0, z_seq);
  CHECK(post(0) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(post(1) == doctest::Approx(0.1).epsilon(1e-12));

  // zero-likelihood falls back to uniform and raises the flag
  std::vector<double> q = {0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                           0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0};
  JointTable det({2, 2, 2, 2}, q);  // W = Z deterministic
  cb.words = {1, 1};                // both codewords claim W=1
  bool zero = false;
  Pmf post2 = likelihood_encoder(cb, det, 0, z_seq, &zero);
  CHECK(zero);
  CHECK(post2(0) == doctest::Approx(0.5));
}

TEST_CASE("exact tables are normalized and consistent at n=1") {
  SchemeSpec spec = case5_spec(0.3, 0.3, 1);
  Codebook cb = sample_codebook(spec, 3);
  JointTable qxy = exact_q_xy(cb, spec.p);
  JointTable qjz = exact_q_jz(cb, spec.p);
  JointTable pxy = induced_p_xy(cb, spec);
  CHECK(table_sum(qxy) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(table_sum(qjz) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(table_sum(pxy) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("full joints marginalize to the fast tables") {
  SchemeSpec spec = case5_spec(0.3, 0.3, 2);
  Codebook cb = sample_codebook(spec, 11);
  JointTable qfull = exact_q_full(cb, spec);
  JointTable pfull = induced_p_full(cb, spec);
  CHECK(table_sum(qfull) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(table_sum(pfull) == doctest::Approx(1.0).epsilon(1e-12));

  // axes of the full joints: (J, X^n, Z^n, M, Y^n)
  std::size_t keep_xy[] = {1, 4};
  CHECK(tv_distance(marginalize(qfull, keep_xy), exact_q_xy(cb, spec.p)) <
        1e-12);
  CHECK(tv_distance(marginalize(pfull, keep_xy), induced_p_xy(cb, spec)) <
        1e-12);
  std::size_t keep_jz[] = {0, 2};
  CHECK(tv_distance(marginalize(qfull, keep_jz), exact_q_jz(cb, spec.p)) <
        1e-12);
}

TEST_CASE("marginal correction leaves the total variation unchanged") {
  // P replaces Q's (J, X^n, Z^n) marginal by the true source and the encoder
  // posterior; the conditional of (M, Y^n) given (J, Z^n) is shared, so
  // tv(P, Q) equals the tv of the replaced marginal
  SchemeSpec spec = case5_spec(0.3, 0.3, 2);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Codebook cb = sample_codebook(spec, seed);
    JointTable qfull = exact_q_full(cb, spec);
    JointTable pfull = induced_p_full(cb, spec);
    std::size_t keep_jxz[] = {0, 1, 2};
    double tv_marg = tv_distance(marginalize(qfull, keep_jxz),
                                 marginalize(pfull, keep_jxz));
    double tv_full = tv_distance(qfull, pfull);
    CHECK(std::abs(tv_full - tv_marg) <= 1e-10);
  }
}

TEST_CASE("attaching the memoryless X stage preserves total variation") {
  // tv(Q_{J,X^n,Z^n}, pi_J x q_{XZ}^n) equals tv(Q_{J,Z^n}, pi_J x q_Z^n)
  // because both sides share the channel prod_t q_{X|Z}
  SchemeSpec spec = case5_spec(0.3, 0.3, 2);
  std::size_t nz = spec.p.axis_size(1);
  for (std::uint64_t seed : {5u, 6u}) {
    Codebook cb = sample_codebook(spec, seed);
    JointTable qfull = exact_q_full(cb, spec);

    std::size_t keep_jxz[] = {0, 1, 2};
    JointTable q_jxz = marginalize(qfull, keep_jxz);
    std::size_t keep_jz[] = {0, 2};
    JointTable q_jz = marginalize(qfull, keep_jz);

    // reference: uniform J times the iid source
    std::size_t keep_xz[] = {0, 1};
    JointTable q_xz1 = marginalize(spec.p, keep_xz);
    JointTable src = iid_product(q_xz1, 2);
    const std::size_t xs = src.axis_size(0), zs = src.axis_size(1);
    REQUIRE(zs == nz * nz);

    std::vector<double> ref3(cb.j_size * xs * zs);
    std::vector<double> ref2(cb.j_size * zs);
    for (std::size_t j = 0; j < cb.j_size; ++j)
      for (std::size_t x = 0; x < xs; ++x)
        for (std::size_t z = 0; z < zs; ++z) {
          ref3[(j * xs + x) * zs + z] = src[x * zs + z] / cb.j_size;
        }
    for (std::size_t j = 0; j < cb.j_size; ++j)
      for (std::size_t z = 0; z < zs; ++z) {
        double s = 0.0;
        for (std::size_t x = 0; x < xs; ++x) s += src[x * zs + z];
        ref2[j * zs + z] = s / cb.j_size;
      }
    double tv3 = tv_distance(q_jxz, JointTable({cb.j_size, xs, zs}, ref3));
    double tv2 = tv_distance(q_jz, JointTable({cb.j_size, zs}, ref2));
    CHECK(std::abs(tv3 - tv2) <= 1e-10);
  }
}

TEST_CASE("coordination error triangle bound") {
  // tv(P_xy, q^n) <= tv(P_xy, Q_xy) + tv(Q_xy, q^n), all computable exactly
  SchemeSpec spec = case5_spec(0.3, 0.3, 3);
  std::size_t keep_xy[] = {0, 3};
  JointTable q_xy1 = marginalize(spec.p, keep_xy);
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    Codebook cb = sample_codebook(spec, seed);
    JointTable qxy = exact_q_xy(cb, spec.p);
    JointTable pxy = induced_p_xy(cb, spec);
    double a = coordination_error(pxy, q_xy1, 3);
    double b = tv_distance(pxy, qxy);
    double c = coordination_error(qxy, q_xy1, 3);
    CHECK(a <= b + c + 1e-10);
  }
}

TEST_CASE("soft covering curve") {
  SchemeSpec base = case5_spec(0.15, 0.3, 1);
  SoftCoveringCurve curve =
      soft_covering_curve(base, {2, 4}, 6, /*base_seed=*/100);
  REQUIRE(curve.rows.size() == 2);
  CHECK_FALSE(curve.truncated);
  for (const SoftCoveringRow& row : curve.rows) {
    CHECK(row.min_tv_xy <= row.mean_tv_xy + 1e-12);
    CHECK(row.mean_tv_xy >= 0.0);
    CHECK(row.mean_tv_xy <= 1.0 + 1e-12);
    CHECK(row.stderr_pxy >= 0.0);
  }
  // repeatability
  SoftCoveringCurve again = soft_covering_curve(base, {2, 4}, 6, 100);
  for (std::size_t i = 0; i < curve.rows.size(); ++i) {
    CHECK(curve.rows[i].mean_tv_xy == again.rows[i].mean_tv_xy);
    CHECK(curve.rows[i].mean_tv_pxy == again.rows[i].mean_tv_pxy);
  }
}

TEST_CASE("budget truncation marks the curve") {
  SchemeSpec base = case5_spec(0.15, 0.3, 1);
  SoftCoveringCurve curve =
      soft_covering_curve(base, {2, 12}, 2, 100, /*budget_cells=*/1 << 12);
  CHECK(curve.truncated);
  CHECK(curve.truncated_at_n == 12);
  REQUIRE(curve.rows.size() == 1);
  CHECK(curve.rows[0].n == 2);

  SchemeSpec big = case5_spec(0.3, 0.3, 12);
  CHECK_THROWS_AS(sample_codebook(big, 1, 1 << 4), BudgetExceeded);
}

TEST_CASE("single letterization at n=1 reproduces per-letter statistics") {
  SchemeSpec spec = case5_spec(0.3, 0.3, 1);
  Codebook cb = sample_codebook(spec, 17);
  SingleLetterResult res = single_letterize(cb, spec);
  // at n = 1, (X_T, Z_T, Y_T) is the code distribution itself
  CHECK(table_sum(res.joint) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.i_zw >= -1e-12);
  CHECK(res.i_xyw >= -1e-12);
  // W' = (M, J, T) determines the codeword symbol, so I(Z;W') is bounded by
  // the message plus common-randomness content
  CHECK(res.i_zw <=
        std::log2(double(cb.m_size * cb.j_size)) + 1e-9);
}

TEST_CASE("g_epsilon") {
  // 4 eps (log2|X| + log2|Y| + log2(1/eps)) at eps = 1/4, binary alphabets
  CHECK(g_epsilon(0.25, 2, 2) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK_THROWS(g_epsilon(0.0, 2, 2));
  CHECK_THROWS(g_epsilon(0.5, 2, 2));
}

TEST_CASE("converse audit holds at n=3") {
  SchemeSpec spec = case5_spec(0.15, 0.3, 3);
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    Codebook cb = sample_codebook(spec, seed);
    AuditReport rep = converse_audit(cb, spec, seed);
    CHECK(rep.chain_ok);
    CHECK(rep.bounds_ok);
    CHECK(rep.eps_obs >= 0.0);
    CHECK(rep.i_zw >= -1e-12);
    // the single-letter information is carried by at most m_size * j_size
    // codewords
    SchemeSpec probe = spec;
    CHECK(rep.i_zw <= std::log2(double(probe.m_size())) / 3.0 + 1e-9 +
                          std::log2(double(probe.j_size())) / 3.0 +
                          std::log2(3.0) / 3.0 + 2.0);
  }
}
