#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "coordlab/dsbs.hpp"
#include "coordlab/feasibility.hpp"
#include "coordlab/prob.hpp"

using namespace coordlab;

namespace {

Pmf random_pmf(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> v(n);
  double s = 0.0;
  for (double& x : v) {
    x = -std::log(std::uniform_real_distribution<double>(1e-12, 1.0)(rng));
    s += x;
  }
  for (double& x : v) x /= s;
  return Pmf(v);
}

Channel random_channel(std::mt19937_64& rng, std::size_t in, std::size_t out) {
  std::vector<double> rows;
  for (std::size_t i = 0; i < in; ++i) {
    Pmf row = random_pmf(rng, out);
    rows.insert(rows.end(), row.probs().begin(), row.probs().end());
  }
  return Channel(in, out, rows);
}

// tv(q_xy, q_xz composed with ch)
double reconstruction_tv(const JointTable& q_xz, const Channel& ch,
                         const JointTable& q_xy) {
  std::size_t keep[] = {0, 2};
  return tv_distance(marginalize(compatible_joint(q_xz, ch), keep), q_xy);
}

}  // namespace

TEST_CASE("identity target is feasible with the identity witness") {
  JointTable q_xz = dsbs_joint(0.15);
  CompatibilityResult res = find_compatible_channel(q_xz, q_xz);
  REQUIRE(res.feasible);
  CHECK(res.residual <= 1e-9);
  REQUIRE(res.witness_channel.has_value());
  CHECK(reconstruction_tv(q_xz, *res.witness_channel, q_xz) < 1e-8);
}

TEST_CASE("DSBS(0.1) to DSBS(0.26) is feasible with witness BSC(0.2)") {
  // delta = tau + (1-2 tau) theta solved for theta: (0.26-0.1)/0.8 = 0.2
  JointTable q_xz = dsbs_joint(0.1), q_xy = dsbs_joint(0.26);
  CompatibilityResult res = find_compatible_channel(q_xz, q_xy);
  REQUIRE(res.feasible);
  REQUIRE(res.witness_channel.has_value());
  const Channel& w = *res.witness_channel;
  CHECK(w(1, 0) == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(w(0, 1) == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(reconstruction_tv(q_xz, w, q_xy) < 1e-9);
}

TEST_CASE("independent observation cannot reach a correlated target") {
  JointTable q_xz = JointTable::product(Pmf::bernoulli(0.5), Pmf::bernoulli(0.5));
  JointTable q_xy = dsbs_joint(0.2);  // I(X;Y) > 0
  CompatibilityResult res = find_compatible_channel(q_xz, q_xy);
  CHECK_FALSE(res.feasible);
  CHECK(res.residual > 1e-6);

  // certificate: no binary channel on a 0.05 grid reconstructs q_xy closely
  double best = 1.0;
  for (int i = 0; i <= 20; ++i)
    for (int k = 0; k <= 20; ++k) {
      double a = 0.05 * i, b = 0.05 * k;
      Channel ch(2, 2, {std::max(0.0, 1.0 - a), std::min(1.0, a),
                        std::min(1.0, b), std::max(0.0, 1.0 - b)});
      best = std::min(best, reconstruction_tv(q_xz, ch, q_xy));
    }
  CHECK(best >= 0.02);
}

TEST_CASE("axis mismatch is rejected") {
  JointTable q_xz({2, 2}, {0.25, 0.25, 0.25, 0.25});
  JointTable q_xy({3, 2}, {0.2, 0.2, 0.2, 0.2, 0.1, 0.1});
  CHECK_THROWS(find_compatible_channel(q_xz, q_xy));
}

TEST_CASE("round trip: composed targets are always feasible") {
  std::mt19937_64 rng(5);
  for (int it = 0; it < 40; ++it) {
    std::size_t nx = 2 + (rng() % 2), nz = 2 + (rng() % 2), ny = 2 + (rng() % 2);
    JointTable q_xz = compose(random_pmf(rng, nx), random_channel(rng, nx, nz));
    Channel ch = random_channel(rng, nz, ny);
    std::size_t keep[] = {0, 2};
    JointTable q_xy = marginalize(compatible_joint(q_xz, ch), keep);
    CompatibilityResult res = find_compatible_channel(q_xz, q_xy);
    REQUIRE(res.feasible);
    CHECK(res.residual <= 1e-6);
    REQUIRE(res.witness_channel.has_value());
    CHECK(reconstruction_tv(q_xz, *res.witness_channel, q_xy) < 1e-6);
  }
}

TEST_CASE("compatible_joint realizes the Markov chain X - Z - Y") {
  std::mt19937_64 rng(9);
  JointTable q_xz = compose(random_pmf(rng, 2), random_channel(rng, 2, 3));
  Channel ch = random_channel(rng, 3, 2);
  JointTable j = compatible_joint(q_xz, ch);
  std::size_t gx[] = {0}, gy[] = {2}, gz[] = {1};
  CHECK(conditional_mutual_information(j, gx, gy, gz) < 1e-10);
  std::size_t keep[] = {0, 1};
  CHECK(tv_distance(marginalize(j, keep), q_xz) < 1e-12);
}

TEST_CASE("polytope vertices reproduce the target") {
  JointTable q_xz = dsbs_joint(0.1), q_xy = dsbs_joint(0.26);
  PolytopeVertices pv = compatible_polytope_vertices(q_xz, q_xy);
  REQUIRE_FALSE(pv.vertices.empty());
  for (const Channel& v : pv.vertices) {
    CHECK(reconstruction_tv(q_xz, v, q_xy) < 1e-7);
    for (std::size_t z = 0; z < 2; ++z) {
      double s = 0.0;
      for (std::size_t y = 0; y < 2; ++y) {
        CHECK(v(y, z) >= -1e-12);
        s += v(y, z);
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("infeasible pairs are rejected by the vertex enumeration") {
  JointTable q_xz = JointTable::product(Pmf::bernoulli(0.5), Pmf::bernoulli(0.5));
  JointTable q_xy = dsbs_joint(0.2);
  CHECK_THROWS(compatible_polytope_vertices(q_xz, q_xy));
}
