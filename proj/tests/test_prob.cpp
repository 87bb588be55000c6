#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "coordlab/json_io.hpp"
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
  rows.reserve(in * out);
  for (std::size_t i = 0; i < in; ++i) {
    Pmf row = random_pmf(rng, out);
    rows.insert(rows.end(), row.probs().begin(), row.probs().end());
  }
  return Channel(in, out, rows);
}

}  // namespace

TEST_CASE("pmf constructors and validation") {
  Pmf u = Pmf::uniform(4);
  CHECK(u(2) == doctest::Approx(0.25));
  Pmf pt = Pmf::point_mass(3, 1);
  CHECK(pt(1) == 1.0);
  CHECK(pt(0) == 0.0);
  Pmf b = Pmf::bernoulli(0.3);
  CHECK(b(1) == doctest::Approx(0.3));
  CHECK_THROWS(Pmf({0.5, 0.6}));
  CHECK_THROWS(Pmf({-0.1, 1.1}));
}

TEST_CASE("entropy basics") {
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  // frozen: h(0.2)
  CHECK(binary_entropy(0.2) ==
        doctest::Approx(0.7219280948873623).epsilon(1e-12));
  CHECK_THROWS_AS(binary_entropy(-0.01), std::domain_error);
  CHECK_THROWS_AS(binary_entropy(1.01), std::domain_error);
  CHECK(entropy(Pmf::uniform(8)) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(entropy(Pmf::point_mass(5, 2)) == 0.0);
}

TEST_CASE("tv distance") {
  JointTable p({2}, {1.0, 0.0});
  JointTable q({2}, {0.0, 1.0});
  CHECK(tv_distance(p, q) == doctest::Approx(1.0));
  CHECK(tv_distance(p, p) == 0.0);
  JointTable r({3}, {0.5, 0.25, 0.25});
  CHECK_THROWS(tv_distance(p, r));
}

TEST_CASE("compose and mutual information") {
  JointTable j = compose(Pmf::bernoulli(0.25), Channel({2, 2, {0.9, 0.1, 0.1, 0.9}}));
  CHECK(j[0] == doctest::Approx(0.675));  // P(0,0) = 0.75 * 0.9
  CHECK(j[1] == doctest::Approx(0.075));
  CHECK(j[2] == doctest::Approx(0.025));
  CHECK(j[3] == doctest::Approx(0.225));

  std::size_t a[] = {0}, b[] = {1};
  JointTable indep = JointTable::product(Pmf::bernoulli(0.3), Pmf::bernoulli(0.7));
  CHECK(mutual_information(indep, a, b) == doctest::Approx(0.0).epsilon(1e-12));

  JointTable ident({2, 2}, {0.5, 0.0, 0.0, 0.5});
  CHECK(mutual_information(ident, a, b) == doctest::Approx(1.0).epsilon(1e-12));

  // DSBS(theta): I(Z;Y) = 1 - h(theta)
  double theta = 0.2;
  JointTable dsbs({2, 2}, {(1 - theta) / 2, theta / 2, theta / 2, (1 - theta) / 2});
  CHECK(mutual_information(dsbs, a, b) ==
        doctest::Approx(1.0 - binary_entropy(theta)).epsilon(1e-12));
}

TEST_CASE("conditional mutual information vanishes on a Markov chain") {
  std::mt19937_64 rng(7);
  for (int it = 0; it < 20; ++it) {
    JointTable qxz = compose(random_pmf(rng, 2), random_channel(rng, 2, 3));
    Channel y_given_z = random_channel(rng, 3, 2);
    // p(x,z,y) = q(x,z) c(y|z): chain X - Z - Y
    std::vector<double> probs;
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t z = 0; z < 3; ++z)
        for (std::size_t y = 0; y < 2; ++y)
          probs.push_back(qxz[x * 3 + z] * y_given_z(y, z));
    JointTable p({2, 3, 2}, probs);
    std::size_t gx[] = {0}, gy[] = {2}, gz[] = {1};
    CHECK(conditional_mutual_information(p, gx, gy, gz) ==
          doctest::Approx(0.0).epsilon(1e-10));
  }
}

TEST_CASE("marginalize and extraction round trips") {
  std::mt19937_64 rng(11);
  JointTable qxz = compose(random_pmf(rng, 3), random_channel(rng, 3, 2));
  Channel wz = random_channel(rng, 2, 4);
  Channel yw = random_channel(rng, 4, 2);
  JointTable p = markov_chain_joint(qxz, wz, yw);
  REQUIRE(p.num_axes() == 4);
  CHECK(p.axis_size(0) == 3);
  CHECK(p.axis_size(2) == 4);

  std::size_t keep_xz[] = {0, 1};
  CHECK(tv_distance(marginalize(p, keep_xz), qxz) < 1e-12);

  Channel wz_back = conditional(p, 1, 2);
  for (std::size_t z = 0; z < 2; ++z)
    for (std::size_t w = 0; w < 4; ++w)
      CHECK(wz_back(w, z) == doctest::Approx(wz(w, z)).epsilon(1e-10));

  Pmf pz = marginal_pmf(p, 1);
  Pmf qz = marginal_pmf(qxz, 1);
  for (std::size_t z = 0; z < 2; ++z)
    CHECK(pz(z) == doctest::Approx(qz(z)).epsilon(1e-12));

  // grouping of I: I(X,Z;W,Y) well-defined
  std::size_t gxz[] = {0, 1}, gwy[] = {2, 3};
  double i = mutual_information(p, gxz, gwy);
  CHECK(i >= 0.0);
}

// Total-variation lemma suite: data processing, same-channel preservation,
// and the conditional-expectation form, each on 100 random instances.
TEST_CASE("tv: data processing never increases distance") {
  std::mt19937_64 rng(21);
  for (int it = 0; it < 100; ++it) {
    Pmf p = random_pmf(rng, 4), q = random_pmf(rng, 4);
    Channel c = random_channel(rng, 4, 3);
    JointTable jp = compose(p, c), jq = compose(q, c);
    std::size_t out_axis[] = {1};
    double before = tv_distance(JointTable({4}, p.probs()), JointTable({4}, q.probs()));
    double after =
        tv_distance(marginalize(jp, out_axis), marginalize(jq, out_axis));
    CHECK(after <= before + 1e-12);
  }
}

TEST_CASE("tv: attaching a common channel preserves distance exactly") {
  std::mt19937_64 rng(22);
  for (int it = 0; it < 100; ++it) {
    Pmf p = random_pmf(rng, 5), q = random_pmf(rng, 5);
    Channel c = random_channel(rng, 5, 3);
    double before = tv_distance(JointTable({5}, p.probs()), JointTable({5}, q.probs()));
    double joint = tv_distance(compose(p, c), compose(q, c));
    CHECK(joint == doctest::Approx(before).epsilon(1e-12));
  }
}

TEST_CASE("tv: expectation form over a common marginal") {
  std::mt19937_64 rng(23);
  for (int it = 0; it < 100; ++it) {
    Pmf m = random_pmf(rng, 4);
    Channel c1 = random_channel(rng, 4, 3), c2 = random_channel(rng, 4, 3);
    double joint = tv_distance(compose(m, c1), compose(m, c2));
    double expect = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < 3; ++b) row += std::abs(c1(b, a) - c2(b, a));
      expect += m(a) * row / 2.0;
    }
    CHECK(joint == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("json round trip") {
  std::mt19937_64 rng(31);
  JointTable p = compose(random_pmf(rng, 3), random_channel(rng, 3, 4));
  JointTable back = joint_from_json(to_json(p));
  CHECK(back.axis_sizes() == p.axis_sizes());
  CHECK(tv_distance(back, p) == 0.0);

  Channel c = random_channel(rng, 2, 5);
  Channel cb = channel_from_json(to_json(c));
  CHECK(cb.rows() == c.rows());

  Pmf m = random_pmf(rng, 6);
  CHECK(pmf_from_json(to_json(m)).probs() == m.probs());

  CHECK_THROWS(joint_from_json(nlohmann::json{{"axes", {2, 2}}}));
  CHECK_THROWS(joint_from_json(
      nlohmann::json{{"axes", {2}}, {"probs", {0.5, 0.4}}}));
}
