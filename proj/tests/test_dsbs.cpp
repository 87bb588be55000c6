#include <cmath>
#include <random>

#include <doctest.h>

#include "coordlab/dsbs.hpp"

using namespace coordlab;

TEST_CASE("theta_tilde and the cascade identity") {
  // frozen: 1/2 - sqrt(0.6)/2
  CHECK(wyner_theta_tilde(0.2) ==
        doctest::Approx(0.11270166537925831).epsilon(1e-14));
  CHECK(wyner_theta_tilde(0.0) == 0.0);
  CHECK(wyner_theta_tilde(0.5) == doctest::Approx(0.5));
  // two BSC(theta_tilde) in cascade equal BSC(theta)
  for (double theta : {0.05, 0.2, 0.4}) {
    double tt = wyner_theta_tilde(theta);
    CHECK(2.0 * tt * (1.0 - tt) == doctest::Approx(theta).epsilon(1e-12));
  }
  CHECK_THROWS_AS(wyner_theta_tilde(0.6), std::domain_error);
}

TEST_CASE("common information closed form") {
  // frozen high-precision values of 1 + h(theta) - 2 h(theta_tilde)
  CHECK(dsbs_wyner_ci(0.2) ==
        doctest::Approx(0.7059049009832657).epsilon(1e-12));
  CHECK_THROWS_AS(dsbs_wyner_ci(0.5), std::domain_error);
  CHECK_THROWS_AS(dsbs_wyner_ci(0.0), std::domain_error);
}

TEST_CASE("gap closed form at the reference point") {
  // frozen: h(0.2) + h(0.5 - 0.4 sqrt(0.6)) - h(theta_tilde) - h(0.26)
  double gap = rcs_gap_lower_bound(GapInputs(0.2, 0.1));
  CHECK(gap == doctest::Approx(0.08897895802993847).epsilon(1e-12));
  CHECK(std::abs(gap - 0.08892) < 1e-4);
}

TEST_CASE("gap is positive on the whole valid grid") {
  for (int i = 1; i <= 9; ++i)
    for (int j = 1; j <= 9; ++j) {
      double theta = 0.05 * i, tau = 0.05 * j;
      CHECK(rcs_gap_lower_bound(GapInputs(theta, tau)) > 0.0);
    }
}

TEST_CASE("gap vanishes as tau approaches zero") {
  CHECK(rcs_gap_lower_bound(GapInputs(0.2, 1e-6)) < 1e-4);
  for (const GapGridRow& row : figure4_grid(0.05, 0.45, 0.001, 0.001, 9)) {
    CHECK(row.gap_bits < 0.01);
  }
}

TEST_CASE("gap is unimodal in theta at tau = 0.1") {
  double prev = 0.0;
  bool rising = true;
  int direction_changes = 0;
  for (int i = 1; i <= 48; ++i) {
    double g = rcs_gap_lower_bound(GapInputs(0.01 * i, 0.1));
    if (i > 1) {
      bool up = g > prev;
      if (rising && !up) {
        rising = false;
        ++direction_changes;
      }
      CHECK((rising ? up : !up));
    }
    prev = g;
  }
  CHECK(direction_changes == 1);
}

TEST_CASE("case-5 witness ties the closed forms together") {
  GapInputs g(0.2, 0.1);
  RegionWitness w = case5_witness(g);
  CHECK(w.marginal_residual < 1e-12);
  // frozen: I(Z;W) = 1 - h(theta_tilde)
  CHECK(w.i_zw == doctest::Approx(0.4919884030479517).epsilon(1e-12));
  // I(Z,Y;W) recovers the common information of DSBS(theta)
  CHECK(w.i_zyw == doctest::Approx(dsbs_wyner_ci(0.2)).epsilon(1e-10));
  // and the gap is exactly C(Z,Y) - I(X,Y;W)
  CHECK(dsbs_wyner_ci(0.2) - w.i_xyw ==
        doctest::Approx(rcs_gap_lower_bound(g)).epsilon(1e-9));
  // chain X - Z - W - Y holds by construction
  std::size_t gx[] = {0}, gz[] = {1}, gw[] = {2}, gy[] = {3}, gwy[] = {2, 3},
              gxz[] = {0, 1};
  CHECK(conditional_mutual_information(w.joint, gx, gwy, gz) < 1e-12);
  CHECK(conditional_mutual_information(w.joint, gxz, gy, gw) < 1e-12);
}

TEST_CASE("figure4 grid") {
  auto one = figure4_grid(0.2, 0.2, 0.1, 0.1, 1);
  REQUIRE(one.size() == 1);
  CHECK(std::abs(one[0].gap_bits - 0.08892) < 1e-4);

  auto grid = figure4_grid(0.05, 0.45, 0.05, 0.45, 9);
  REQUIRE(grid.size() == 81);
  for (const auto& row : grid) CHECK(row.gap_bits > 0.0);

  CHECK_THROWS(figure4_grid(0.0, 0.4, 0.1, 0.2, 5));
  CHECK_THROWS(figure4_grid(0.1, 0.4, 0.1, 0.2, 0));
}

TEST_CASE("concave-gap lemma on random valid tuples") {
  auto h = [](double t) { return binary_entropy(t); };
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(1e-4, 0.5 - 1e-4);
  int tested = 0;
  while (tested < 1000) {
    double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    if (!(a < std::min(b, c) && d > std::max(b, c) && b + c > a + d)) continue;
    ++tested;
    CHECK(-h(a) + h(b) + h(c) - h(d) > 0.0);
  }
}

TEST_CASE("third-condition identity b + c - a - d = tau sqrt(1-2theta) - tau (1-2theta)") {
  for (int i = 1; i <= 50; ++i)
    for (int j = 1; j <= 50; ++j) {
      double theta = 0.49 * i / 51.0, tau = 0.49 * j / 51.0;
      GapInputs g(theta, tau);
      double root = std::sqrt(1.0 - 2.0 * theta);
      double a = wyner_theta_tilde(theta);
      double b = 0.5 - (0.5 - tau) * root;
      double c = theta;
      double d = g.xy_flip();
      double lhs = b + c - a - d;
      double rhs = tau * root - tau * (1.0 - 2.0 * theta);
      CHECK(std::abs(lhs - rhs) < 1e-12);
      CHECK(rhs > 0.0);
    }
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(GapInputs(0.0, 0.1), std::domain_error);
  CHECK_THROWS_AS(GapInputs(0.5, 0.1), std::domain_error);
  CHECK_THROWS_AS(GapInputs(0.2, 0.0), std::domain_error);
  CHECK_THROWS_AS(GapInputs(0.2, 0.5), std::domain_error);
  CHECK_THROWS(bsc(1.5));
  CHECK_THROWS(dsbs_joint(-0.1));
}
