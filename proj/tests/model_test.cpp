#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "influence/model.hpp"
#include "influence/rng.hpp"
#include "test_support.hpp"

using influence::expit;
using influence::LatentState;
using influence::DirectedNetwork;

namespace {

LatentState random_state(int n, int p, std::uint64_t seed) {
  influence::Rng rng(seed);
  LatentState s;
  s.O.resize(n);
  s.U.resize(n, p);
  for (int i = 0; i < n; ++i) {
    s.O(i) = rng.normal(0.0, 1.5);
    for (int k = 0; k < p; ++k) s.U(i, k) = rng.normal(0.0, 1.0);
  }
  return s;
}

Eigen::MatrixXd random_rotation(int p, std::uint64_t seed) {
  influence::Rng rng(seed);
  Eigen::MatrixXd m(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) m(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ();
}

}  // namespace

TEST_CASE("expit") {
  CHECK(expit(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  double x = std::log(0.73 / 0.27);
  CHECK(expit(x) == doctest::Approx(0.73).epsilon(1e-12));
  // no premature underflow: exp(-745) is still a positive subnormal, so the
  // logistic stays positive down to the double exponent limit near -745.1
  CHECK(expit(-745.0) > 0.0);
  CHECK(expit(-745.0) == doctest::Approx(std::exp(-745.0)).epsilon(1e-10));
  // the positive side saturates to exactly 1 once e^-x drops below machine
  // epsilon; log-space code paths use log1p_exp instead
  CHECK(expit(745.0) == 1.0);
  CHECK(influence::log1p_exp(745.0) == doctest::Approx(745.0));
}

TEST_CASE("edge_logit") {
  LatentState s;
  s.O.resize(2);
  s.O << 0.0, -1.85;
  s.U.resize(2, 2);

  s.U << 1.0, 0.0, 0.0, 1.0;  // orthogonal positions
  CHECK(influence::edge_logit(s, 0, 1) == doctest::Approx(0.0));

  // parallel positions of norm 2: logit = O + |u| = -1.85 + 2
  s.O << -1.85, -1.85;
  s.U << 2.0, 0.0, 2.0, 0.0;
  CHECK(influence::edge_logit(s, 0, 1) == doctest::Approx(0.15).epsilon(1e-12));

  // zero source position: projection term vanishes
  s.U.row(0).setZero();
  CHECK(influence::edge_logit(s, 0, 1) == doctest::Approx(-1.85));

  CHECK_THROWS_AS(influence::edge_logit(s, 1, 1), influence::internal_error);
}

TEST_CASE("log_likelihood closed forms") {
  // flat state: every ordered pair has probability 1/2
  for (int n : {3, 5}) {
    LatentState s;
    s.O = Eigen::VectorXd::Zero(n);
    s.U = Eigen::MatrixXd::Zero(n, 2);
    auto net = test_support::random_digraph(n, 0.4, 11);
    CHECK(influence::log_likelihood(net, s) ==
          doctest::Approx(n * (n - 1) * std::log(0.5)).epsilon(1e-12));
  }

  // single observed pair with eta = 2 contributes log expit(2); the reverse
  // pair (eta = O_1 = 0 since u_1 = 0) contributes log(1/2)
  LatentState s;
  s.O.resize(2);
  s.O << 2.0, 0.0;
  s.U = Eigen::MatrixXd::Zero(2, 2);
  DirectedNetwork net(2, {{0, 1}});
  double expected = std::log(expit(2.0)) + std::log(0.5);
  CHECK(influence::log_likelihood(net, s) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::log(expit(2.0)) == doctest::Approx(-0.126928).epsilon(1e-5));
}

TEST_CASE("log_likelihood is rotation invariant") {
  auto net = test_support::random_digraph(8, 0.3, 3);
  auto s = random_state(8, 2, 21);
  double base = influence::log_likelihood(net, s);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    LatentState rotated = s;
    rotated.U = s.U * random_rotation(2, seed);
    CHECK(influence::log_likelihood(net, rotated) ==
          doctest::Approx(base).epsilon(1e-10));
  }
}

TEST_CASE("log_likelihood drops when flipping the modal prediction") {
  // strongly separable toy state: edge 0->1 is very likely
  LatentState s;
  s.O.resize(2);
  s.O << 3.0, 3.0;
  s.U = Eigen::MatrixXd::Zero(2, 2);
  DirectedNetwork with(2, {{0, 1}, {1, 0}});
  DirectedNetwork without(2, {{1, 0}});
  CHECK(influence::log_likelihood(without, s) <
        influence::log_likelihood(with, s));
}

TEST_CASE("reparameterize") {
  LatentState s;
  s.O = Eigen::VectorXd::Zero(3);
  s.U.resize(3, 2);
  s.U << 3.0, 4.0, -2.0, 0.0, 1.0, 1.0;
  auto view = influence::reparameterize(s);
  CHECK(view.susceptibility(0) == doctest::Approx(5.0));  // 3-4-5
  CHECK(view.zero_position[0] == 0);

  // antiparallel on the first axis
  LatentState t;
  t.O = Eigen::VectorXd::Zero(2);
  t.U.resize(2, 2);
  t.U << 1.0, 0.0, -2.0, 0.0;
  auto vt = influence::reparameterize(t);
  CHECK(vt.similarity(0, 1) == doctest::Approx(-1.0));

  // 45 degrees
  LatentState w;
  w.O = Eigen::VectorXd::Zero(2);
  w.U.resize(2, 2);
  w.U << 1.0, 1.0, 1.0, 0.0;
  auto vw = influence::reparameterize(w);
  CHECK(vw.similarity(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  // zero rows flagged, tau zeroed
  LatentState z;
  z.O = Eigen::VectorXd::Zero(2);
  z.U = Eigen::MatrixXd::Zero(2, 2);
  z.U(1, 0) = 1.0;
  auto vz = influence::reparameterize(z);
  CHECK(vz.zero_position[0] == 1);
  CHECK(vz.zero_position[1] == 0);
  CHECK(vz.similarity(0, 1) == 0.0);
  CHECK(vz.spectrum.row(0).norm() == 0.0);
}

TEST_CASE("reparameterize invariants on random states") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto s = random_state(7, 3, seed);
    auto view = influence::reparameterize(s);
    for (int i = 0; i < 7; ++i) {
      CHECK(view.susceptibility(i) >= 0.0);
      if (!view.zero_position[i])
        CHECK(view.spectrum.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
      for (int j = 0; j < 7; ++j) {
        CHECK(view.similarity(i, j) == view.similarity(j, i));
        CHECK(view.similarity(i, j) >= -1.0);
        CHECK(view.similarity(i, j) <= 1.0);
      }
    }
    // edge_logit(i, j) = O_i + tau_ij * I_j whenever u_i is nonzero
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) {
        if (i == j || view.zero_position[i]) continue;
        double via_view =
            s.O(i) + view.similarity(i, j) * view.susceptibility(j);
        CHECK(influence::edge_logit(s, i, j) ==
              doctest::Approx(via_view).epsilon(1e-10));
      }
    // rotation leaves susceptibility and similarity unchanged
    LatentState rotated = s;
    rotated.U = s.U * random_rotation(3, seed + 100);
    auto rview = influence::reparameterize(rotated);
    CHECK((rview.susceptibility - view.susceptibility).cwiseAbs().maxCoeff() <
          1e-10);
    CHECK((rview.similarity - view.similarity).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("posterior_correlation_OI") {
  // perfectly aligned: O_i equals |u_i|
  LatentState a;
  a.O.resize(3);
  a.O << 1.0, 2.0, 3.0;
  a.U.resize(3, 1);
  a.U << 1.0, 2.0, 3.0;
  LatentState b = a;
  b.O = -a.O;  // perfectly anti-aligned

  std::vector<LatentState> draws{a, b};
  auto rho = influence::posterior_correlation_OI(draws);
  REQUIRE(rho.size() == 2);
  CHECK(*rho[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*rho[1] == doctest::Approx(-1.0).epsilon(1e-12));

  // zero variance flagged undefined
  LatentState flat = a;
  flat.O.setConstant(2.0);
  std::vector<LatentState> degenerate{flat, a};
  auto rho2 = influence::posterior_correlation_OI(degenerate);
  CHECK_FALSE(rho2[0].has_value());
  CHECK(rho2[1].has_value());

  // synthetic draw against the independent correlation routine
  auto s = random_state(40, 2, 5);
  std::vector<LatentState> pair{s, s};
  auto rho3 = influence::posterior_correlation_OI(pair);
  std::vector<double> xs(40), ys(40);
  for (int i = 0; i < 40; ++i) {
    xs[i] = s.O(i);
    ys[i] = s.U.row(i).norm();
  }
  CHECK(*rho3[0] ==
        doctest::Approx(test_support::pearson(xs, ys)).epsilon(1e-12));

  CHECK_THROWS_AS(
      influence::posterior_correlation_OI(std::span<const LatentState>{}),
      influence::input_error);
}
