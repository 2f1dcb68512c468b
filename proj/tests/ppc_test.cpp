#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "influence/ppc.hpp"
#include "test_support.hpp"

using influence::DirectedNetwork;
using influence::LatentState;
using influence::Rng;

namespace {

LatentState flat_state(int n, int p, double o) {
  LatentState s;
  s.O = Eigen::VectorXd::Constant(n, o);
  s.U = Eigen::MatrixXd::Zero(n, p);
  return s;
}

}  // namespace

TEST_CASE("simulate_network extremes and determinism") {
  Rng rng(1);
  auto empty = influence::simulate_network(flat_state(6, 2, -1e6), rng);
  CHECK(empty.edge_count() == 0);
  CHECK(empty.vertex_count() == 6);

  // eta = 0 everywhere: edge count is Binomial(n(n-1), 1/2)
  const int n = 20;
  const double pairs = n * (n - 1);
  double total = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r)
    total += influence::simulate_network(flat_state(n, 2, 0.0), rng).edge_count();
  double mean_count = total / reps;
  double se = std::sqrt(pairs * 0.25 / reps);
  CHECK(std::fabs(mean_count - pairs / 2.0) < 4.0 * se);

  Rng a(7), b(7);
  auto na = influence::simulate_network(flat_state(8, 2, -1.0), a);
  auto nb = influence::simulate_network(flat_state(8, 2, -1.0), b);
  CHECK(na.edges() == nb.edges());
}

TEST_CASE("simulate_network respects the per-pair probabilities") {
  // 4-vertex state with distinct probabilities; no self-loops ever
  LatentState s;
  s.O.resize(4);
  s.O << -1.0, 0.0, 0.5, -2.0;
  s.U.resize(4, 2);
  s.U << 1.0, 0.0, 0.0, 1.5, -0.5, 0.5, 0.3, -0.2;
  Rng rng(9);
  const int reps = 10000;
  Eigen::MatrixXd hits = Eigen::MatrixXd::Zero(4, 4);
  for (int r = 0; r < reps; ++r) {
    auto net = influence::simulate_network(s, rng);
    for (auto [a, b] : net.edges()) {
      CHECK(a != b);
      hits(a, b) += 1.0;
    }
  }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      double p = influence::expit(influence::edge_logit(s, i, j));
      double se = std::sqrt(p * (1.0 - p) / reps);
      CHECK(std::fabs(hits(i, j) / reps - p) < 5.0 * se + 1e-9);
    }
}

TEST_CASE("quantile rule matches the interpolation oracle") {
  std::vector<double> draws(100);
  for (int k = 0; k < 100; ++k) draws[k] = k + 1;
  auto [lo, hi] = influence::credible_interval(draws, 0.95);
  // h = (n-1) q + 1 on 1..100: 3.475 and 97.525
  CHECK(lo == doctest::Approx(3.475).epsilon(1e-12));
  CHECK(hi == doctest::Approx(97.525).epsilon(1e-12));

  std::vector<double> constant(10, 2.5);
  auto [clo, chi_] = influence::credible_interval(constant, 0.9);
  CHECK(clo == 2.5);
  CHECK(chi_ == 2.5);

  // symmetric sample gives a symmetric interval
  Rng rng(11);
  std::vector<double> sym;
  for (int k = 0; k < 5000; ++k) {
    double x = rng.normal();
    sym.push_back(x);
    sym.push_back(-x);
  }
  auto [slo, shi] = influence::credible_interval(sym, 0.8);
  CHECK(slo == doctest::Approx(-shi).epsilon(1e-12));
}

TEST_CASE("ppc tail probabilities at the extremes") {
  // replicates are all empty networks; the observed network is also empty:
  // every replicate equals the observation, tail probability 1
  std::vector<LatentState> draws(20, flat_state(5, 2, -1e6));
  DirectedNetwork observed_empty(5, {});
  Rng rng(13);
  auto res = influence::posterior_predictive_check(draws, observed_empty,
                                                   {"density"}, rng);
  REQUIRE(res.size() == 1);
  REQUIRE(res[0].tail_probability.has_value());
  CHECK(*res[0].tail_probability == doctest::Approx(1.0));

  // observed far outside every replicate: tail probability 0
  std::vector<DirectedNetwork::Edge> all;
  for (std::uint32_t i = 0; i < 5; ++i)
    for (std::uint32_t j = 0; j < 5; ++j)
      if (i != j) all.emplace_back(i, j);
  DirectedNetwork observed_full(5, std::move(all));
  Rng rng2(14);
  auto res2 = influence::posterior_predictive_check(draws, observed_full,
                                                    {"density"}, rng2);
  REQUIRE(res2[0].tail_probability.has_value());
  CHECK(*res2[0].tail_probability == doctest::Approx(0.0));

  Rng rng3(15);
  CHECK_THROWS_AS(influence::posterior_predictive_check(
                      draws, observed_empty, {"no_such_statistic"}, rng3),
                  influence::input_error);
}

TEST_CASE("ppc records undefined replicate statistics as missing") {
  // empty replicates leave assortativity undefined
  std::vector<LatentState> draws(15, flat_state(6, 2, -1e6));
  DirectedNetwork observed(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}});
  Rng rng(17);
  auto res = influence::posterior_predictive_check(draws, observed,
                                                   {"assortativity"}, rng);
  CHECK(res[0].missing == 15);
  CHECK(res[0].replicates.size() == 15);
}

TEST_CASE("ppc self-consistency smoke") {
  // data simulated from the model, fitted, then checked against itself:
  // tails should not be extreme
  LatentState truth = flat_state(15, 2, -0.5);
  Rng rng(19);
  truth.U = Eigen::MatrixXd::Zero(15, 2);
  for (int i = 0; i < 15; ++i)
    for (int k = 0; k < 2; ++k) truth.U(i, k) = rng.normal(0.0, 0.7);
  DirectedNetwork observed = influence::simulate_network(truth, rng);

  influence::Hyperparams hyper{1.0, 1.0, 1.0, 1.0};
  influence::SamplerConfig config;
  config.n_samples = 200;
  config.warmup = 400;
  config.thin = 1;
  config.latent_dim = 2;
  config.seed = 20;
  auto samples = influence::run_sampler(observed, hyper, config);
  Rng rng2(21);
  auto res = influence::posterior_predictive_check(
      samples.draws, observed, {"density", "degree_sd"}, rng2);
  for (const auto& r : res) {
    REQUIRE(r.tail_probability.has_value());
    CHECK(*r.tail_probability > 0.01);
  }
}

TEST_CASE("coverage_experiment sanity bounds") {
  LatentState truth;
  Rng rng(23);
  truth.O.resize(12);
  truth.U.resize(12, 2);
  for (int i = 0; i < 12; ++i) {
    truth.O(i) = rng.normal(0.0, 1.0);
    for (int k = 0; k < 2; ++k) truth.U(i, k) = rng.normal(0.0, 1.0);
  }

  influence::Hyperparams hyper{1.0, 1.0, 1.0, 1.0};
  influence::SamplerConfig config;
  config.n_samples = 250;
  config.warmup = 400;
  config.thin = 1;
  config.latent_dim = 2;
  config.seed = 24;

  // degenerate level: intervals span the whole sampled range
  auto full = influence::coverage_experiment(truth, hyper, config, 1.0, rng);
  CHECK(full.coverage_O >= 0.8);
  CHECK(full.coverage_O <= 1.0);
  CHECK(full.coverage_u >= 0.8);
  CHECK(full.coverage_u <= 1.0);

  Rng rng2(25);
  auto mid = influence::coverage_experiment(truth, hyper, config, 0.9, rng2);
  CHECK(mid.coverage_O >= 0.5);
  CHECK(mid.coverage_u >= 0.5);
  CHECK(mid.level == doctest::Approx(0.9));

  Rng rng3(26);
  CHECK_THROWS_AS(
      influence::coverage_experiment(truth, hyper, config, 0.0, rng3),
      influence::input_error);
}

TEST_CASE("coverage approaches the nominal level as n grows") {
  influence::Hyperparams hyper{3.0, 2.0, 3.0, 2.0};
  influence::SamplerConfig config;
  config.n_samples = 600;
  config.warmup = 800;
  config.thin = 1;
  config.latent_dim = 2;

  for (int n : {20, 50, 100}) {
    Rng rng(260 + n);
    influence::LatentState truth;
    truth.omega2 = 1.0 / rng.gamma(3.0, 0.5);
    truth.sigma2 = 1.0 / rng.gamma(3.0, 0.5);
    truth.O.resize(n);
    truth.U.resize(n, 2);
    for (int i = 0; i < n; ++i) {
      truth.O(i) = rng.normal(0.0, std::sqrt(truth.omega2));
      for (int k = 0; k < 2; ++k)
        truth.U(i, k) = rng.normal(0.0, std::sqrt(truth.sigma2));
    }
    config.seed = 2600 + n;
    auto res = influence::coverage_experiment(truth, hyper, config, 0.95, rng);
    INFO("n=", n, " coverage_O=", res.coverage_O, " coverage_u=", res.coverage_u);
    CHECK(std::fabs(res.coverage_O - 0.95) <= 0.10);
    CHECK(std::fabs(res.coverage_u - 0.95) <= 0.10);
  }
}
