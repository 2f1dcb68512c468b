#include "influence/ppc.hpp"

#include <algorithm>
#include <cmath>

namespace influence {

DirectedNetwork simulate_network(const LatentState& state, Rng& rng) {
  state.validate();
  const int n = state.n();
  std::vector<DirectedNetwork::Edge> edges;
  for (int i = 0; i < n; ++i) {
    double norm = state.U.row(i).norm();
    double inv = norm > 0.0 ? 1.0 / norm : 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double eta = state.O(i) + inv * state.U.row(i).dot(state.U.row(j));
      if (rng.bernoulli(expit(eta)))
        edges.emplace_back(static_cast<std::uint32_t>(i),
                           static_cast<std::uint32_t>(j));
    }
  }
  return DirectedNetwork(static_cast<std::size_t>(n), std::move(edges));
}

double quantile_linear(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw input_error("quantile: empty sample");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  double h = static_cast<double>(sorted.size() - 1) * q;
  auto lo = static_cast<std::size_t>(h);
  double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::pair<double, double> credible_interval(std::vector<double> draws,
                                            double level) {
  if (draws.size() < 2)
    throw input_error("credible_interval: need at least two draws");
  if (!(level > 0.0 && level <= 1.0))
    throw input_error("credible_interval: level must lie in (0, 1]");
  std::sort(draws.begin(), draws.end());
  double alpha = (1.0 - level) / 2.0;
  return {quantile_linear(draws, alpha), quantile_linear(draws, 1.0 - alpha)};
}

std::vector<PpcStatResult> posterior_predictive_check(
    std::span<const LatentState> draws, const DirectedNetwork& observed,
    const std::vector<std::string>& statistics, Rng& rng) {
  if (draws.empty()) throw input_error("posterior_predictive_check: no draws");
  const auto& registry = graph_statistic_registry();
  std::vector<PpcStatResult> results;
  results.reserve(statistics.size());
  for (const auto& name : statistics) {
    auto it = registry.find(name);
    if (it == registry.end())
      throw input_error("unknown graph statistic '" + name + "'");
    PpcStatResult r;
    r.name = name;
    r.observed = it->second(observed);
    r.replicates.reserve(draws.size());
    results.push_back(std::move(r));
  }

  for (const auto& draw : draws) {
    DirectedNetwork replicate = simulate_network(draw, rng);
    for (std::size_t s = 0; s < statistics.size(); ++s) {
      auto value = registry.at(statistics[s])(replicate);
      if (!value) ++results[s].missing;
      results[s].replicates.push_back(value);
    }
  }

  for (auto& r : results) {
    if (!r.observed) continue;
    double le = 0, ge = 0, defined = 0;
    for (const auto& v : r.replicates) {
      if (!v) continue;
      ++defined;
      if (*v <= *r.observed) ++le;
      if (*v >= *r.observed) ++ge;
    }
    // smaller of the two one-sided tails: 1 when every replicate ties the
    // observation, 0 when the observation lies outside all replicates,
    // about 0.5 when the observation sits at the replicate median
    if (defined > 0) r.tail_probability = std::min(le / defined, ge / defined);
  }
  return results;
}

CoverageResult coverage_experiment(const LatentState& truth,
                                   const Hyperparams& hyper,
                                   const SamplerConfig& config, double level,
                                   Rng& rng) {
  if (!(level > 0.0 && level <= 1.0))
    throw input_error("coverage_experiment: level must lie in (0, 1]");
  DirectedNetwork net = simulate_network(truth, rng);
  PosteriorSamples samples = run_sampler(net, hyper, config);

  const int n = truth.n();
  const int p = truth.latent_dim();
  const std::size_t b_count = samples.draws.size();

  CoverageResult res;
  res.level = level;

  std::vector<double> column(b_count);
  int covered_O = 0;
  for (int i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < b_count; ++b) column[b] = samples.draws[b].O(i);
    auto [lo, hi] = credible_interval(column, level);
    if (truth.O(i) >= lo && truth.O(i) <= hi) ++covered_O;
  }
  res.coverage_O = static_cast<double>(covered_O) / n;

  AlignedDraws aligned = procrustes_aligned_draws(samples.draws);
  Eigen::MatrixXd truth_aligned = procrustes_align(aligned.mean_U, truth.U);
  int covered_u = 0;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < p; ++k) {
      for (std::size_t b = 0; b < b_count; ++b)
        column[b] = aligned.aligned_U[b](i, k);
      auto [lo, hi] = credible_interval(column, level);
      if (truth_aligned(i, k) >= lo && truth_aligned(i, k) <= hi) ++covered_u;
    }
  }
  res.coverage_u = static_cast<double>(covered_u) / (n * p);
  return res;
}

}  // namespace influence
