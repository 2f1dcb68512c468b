#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "influence/graph.hpp"
#include "influence/mcmc.hpp"
#include "influence/model.hpp"
#include "influence/rng.hpp"

namespace influence {

// One network drawn from the sampling distribution at the given parameters:
// independent Bernoulli(expit(edge_logit)) for every ordered pair.
DirectedNetwork simulate_network(const LatentState& state, Rng& rng);

// Quantile with linear interpolation between order statistics
// (h = (m - 1) q). Shared by every interval computation in the project.
double quantile_linear(std::span<const double> sorted, double q);

// Central percentile interval at the given level.
std::pair<double, double> credible_interval(std::vector<double> draws,
                                            double level);

struct PpcStatResult {
  std::string name;
  std::optional<double> observed;
  std::vector<std::optional<double>> replicates;  // one per draw
  // smaller of the two one-sided tail fractions: 1 when every replicate ties
  // the observation, 0 when the observation lies outside all replicates
  std::optional<double> tail_probability;
  int missing = 0;  // replicates where the statistic was undefined
};

// For each posterior draw, simulates one replicate network and evaluates the
// named statistics from the graph registry against the observed network.
std::vector<PpcStatResult> posterior_predictive_check(
    std::span<const LatentState> draws, const DirectedNetwork& observed,
    const std::vector<std::string>& statistics, Rng& rng);

struct CoverageResult {
  double coverage_O = 0.0;  // fraction of capacities inside their interval
  double coverage_u = 0.0;  // fraction of aligned position coordinates
  double level = 0.0;
};

// Simulates one network from truth, refits, and reports the fraction of true
// parameters covered by per-coordinate percentile intervals. Position
// coordinates are compared after aligning the truth to the posterior frame.
CoverageResult coverage_experiment(const LatentState& truth,
                                   const Hyperparams& hyper,
                                   const SamplerConfig& config, double level,
                                   Rng& rng);

}  // namespace influence
