#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "influence/graph.hpp"
#include "influence/model.hpp"
#include "influence/rng.hpp"

namespace influence {

struct SamplerConfig {
  int n_samples = 1000;  // kept draws
  int warmup = 1000;
  int thin = 1;
  int latent_dim = 2;
  double proposal_sd_O = 1.0;  // initial random-walk scales
  double proposal_sd_u = 0.5;
  bool adapt = true;  // Robbins-Monro tuning of the scales during warmup only
  double target_accept_O = 0.44;
  double target_accept_u = 0.234;
  std::uint64_t seed = 1;
  bool prior_only = false;  // test hook: drops every likelihood contribution

  void validate() const;
};

struct PosteriorSamples {
  std::vector<LatentState> draws;     // post-warmup, thinned
  std::vector<double> log_lik_trace;  // one entry per kept draw
  Eigen::VectorXd acceptance_O;       // per-vertex rates over the kept phase
  Eigen::VectorXd acceptance_u;
  Eigen::VectorXd proposal_sd_O;  // scales in force after warmup
  Eigen::VectorXd proposal_sd_u;
};

struct InverseGammaParams {
  double shape = 0.0;
  double scale = 0.0;  // rate parameter b of IG(a, b)
};

// Full conditionals of the variance hyperparameters.
InverseGammaParams omega2_conditional(const LatentState& state,
                                      const Hyperparams& hyper);
InverseGammaParams sigma2_conditional(const LatentState& state,
                                      const Hyperparams& hyper);

double sample_inverse_gamma(const InverseGammaParams& params, Rng& rng);

void gibbs_update_omega2(LatentState& state, const Hyperparams& hyper, Rng& rng);
void gibbs_update_sigma2(LatentState& state, const Hyperparams& hyper, Rng& rng);

// Log full conditional of O_i (prior term plus the Bernoulli terms of row i),
// up to an additive constant.
double log_full_conditional_O(int i, double candidate, const LatentState& state,
                              const DirectedNetwork& net);

// Log full conditional of u_i: prior term plus every likelihood term u_i
// enters, both row i and column i.
double log_full_conditional_u(int i, const Eigen::VectorXd& candidate,
                              const LatentState& state,
                              const DirectedNetwork& net);

// Gaussian random-walk Metropolis steps; return whether the proposal was
// accepted.
bool mh_update_O(int i, LatentState& state, const DirectedNetwork& net,
                 double proposal_sd, Rng& rng);
bool mh_update_u(int i, LatentState& state, const DirectedNetwork& net,
                 double proposal_sd, Rng& rng);

// Metropolis-within-Gibbs sweep: omega2, every O_i, sigma2, every u_i.
// Deterministic given the seed.
PosteriorSamples run_sampler(const DirectedNetwork& net, const Hyperparams& hyper,
                             const SamplerConfig& config);

// Orthogonal transform (rotation or reflection) of target minimizing the
// Frobenius distance to reference; no translation or scaling. An all-zero
// target is returned unchanged.
Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd& reference,
                                 const Eigen::MatrixXd& target);

// Draws brought into a common frame: each draw's U is aligned to the running
// mean of the previously aligned draws.
struct AlignedDraws {
  Eigen::VectorXd mean_O;
  Eigen::MatrixXd mean_U;
  std::vector<Eigen::MatrixXd> aligned_U;  // one per draw
};
AlignedDraws procrustes_aligned_draws(std::span<const LatentState> draws);

struct DicResult {
  double dic = 0.0;
  double p_d = 0.0;
  double mean_deviance = 0.0;
};

// Deviance Information Criterion with p_D = mean deviance minus the deviance
// at the (alignment-averaged) posterior mean.
DicResult compute_dic(std::span<const LatentState> draws,
                      const DirectedNetwork& net);

// Effective sample size by initial-positive-sequence truncation of the
// autocorrelation sums. nullopt for constant traces.
std::optional<double> effective_sample_size(std::span<const double> trace);

}  // namespace influence
