#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "influence/errors.hpp"
#include "influence/graph.hpp"

namespace influence {

// One configuration of the model parameters: per-vertex capacity O on the
// log-odds scale, latent positions U (one row per vertex), and the variance
// hyperparameters of the hierarchical prior.
struct LatentState {
  Eigen::VectorXd O;  // n
  Eigen::MatrixXd U;  // n x p
  double omega2 = 1.0;
  double sigma2 = 1.0;

  int n() const { return static_cast<int>(O.size()); }
  int latent_dim() const { return static_cast<int>(U.cols()); }
  void validate() const;
};

struct Hyperparams {
  double a_omega = 1.0;
  double b_omega = 1.0;
  double a_sigma = 1.0;
  double b_sigma = 1.0;
  void validate() const;
};

// Derived influence quantities: susceptibility I_j = |u_j|, pairwise cosine
// similarity tau, and unit directions theta (political spectrum). Rows of U
// with zero norm get tau = 0 and a zero theta row, flagged in zero_position.
struct ReparamView {
  Eigen::VectorXd susceptibility;  // I, n
  Eigen::MatrixXd similarity;      // tau, n x n, diagonal zero
  Eigen::MatrixXd spectrum;        // theta, n x p
  std::vector<std::uint8_t> zero_position;
};

// Numerically stable logistic function. Stays strictly positive down to the
// double exponent limit (exp underflows to 0 only below about -745.1);
// log-space callers should use log1p_exp instead of log(expit(x)).
inline double expit(double x) {
  if (x >= 0.0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow; log expit(x) = -log1p_exp(-x)
inline double log1p_exp(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Log-odds of a directed link i -> j: O_i + (u_i . u_j) / |u_i|, with the
// projection term defined as 0 when |u_i| = 0.
double edge_logit(const LatentState& state, int i, int j);

// Bernoulli log-likelihood of the whole adjacency under the model.
double log_likelihood(const DirectedNetwork& net, const LatentState& state);

ReparamView reparameterize(const LatentState& state);

// Pearson correlation between the capacities and susceptibilities within each
// draw; a draw with zero variance on either side is flagged undefined.
std::vector<std::optional<double>> posterior_correlation_OI(
    std::span<const LatentState> draws);

namespace detail {

// log-likelihood against a row-major dense adjacency (hot-loop variant)
double log_likelihood_dense(const std::vector<std::uint8_t>& adjacency, int n,
                            const LatentState& state);

}  // namespace detail

}  // namespace influence
