#include "influence/model.hpp"

#include <cmath>

namespace influence {

void LatentState::validate() const {
  if (U.rows() != O.size())
    throw input_error("latent state: row count of U must match length of O");
  if (U.cols() < 1) throw input_error("latent state: latent dimension must be >= 1");
  if (!(omega2 > 0.0) || !(sigma2 > 0.0))
    throw input_error("latent state: omega2 and sigma2 must be positive");
}

void Hyperparams::validate() const {
  if (!(a_omega > 0.0) || !(b_omega > 0.0) || !(a_sigma > 0.0) || !(b_sigma > 0.0))
    throw input_error("hyperparameters must be strictly positive");
}

double edge_logit(const LatentState& state, int i, int j) {
  if (i == j) throw internal_error("edge_logit: i == j");
  double norm = state.U.row(i).norm();
  if (norm == 0.0) return state.O(i);
  return state.O(i) + state.U.row(i).dot(state.U.row(j)) / norm;
}

double log_likelihood(const DirectedNetwork& net, const LatentState& state) {
  if (static_cast<int>(net.vertex_count()) != state.n())
    throw input_error("log_likelihood: network and state dimensions differ");
  auto adj = net.dense_adjacency();
  return detail::log_likelihood_dense(adj, state.n(), state);
}

namespace detail {

double log_likelihood_dense(const std::vector<std::uint8_t>& adjacency, int n,
                            const LatentState& state) {
  double ll = 0.0;
  for (int i = 0; i < n; ++i) {
    double norm = state.U.row(i).norm();
    double inv = norm > 0.0 ? 1.0 / norm : 0.0;
    const std::uint8_t* row = adjacency.data() + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double eta = state.O(i) + inv * state.U.row(i).dot(state.U.row(j));
      // y*eta - log(1 + e^eta) is the stable Bernoulli log-density
      ll += (row[j] ? eta : 0.0) - log1p_exp(eta);
    }
  }
  return ll;
}

}  // namespace detail

ReparamView reparameterize(const LatentState& state) {
  const int n = state.n();
  const int p = state.latent_dim();
  ReparamView view;
  view.susceptibility.resize(n);
  view.similarity = Eigen::MatrixXd::Zero(n, n);
  view.spectrum = Eigen::MatrixXd::Zero(n, p);
  view.zero_position.assign(n, 0);

  for (int i = 0; i < n; ++i) {
    double norm = state.U.row(i).norm();
    view.susceptibility(i) = norm;
    if (norm > 0.0) {
      view.spectrum.row(i) = state.U.row(i) / norm;
    } else {
      view.zero_position[i] = 1;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double ni = view.susceptibility(i);
      double nj = view.susceptibility(j);
      double tau = 0.0;
      if (ni > 0.0 && nj > 0.0) {
        tau = state.U.row(i).dot(state.U.row(j)) / (ni * nj);
        // clamp cosine rounding spill
        tau = std::min(1.0, std::max(-1.0, tau));
      }
      view.similarity(i, j) = tau;
      view.similarity(j, i) = tau;
    }
  }
  return view;
}

namespace {

std::optional<double> pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(x.size());
  double mx = x.mean(), my = y.mean();
  double sxx = (x.array() - mx).square().sum() / n;
  double syy = (y.array() - my).square().sum() / n;
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  double sxy = ((x.array() - mx) * (y.array() - my)).sum() / n;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

std::vector<std::optional<double>> posterior_correlation_OI(
    std::span<const LatentState> draws) {
  if (draws.size() < 2)
    throw input_error("posterior_correlation_OI: need at least two draws");
  if (draws.front().n() < 2)
    throw input_error("posterior_correlation_OI: need at least two vertices");
  std::vector<std::optional<double>> out;
  out.reserve(draws.size());
  for (const auto& draw : draws) {
    Eigen::VectorXd norms = draw.U.rowwise().norm();
    out.push_back(pearson(draw.O, norms));
  }
  return out;
}

}  // namespace influence
