#include "influence/mcmc.hpp"

#include <algorithm>
#include <cmath>

namespace influence {

void SamplerConfig::validate() const {
  if (n_samples < 1) throw input_error("sampler: n_samples must be >= 1");
  if (warmup < 0) throw input_error("sampler: warmup must be >= 0");
  if (thin < 1) throw input_error("sampler: thin must be >= 1");
  if (latent_dim < 1) throw input_error("sampler: latent_dim must be >= 1");
  if (!(proposal_sd_O > 0.0) || !(proposal_sd_u > 0.0))
    throw input_error("sampler: proposal sds must be positive");
  if (!(target_accept_O > 0.0 && target_accept_O < 1.0) ||
      !(target_accept_u > 0.0 && target_accept_u < 1.0))
    throw input_error("sampler: target acceptance rates must lie in (0,1)");
}

InverseGammaParams omega2_conditional(const LatentState& state,
                                      const Hyperparams& hyper) {
  return {hyper.a_omega + 0.5 * state.n(),
          hyper.b_omega + 0.5 * state.O.squaredNorm()};
}

InverseGammaParams sigma2_conditional(const LatentState& state,
                                      const Hyperparams& hyper) {
  return {hyper.a_sigma + 0.5 * state.n() * state.latent_dim(),
          hyper.b_sigma + 0.5 * state.U.squaredNorm()};
}

double sample_inverse_gamma(const InverseGammaParams& params, Rng& rng) {
  return 1.0 / rng.gamma(params.shape, 1.0 / params.scale);
}

void gibbs_update_omega2(LatentState& state, const Hyperparams& hyper, Rng& rng) {
  state.omega2 = sample_inverse_gamma(omega2_conditional(state, hyper), rng);
}

void gibbs_update_sigma2(LatentState& state, const Hyperparams& hyper, Rng& rng) {
  state.sigma2 = sample_inverse_gamma(sigma2_conditional(state, hyper), rng);
}

namespace {

// Shared inner loops for conditionals. The dense adjacency avoids per-pair
// edge lookups; row norms of U are cached by the sweep and invalidated on
// accepted moves.
struct LikelihoodContext {
  int n;
  std::vector<std::uint8_t> adj;

  explicit LikelihoodContext(const DirectedNetwork& net)
      : n(static_cast<int>(net.vertex_count())), adj(net.dense_adjacency()) {}

  bool y(int i, int j) const {
    return adj[static_cast<std::size_t>(i) * n + j] != 0;
  }
};

double bernoulli_term(bool y, double eta) {
  return (y ? eta : 0.0) - log1p_exp(eta);
}

double log_cond_O(const LikelihoodContext& ctx, const LatentState& state,
                  int i, double candidate, bool prior_only) {
  double lp = -0.5 * candidate * candidate / state.omega2;
  if (prior_only) return lp;
  double norm = state.U.row(i).norm();
  double inv = norm > 0.0 ? 1.0 / norm : 0.0;
  for (int j = 0; j < ctx.n; ++j) {
    if (j == i) continue;
    double eta = candidate + inv * state.U.row(i).dot(state.U.row(j));
    lp += bernoulli_term(ctx.y(i, j), eta);
  }
  return lp;
}

double log_cond_u(const LikelihoodContext& ctx, const LatentState& state,
                  const Eigen::VectorXd& norms, int i,
                  const Eigen::VectorXd& candidate, bool prior_only) {
  double lp = -0.5 * candidate.squaredNorm() / state.sigma2;
  if (prior_only) return lp;
  double cnorm = candidate.norm();
  double cinv = cnorm > 0.0 ? 1.0 / cnorm : 0.0;
  for (int j = 0; j < ctx.n; ++j) {
    if (j == i) continue;
    // row i: candidate is the source position
    double dot = candidate.dot(state.U.row(j));
    lp += bernoulli_term(ctx.y(i, j), state.O(i) + cinv * dot);
    // column i: candidate is the target position
    double jinv = norms(j) > 0.0 ? 1.0 / norms(j) : 0.0;
    lp += bernoulli_term(ctx.y(j, i), state.O(j) + jinv * dot);
  }
  return lp;
}

bool mh_step_O(const LikelihoodContext& ctx, LatentState& state, int i,
               double proposal_sd, Rng& rng, bool prior_only) {
  double current = state.O(i);
  double candidate = current + proposal_sd * rng.normal();
  double log_r = log_cond_O(ctx, state, i, candidate, prior_only) -
                 log_cond_O(ctx, state, i, current, prior_only);
  if (std::log(rng.uniform()) < log_r) {
    state.O(i) = candidate;
    return true;
  }
  return false;
}

bool mh_step_u(const LikelihoodContext& ctx, LatentState& state,
               Eigen::VectorXd& norms, int i, double proposal_sd, Rng& rng,
               bool prior_only) {
  Eigen::VectorXd current = state.U.row(i);
  Eigen::VectorXd candidate(current.size());
  for (int k = 0; k < candidate.size(); ++k)
    candidate(k) = current(k) + proposal_sd * rng.normal();
  double log_r = log_cond_u(ctx, state, norms, i, candidate, prior_only) -
                 log_cond_u(ctx, state, norms, i, current, prior_only);
  if (std::log(rng.uniform()) < log_r) {
    state.U.row(i) = candidate;
    norms(i) = candidate.norm();
    return true;
  }
  return false;
}

}  // namespace

double log_full_conditional_O(int i, double candidate, const LatentState& state,
                              const DirectedNetwork& net) {
  LikelihoodContext ctx(net);
  return log_cond_O(ctx, state, i, candidate, false);
}

double log_full_conditional_u(int i, const Eigen::VectorXd& candidate,
                              const LatentState& state,
                              const DirectedNetwork& net) {
  if (candidate.size() != state.latent_dim())
    throw input_error("log_full_conditional_u: candidate has wrong dimension");
  LikelihoodContext ctx(net);
  Eigen::VectorXd norms = state.U.rowwise().norm();
  return log_cond_u(ctx, state, norms, i, candidate, false);
}

bool mh_update_O(int i, LatentState& state, const DirectedNetwork& net,
                 double proposal_sd, Rng& rng) {
  LikelihoodContext ctx(net);
  return mh_step_O(ctx, state, i, proposal_sd, rng, false);
}

bool mh_update_u(int i, LatentState& state, const DirectedNetwork& net,
                 double proposal_sd, Rng& rng) {
  LikelihoodContext ctx(net);
  Eigen::VectorXd norms = state.U.rowwise().norm();
  return mh_step_u(ctx, state, norms, i, proposal_sd, rng, false);
}

PosteriorSamples run_sampler(const DirectedNetwork& net, const Hyperparams& hyper,
                             const SamplerConfig& config) {
  config.validate();
  hyper.validate();
  const int n = static_cast<int>(net.vertex_count());
  if (n < 2) throw input_error("run_sampler: need at least two vertices");

  LikelihoodContext ctx(net);
  Rng rng(config.seed);

  // diffuse start: flat capacities, small random positions
  LatentState state;
  state.O = Eigen::VectorXd::Zero(n);
  state.U.resize(n, config.latent_dim);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < config.latent_dim; ++k)
      state.U(i, k) = rng.normal(0.0, std::sqrt(0.1));
  state.omega2 = 1.0;
  state.sigma2 = 1.0;

  Eigen::VectorXd norms = state.U.rowwise().norm();
  Eigen::VectorXd delta_O = Eigen::VectorXd::Constant(n, config.proposal_sd_O);
  Eigen::VectorXd delta_u = Eigen::VectorXd::Constant(n, config.proposal_sd_u);
  Eigen::VectorXd accept_O = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd accept_u = Eigen::VectorXd::Zero(n);

  PosteriorSamples out;
  out.draws.reserve(config.n_samples);
  out.log_lik_trace.reserve(config.n_samples);

  const long total = static_cast<long>(config.warmup) +
                     static_cast<long>(config.n_samples) * config.thin;
  const double log_sd_min = -10.0, log_sd_max = 5.0;

  for (long t = 1; t <= total; ++t) {
    const bool adapting = config.adapt && t <= config.warmup;
    const double gain = adapting ? std::pow(static_cast<double>(t), -0.6) : 0.0;

    gibbs_update_omega2(state, hyper, rng);
    for (int i = 0; i < n; ++i) {
      bool acc = mh_step_O(ctx, state, i, delta_O(i), rng, config.prior_only);
      if (adapting) {
        double ls = std::log(delta_O(i)) +
                    gain * ((acc ? 1.0 : 0.0) - config.target_accept_O);
        delta_O(i) = std::exp(std::clamp(ls, log_sd_min, log_sd_max));
      } else if (t > config.warmup && acc) {
        accept_O(i) += 1.0;
      }
    }
    gibbs_update_sigma2(state, hyper, rng);
    for (int i = 0; i < n; ++i) {
      bool acc =
          mh_step_u(ctx, state, norms, i, delta_u(i), rng, config.prior_only);
      if (adapting) {
        double ls = std::log(delta_u(i)) +
                    gain * ((acc ? 1.0 : 0.0) - config.target_accept_u);
        delta_u(i) = std::exp(std::clamp(ls, log_sd_min, log_sd_max));
      } else if (t > config.warmup && acc) {
        accept_u(i) += 1.0;
      }
    }

    if (t > config.warmup && (t - config.warmup) % config.thin == 0) {
      out.draws.push_back(state);
      out.log_lik_trace.push_back(
          config.prior_only ? 0.0 : detail::log_likelihood_dense(ctx.adj, n, state));
    }
  }

  const double kept_phase =
      static_cast<double>(config.n_samples) * config.thin;
  out.acceptance_O = accept_O / kept_phase;
  out.acceptance_u = accept_u / kept_phase;
  out.proposal_sd_O = delta_O;
  out.proposal_sd_u = delta_u;
  return out;
}

Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd& reference,
                                 const Eigen::MatrixXd& target) {
  if (reference.rows() != target.rows() || reference.cols() != target.cols())
    throw input_error("procrustes_align: shape mismatch");
  if (target.norm() == 0.0) return target;
  Eigen::MatrixXd m = target.transpose() * reference;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd q = svd.matrixU() * svd.matrixV().transpose();
  return target * q;
}

AlignedDraws procrustes_aligned_draws(std::span<const LatentState> draws) {
  if (draws.empty()) throw input_error("procrustes_aligned_draws: no draws");
  AlignedDraws out;
  out.mean_O = draws[0].O;
  out.mean_U = draws[0].U;
  out.aligned_U.reserve(draws.size());
  out.aligned_U.push_back(draws[0].U);
  for (std::size_t b = 1; b < draws.size(); ++b) {
    Eigen::MatrixXd aligned = procrustes_align(out.mean_U, draws[b].U);
    out.aligned_U.push_back(aligned);
    double w = static_cast<double>(b);
    out.mean_U = (out.mean_U * w + aligned) / (w + 1.0);
    out.mean_O = (out.mean_O * w + draws[b].O) / (w + 1.0);
  }
  return out;
}

DicResult compute_dic(std::span<const LatentState> draws,
                      const DirectedNetwork& net) {
  if (draws.size() < 2) throw input_error("compute_dic: need at least two draws");
  auto adj = net.dense_adjacency();
  const int n = static_cast<int>(net.vertex_count());

  double mean_dev = 0.0;
  for (const auto& draw : draws)
    mean_dev += -2.0 * detail::log_likelihood_dense(adj, n, draw);
  mean_dev /= static_cast<double>(draws.size());

  AlignedDraws aligned = procrustes_aligned_draws(draws);
  LatentState at_mean;
  at_mean.O = aligned.mean_O;
  at_mean.U = aligned.mean_U;
  double dev_at_mean = -2.0 * detail::log_likelihood_dense(adj, n, at_mean);

  DicResult res;
  res.mean_deviance = mean_dev;
  res.p_d = mean_dev - dev_at_mean;
  res.dic = mean_dev + res.p_d;
  return res;
}

std::optional<double> effective_sample_size(std::span<const double> trace) {
  const std::size_t m = trace.size();
  if (m < 10) throw input_error("effective_sample_size: need at least 10 points");
  double mean = 0.0;
  for (double x : trace) mean += x;
  mean /= static_cast<double>(m);
  double c0 = 0.0;
  for (double x : trace) c0 += (x - mean) * (x - mean);
  c0 /= static_cast<double>(m);
  if (c0 <= 0.0) return std::nullopt;

  auto rho = [&](std::size_t lag) {
    double c = 0.0;
    for (std::size_t k = 0; k + lag < m; ++k)
      c += (trace[k] - mean) * (trace[k + lag] - mean);
    return c / (static_cast<double>(m) * c0);
  };

  // Geyer initial positive sequence on paired autocorrelations
  double tau = -1.0;
  for (std::size_t k = 0; 2 * k + 1 < m / 2; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1e-12);
  return static_cast<double>(m) / tau;
}

}  // namespace influence
