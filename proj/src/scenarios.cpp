#include "influence/scenarios.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "influence/model.hpp"

namespace influence {

std::string to_string(CapacityDist d) {
  return d == CapacityDist::constant_calibrated ? "constant" : "gamma";
}
std::string to_string(SusceptibilityDist d) {
  return d == SusceptibilityDist::constant_two ? "constant" : "gamma";
}
std::string to_string(ModularityRegime r) {
  return r == ModularityRegime::low ? "low" : "high";
}
std::string to_string(InitiatorRule r) {
  return r == InitiatorRule::random_pair ? "random" : "max_capacity";
}

void ScenarioSpec::validate() const {
  if (n < 2) throw input_error("scenario: n must be >= 2");
  if (!(kappa >= 0.0 && kappa < 1.0))
    throw input_error("scenario: kappa must lie in [0, 1)");
  if (initiator_rule == InitiatorRule::max_capacity &&
      o_dist == CapacityDist::constant_calibrated)
    throw input_error(
        "scenario: max-capacity initiators require non-constant capacities");
}

Partition half_partition(int n) {
  Partition p;
  p.labels.resize(n);
  int half = (n + 1) / 2;
  for (int i = 0; i < n; ++i) p.labels[i] = i < half ? 0 : 1;
  p.k = n > 1 ? 2 : 1;
  return p;
}

Eigen::VectorXd sample_capacities(const ScenarioSpec& spec, double k_star,
                                  Rng& rng) {
  Eigen::VectorXd o(spec.n);
  if (spec.o_dist == CapacityDist::constant_calibrated) {
    o.setConstant(4.0 - k_star);
  } else {
    for (int i = 0; i < spec.n; ++i)
      o(i) = rng.gamma(3.0, 4.0 / 3.0) - k_star;  // shape 3, rate 3/4
  }
  return o;
}

Eigen::VectorXd sample_susceptibilities(const ScenarioSpec& spec, Rng& rng) {
  Eigen::VectorXd s(spec.n);
  if (spec.i_dist == SusceptibilityDist::constant_two) {
    s.setConstant(2.0);
  } else {
    for (int i = 0; i < spec.n; ++i)
      s(i) = rng.gamma(14.0 / 5.0, 5.0 / 7.0);  // shape 14/5, rate 7/5
  }
  return s;
}

Eigen::MatrixXd sample_tau_matrix(int n, double kappa, const Partition& groups,
                                  Rng& rng) {
  if (!(kappa >= 0.0 && kappa < 1.0))
    throw input_error("sample_tau_matrix: kappa must lie in [0, 1)");
  if (static_cast<int>(groups.labels.size()) != n)
    throw input_error("sample_tau_matrix: partition size mismatch");
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(n, n);
  const double shape = 1.0 - kappa;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double b = rng.beta(shape, 1.0);
      double t = groups.labels[i] == groups.labels[j] ? 1.0 - 2.0 * b
                                                      : -1.0 + 2.0 * b;
      tau(i, j) = t;
      tau(j, i) = t;
    }
  }
  return tau;
}

namespace {

// Monte Carlo view of the scenario's generative law: pre-shift capacities,
// susceptibilities, and similarities for exchangeable vertex pairs, so the
// expected average degree is 2 (n-1) E[expit(G - k + tau I)].
struct CalibrationSample {
  std::vector<double> pre_shift_capacity;
  std::vector<double> susceptibility;
  std::vector<double> tau;

  double expected_degree(double k_star, int n) const {
    double acc = 0.0;
    for (std::size_t s = 0; s < pre_shift_capacity.size(); ++s)
      acc += expit(pre_shift_capacity[s] - k_star + tau[s] * susceptibility[s]);
    return 2.0 * static_cast<double>(n - 1) * acc /
           static_cast<double>(pre_shift_capacity.size());
  }
};

CalibrationSample draw_calibration_sample(const ScenarioSpec& spec,
                                          std::size_t m, Rng& rng) {
  CalibrationSample cs;
  cs.pre_shift_capacity.resize(m);
  cs.susceptibility.resize(m);
  cs.tau.resize(m);
  // exact probability that an ordered pair lies within one of the two halves
  const double g0 = (spec.n + 1) / 2, g1 = spec.n - (spec.n + 1) / 2;
  const double same =
      (g0 * (g0 - 1.0) + g1 * (g1 - 1.0)) /
      (static_cast<double>(spec.n) * (static_cast<double>(spec.n) - 1.0));
  const double shape = 1.0 - spec.kappa;
  for (std::size_t s = 0; s < m; ++s) {
    cs.pre_shift_capacity[s] = spec.o_dist == CapacityDist::constant_calibrated
                                   ? 4.0
                                   : rng.gamma(3.0, 4.0 / 3.0);
    cs.susceptibility[s] = spec.i_dist == SusceptibilityDist::constant_two
                               ? 2.0
                               : rng.gamma(14.0 / 5.0, 5.0 / 7.0);
    double b = rng.beta(shape, 1.0);
    cs.tau[s] = rng.uniform() < same ? 1.0 - 2.0 * b : -1.0 + 2.0 * b;
  }
  return cs;
}

}  // namespace

double calibrate_k_star(const ScenarioSpec& spec, Rng& rng,
                        double target_degree, std::size_t mc_samples) {
  spec.validate();
  if (!(target_degree > 0.0))
    throw input_error("calibrate_k_star: target degree must be positive");
  CalibrationSample cs = draw_calibration_sample(spec, mc_samples, rng);

  double lo = -20.0, hi = 20.0;
  double f_lo = cs.expected_degree(lo, spec.n);
  double f_hi = cs.expected_degree(hi, spec.n);
  // expected degree is decreasing in k, so the bracket needs f_lo >= target >= f_hi
  if (f_lo < target_degree || f_hi > target_degree)
    throw numeric_error("calibrate_k_star: no bracket for target degree " +
                        std::to_string(target_degree) + " in k in [-20, 20]");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double f = cs.expected_degree(mid, spec.n);
    if (std::fabs(f - target_degree) <= 0.1) return mid;
    if (f > target_degree) lo = mid;
    else hi = mid;
  }
  throw numeric_error("calibrate_k_star: bisection failed to converge");
}

namespace {

DirectedNetwork draw_network(const Eigen::VectorXd& capacity,
                             const Eigen::VectorXd& susceptibility,
                             const Eigen::MatrixXd& tau, Rng& rng) {
  const int n = static_cast<int>(capacity.size());
  std::vector<DirectedNetwork::Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double p = expit(capacity(i) + tau(i, j) * susceptibility(j));
      if (rng.bernoulli(p))
        edges.emplace_back(static_cast<std::uint32_t>(i),
                           static_cast<std::uint32_t>(j));
    }
  }
  return DirectedNetwork(static_cast<std::size_t>(n), std::move(edges));
}

}  // namespace

ScenarioNetwork generate_scenario_network(const ScenarioSpec& spec,
                                          const Eigen::VectorXd& capacities,
                                          const Eigen::VectorXd& susceptibilities,
                                          Eigen::MatrixXd tau, Rng& rng) {
  spec.validate();
  Partition groups = half_partition(spec.n);
  double kappa = spec.kappa;
  constexpr int kMaxAttempts = 50;

  double last_q = 0.0;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    if (attempt > 0) {
      // retry schedule: push kappa toward the regime's end of the range and
      // redraw the similarities
      kappa = spec.modularity_regime == ModularityRegime::low
                  ? kappa / 2.0
                  : std::min(0.99, kappa + (1.0 - kappa) * 0.25);
      tau = sample_tau_matrix(spec.n, kappa, groups, rng);
    }
    DirectedNetwork net = draw_network(capacities, susceptibilities, tau, rng);
    double q = modularity(net, groups);
    last_q = q;
    bool ok = spec.modularity_regime == ModularityRegime::low ? q < 0.001
                                                              : q > 0.05;
    if (ok) {
      ScenarioNetwork sn{std::move(net), std::move(groups), std::move(tau), q,
                         kappa, attempt};
      return sn;
    }
  }
  throw numeric_error(
      "generate_scenario_network: modularity band not met after 50 attempts "
      "(regime " +
      to_string(spec.modularity_regime) + ", last Q " + std::to_string(last_q) +
      ", kappa " + std::to_string(kappa) + ")");
}

namespace {

std::uint32_t argmax_capacity(const Eigen::VectorXd& capacities,
                              const std::vector<std::uint32_t>& pool) {
  std::uint32_t best = pool.front();
  for (auto v : pool)
    if (capacities(v) > capacities(best)) best = v;  // ties keep lowest index
  return best;
}

}  // namespace

Initiators select_initiators(const ScenarioSpec& spec,
                             const Eigen::VectorXd& capacities,
                             const Partition& groups, Rng& rng) {
  spec.validate();
  const int n = static_cast<int>(capacities.size());
  if (static_cast<int>(groups.labels.size()) != n)
    throw input_error("select_initiators: partition size mismatch");

  if (spec.modularity_regime == ModularityRegime::high) {
    std::vector<std::uint32_t> comm0, comm1;
    for (int v = 0; v < n; ++v)
      (groups.labels[v] == 0 ? comm0 : comm1).push_back(v);
    if (comm0.empty() || comm1.empty())
      throw input_error("select_initiators: a community is empty");
    Initiators out;
    if (spec.initiator_rule == InitiatorRule::random_pair) {
      out.support_seed = comm0[rng.uniform_int(0, comm0.size() - 1)];
      out.reject_seed = comm1[rng.uniform_int(0, comm1.size() - 1)];
    } else {
      out.support_seed = argmax_capacity(capacities, comm0);
      out.reject_seed = argmax_capacity(capacities, comm1);
    }
    return out;
  }

  Initiators out;
  if (spec.initiator_rule == InitiatorRule::random_pair) {
    out.support_seed = static_cast<std::uint32_t>(rng.uniform_int(0, n - 1));
    std::uint32_t second = static_cast<std::uint32_t>(rng.uniform_int(0, n - 2));
    out.reject_seed = second >= out.support_seed ? second + 1 : second;
  } else {
    std::vector<std::uint32_t> all(n);
    for (int v = 0; v < n; ++v) all[v] = v;
    out.support_seed = argmax_capacity(capacities, all);
    std::vector<std::uint32_t> rest;
    for (int v = 0; v < n; ++v)
      if (static_cast<std::uint32_t>(v) != out.support_seed) rest.push_back(v);
    out.reject_seed = argmax_capacity(capacities, rest);
  }
  return out;
}

std::vector<ScenarioSpec> enumerate_scenarios(const GridConfig& config) {
  std::vector<ScenarioSpec> specs;
  for (CapacityDist o : {CapacityDist::constant_calibrated,
                         CapacityDist::gamma_shifted}) {
    for (SusceptibilityDist i :
         {SusceptibilityDist::constant_two, SusceptibilityDist::gamma}) {
      for (ModularityRegime m : {ModularityRegime::low, ModularityRegime::high}) {
        for (InitiatorRule r :
             {InitiatorRule::random_pair, InitiatorRule::max_capacity}) {
          if (r == InitiatorRule::max_capacity &&
              o == CapacityDist::constant_calibrated)
            continue;  // rule applies only when capacities vary
          ScenarioSpec spec;
          spec.n = config.n;
          spec.o_dist = o;
          spec.i_dist = i;
          spec.modularity_regime = m;
          spec.initiator_rule = r;
          spec.kappa = m == ModularityRegime::low ? config.kappa_low
                                                  : config.kappa_high;
          spec.seed = config.master_seed;
          specs.push_back(spec);
        }
      }
    }
  }
  return specs;
}

namespace {

ExperimentRecord run_cell(const GridConfig& config, const ScenarioSpec& spec,
                          int spec_id, int replicate, double k_star) {
  Rng rng(derive_seed(config.master_seed, static_cast<std::uint64_t>(spec_id),
                      static_cast<std::uint64_t>(replicate)));
  Eigen::VectorXd capacities = sample_capacities(spec, k_star, rng);
  Eigen::VectorXd susceptibilities = sample_susceptibilities(spec, rng);
  Eigen::MatrixXd tau =
      sample_tau_matrix(spec.n, spec.kappa, half_partition(spec.n), rng);
  ScenarioNetwork sn = generate_scenario_network(spec, capacities,
                                                 susceptibilities,
                                                 std::move(tau), rng);
  Initiators seeds = select_initiators(spec, capacities, sn.groups, rng);

  double avg_degree =
      2.0 * static_cast<double>(sn.net.edge_count()) / spec.n;

  DiffusionParams params{std::move(capacities), std::move(susceptibilities),
                         std::move(sn.tau), std::move(sn.net)};
  std::vector<OpinionState> initial(spec.n, OpinionState::unknown);
  initial[seeds.support_seed] = OpinionState::support;
  initial[seeds.reject_seed] = OpinionState::reject;

  CascadeTrace trace =
      run_cascade(params, std::move(initial), config.stopping, config.engine, rng);
  CascadeSummary summary = cascade_summaries(trace);

  ExperimentRecord rec;
  rec.spec_id = spec_id;
  rec.replicate = replicate;
  rec.o_dist = spec.o_dist;
  rec.i_dist = spec.i_dist;
  rec.modularity_regime = spec.modularity_regime;
  rec.initiator_rule = spec.initiator_rule;
  rec.total_time = summary.total_time;
  rec.reach = summary.reach;
  rec.realized_modularity = sn.realized_modularity;
  rec.realized_avg_degree = avg_degree;
  rec.k_star = k_star;
  rec.stop_reason = summary.stop_reason;
  return rec;
}

}  // namespace

std::vector<ExperimentRecord> run_experiment_grid(const GridConfig& config) {
  std::vector<ScenarioSpec> specs = enumerate_scenarios(config);

  // one calibration per scenario, on its own stream
  std::vector<double> k_star(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    Rng rng(derive_seed(config.master_seed, s, 0x00c0ffeeULL));
    k_star[s] = calibrate_k_star(specs[s], rng);
  }

  const int reps = config.replicates;
  std::vector<ExperimentRecord> records(specs.size() * reps);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= records.size()) return;
      std::size_t s = idx / reps;
      int r = static_cast<int>(idx % reps);
      records[idx] =
          run_cell(config, specs[s], static_cast<int>(s), r, k_star[s]);
    }
  };
  int n_threads = std::max(1, config.threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return records;
}

}  // namespace influence
