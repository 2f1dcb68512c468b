#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "influence/diffusion.hpp"
#include "influence/graph.hpp"
#include "influence/rng.hpp"

namespace influence {

enum class CapacityDist { constant_calibrated, gamma_shifted };
enum class SusceptibilityDist { constant_two, gamma };
enum class ModularityRegime { low, high };  // two-community Q < 0.001 / > 0.05
enum class InitiatorRule { random_pair, max_capacity };

std::string to_string(CapacityDist);
std::string to_string(SusceptibilityDist);
std::string to_string(ModularityRegime);
std::string to_string(InitiatorRule);

// One cell of the simulation design.
struct ScenarioSpec {
  int n = 1000;
  CapacityDist o_dist = CapacityDist::constant_calibrated;
  SusceptibilityDist i_dist = SusceptibilityDist::constant_two;
  ModularityRegime modularity_regime = ModularityRegime::low;
  InitiatorRule initiator_rule = InitiatorRule::random_pair;
  double kappa = 0.0;  // base similarity concentration, in [0, 1)
  std::uint64_t seed = 1;

  void validate() const;  // max-capacity initiators require non-constant O
};

// Two equal halves (the first half one vertex larger when n is odd).
Partition half_partition(int n);

// Capacities: all 4 - k_star in the constant case, or Gamma(3, rate 3/4)
// draws shifted left by k_star.
Eigen::VectorXd sample_capacities(const ScenarioSpec& spec, double k_star,
                                  Rng& rng);

// Susceptibilities: all 2, or Gamma(14/5, rate 7/5) draws.
Eigen::VectorXd sample_susceptibilities(const ScenarioSpec& spec, Rng& rng);

// Symmetric similarity matrix: per unordered pair, B ~ Beta(1 - kappa, 1);
// tau = 1 - 2B inside a group and -1 + 2B across groups.
Eigen::MatrixXd sample_tau_matrix(int n, double kappa, const Partition& groups,
                                  Rng& rng);

// Bisection on the capacity shift k_star so that the Monte Carlo estimate of
// the expected average total degree hits target_degree within +-0.1.
// Throws numeric_error when no bracket exists in [-20, 20].
double calibrate_k_star(const ScenarioSpec& spec, Rng& rng,
                        double target_degree = 10.0,
                        std::size_t mc_samples = 2'000'000);

struct ScenarioNetwork {
  DirectedNetwork net;
  Partition groups;
  Eigen::MatrixXd tau;  // the similarity draw that generated the network
  double realized_modularity = 0.0;  // Q of the two-community partition
  double kappa_used = 0.0;
  int retries = 0;
};

// Draws edges with probability expit(O_i + tau_ij I_j) and retries with an
// adjusted kappa (and fresh tau) until the two-community modularity falls in
// the regime's band. Throws numeric_error after 50 failed attempts.
ScenarioNetwork generate_scenario_network(const ScenarioSpec& spec,
                                          const Eigen::VectorXd& capacities,
                                          const Eigen::VectorXd& susceptibilities,
                                          Eigen::MatrixXd tau, Rng& rng);

struct Initiators {
  std::uint32_t support_seed = 0;
  std::uint32_t reject_seed = 0;
};

// Low-modularity regime: the pair is picked globally; high regime: one seed
// per community (community 0 supports, community 1 rejects). Ties in capacity
// break toward the lowest index.
Initiators select_initiators(const ScenarioSpec& spec,
                             const Eigen::VectorXd& capacities,
                             const Partition& groups, Rng& rng);

struct ExperimentRecord {
  int spec_id = 0;
  int replicate = 0;
  CapacityDist o_dist = CapacityDist::constant_calibrated;
  SusceptibilityDist i_dist = SusceptibilityDist::constant_two;
  ModularityRegime modularity_regime = ModularityRegime::low;
  InitiatorRule initiator_rule = InitiatorRule::random_pair;
  double total_time = 0.0;
  double reach = 0.0;
  double realized_modularity = 0.0;
  double realized_avg_degree = 0.0;
  double k_star = 0.0;
  std::string stop_reason;
};

struct GridConfig {
  int n = 1000;
  int replicates = 4;
  std::uint64_t master_seed = 1;
  Engine engine = Engine::race;
  StoppingRule stopping;
  int threads = 1;
  double kappa_low = 0.0;   // base kappa per modularity regime
  double kappa_high = 0.9;
};

// The 12 valid factor combinations: max-capacity initiators are excluded when
// capacities are constant.
std::vector<ScenarioSpec> enumerate_scenarios(const GridConfig& config);

// Runs every scenario `replicates` times with seeds derived from
// (master_seed, spec_id, replicate); deterministic regardless of threading.
std::vector<ExperimentRecord> run_experiment_grid(const GridConfig& config);

}  // namespace influence
