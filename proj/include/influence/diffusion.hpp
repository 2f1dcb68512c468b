#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "influence/graph.hpp"
#include "influence/rng.hpp"

namespace influence {

// Per-individual cognitive state of a cascade.
enum class OpinionState : std::uint8_t { unknown, undecided, support, reject };

char opinion_code(OpinionState s);                    // 'I', 'U', 'S', 'R'
OpinionState opinion_from_code(char c);

// Everything a cascade needs: capacities, susceptibilities, pairwise
// similarities, and the influence network itself.
struct DiffusionParams {
  Eigen::VectorXd capacity;        // O
  Eigen::VectorXd susceptibility;  // I, nonnegative
  Eigen::MatrixXd similarity;      // tau, symmetric, entries in [-1, 1]
  DirectedNetwork network;

  void validate() const;
};

enum class TransitionKind : std::uint8_t { inform, influence };

struct Transition {
  std::uint32_t source = 0;
  std::uint32_t target = 0;
  TransitionKind kind = TransitionKind::inform;
};

// All moves allowed by the current state structure: along each directed edge
// (u, v), a non-ignorant u informs an ignorant v, and a decided u (S or R)
// influences a v in U, S, or R whose state differs from u's. Undecided
// individuals can only inform.
std::vector<Transition> candidate_transitions(
    const std::vector<OpinionState>& states, const DiffusionParams& params);

double inform_rate(const DiffusionParams& params, std::uint32_t source);
double influence_rate(const DiffusionParams& params, std::uint32_t source,
                      std::uint32_t target);

// Exponential waiting time for an information jump, rate e^{O_source}.
double sample_inform_time(std::uint32_t source, Rng& rng,
                          const DiffusionParams& params);

// Exponential waiting time for an influence jump, rate e^{O_i + tau_ij I_j}.
double sample_influence_time(std::uint32_t source, std::uint32_t target,
                             Rng& rng, const DiffusionParams& params);

struct JumpResult {
  Transition winner;
  double dt = 0.0;
};

// Reference engine: draws one waiting time per candidate and takes the
// minimum. nullopt when no transition is possible.
std::optional<JumpResult> next_jump_reference(
    const std::vector<OpinionState>& states, const DiffusionParams& params,
    Rng& rng);

// Race engine: one Exp(sum of rates) draw for the time plus a categorical
// draw for the winner. Distributionally identical to the reference engine.
std::optional<JumpResult> next_jump_race(const std::vector<OpinionState>& states,
                                         const DiffusionParams& params,
                                         Rng& rng);

// Applies exactly one state change: an ignorant target becomes undecided, an
// undecided target adopts the source's stance, a decided target is pushed
// back to undecided. Throws internal_error if the winner is not a legal
// transition of the current state.
void apply_jump(std::vector<OpinionState>& states, const Transition& winner);

struct StoppingRule {
  double stable_band = 0.05;      // fraction of n
  int stable_jumps_required = 0;  // 0 resolves to 3n

  void validate() const;
};

enum class Engine { reference, race };

struct CascadeTrace {
  struct Row {
    double dt = 0.0;
    double elapsed = 0.0;
    std::uint32_t source = 0;
    std::uint32_t target = 0;
    OpinionState old_state = OpinionState::unknown;
    OpinionState new_state = OpinionState::unknown;
    std::array<int, 4> counts{};  // I, U, S, R after the jump
  };
  std::vector<Row> jumps;
  std::vector<OpinionState> final_states;
  double total_time = 0.0;
  std::string stop_reason;  // "exhausted", "stable", or "jump_cap"
};

// Runs jumps until no transition remains, until the group counts stay within
// stable_band * n of the values at the start of the current stable streak for
// stable_jumps_required consecutive jumps, or until the 10n safety cap.
CascadeTrace run_cascade(const DiffusionParams& params,
                         std::vector<OpinionState> initial,
                         const StoppingRule& stopping, Engine engine, Rng& rng);

struct CascadeSummary {
  double total_time = 0.0;
  double reach = 0.0;  // fraction of individuals in S or R at termination
  int n_jumps = 0;
  std::string stop_reason;
};

CascadeSummary cascade_summaries(const CascadeTrace& trace);

}  // namespace influence
