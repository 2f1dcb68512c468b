#include "influence/diffusion.hpp"

#include <cmath>
#include <limits>

namespace influence {

char opinion_code(OpinionState s) {
  switch (s) {
    case OpinionState::unknown: return 'I';
    case OpinionState::undecided: return 'U';
    case OpinionState::support: return 'S';
    case OpinionState::reject: return 'R';
  }
  throw internal_error("opinion_code: bad state");
}

OpinionState opinion_from_code(char c) {
  switch (c) {
    case 'I': return OpinionState::unknown;
    case 'U': return OpinionState::undecided;
    case 'S': return OpinionState::support;
    case 'R': return OpinionState::reject;
    default: throw input_error(std::string("unknown opinion code '") + c + "'");
  }
}

void DiffusionParams::validate() const {
  const auto n = static_cast<Eigen::Index>(network.vertex_count());
  if (capacity.size() != n || susceptibility.size() != n ||
      similarity.rows() != n || similarity.cols() != n)
    throw input_error("diffusion params: dimension mismatch with network");
  if ((susceptibility.array() < 0.0).any())
    throw input_error("diffusion params: susceptibility must be nonnegative");
  if (!similarity.isApprox(similarity.transpose(), 1e-9))
    throw input_error("diffusion params: similarity must be symmetric");
}

void StoppingRule::validate() const {
  if (!(stable_band > 0.0 && stable_band <= 1.0))
    throw input_error("stopping rule: band must lie in (0, 1]");
  if (stable_jumps_required < 0)
    throw input_error("stopping rule: jump count must be >= 1 (or 0 for 3n)");
}

namespace {

bool decided(OpinionState s) {
  return s == OpinionState::support || s == OpinionState::reject;
}

bool is_candidate(OpinionState source, OpinionState target,
                  TransitionKind kind) {
  if (kind == TransitionKind::inform)
    return source != OpinionState::unknown && target == OpinionState::unknown;
  return decided(source) && target != OpinionState::unknown && target != source;
}

}  // namespace

std::vector<Transition> candidate_transitions(
    const std::vector<OpinionState>& states, const DiffusionParams& params) {
  std::vector<Transition> out;
  const auto n = static_cast<std::uint32_t>(params.network.vertex_count());
  for (std::uint32_t u = 0; u < n; ++u) {
    if (states[u] == OpinionState::unknown) continue;
    for (std::uint32_t v : params.network.out_neighbors(u)) {
      if (states[v] == OpinionState::unknown) {
        out.push_back({u, v, TransitionKind::inform});
        continue;
      }
      if (states[u] == OpinionState::undecided) continue;  // can only inform
      if (states[v] != states[u])
        out.push_back({u, v, TransitionKind::influence});
    }
  }
  return out;
}

double inform_rate(const DiffusionParams& params, std::uint32_t source) {
  return std::exp(params.capacity(source));
}

double influence_rate(const DiffusionParams& params, std::uint32_t source,
                      std::uint32_t target) {
  return std::exp(params.capacity(source) +
                  params.similarity(source, target) *
                      params.susceptibility(target));
}

double sample_inform_time(std::uint32_t source, Rng& rng,
                          const DiffusionParams& params) {
  return rng.exponential(inform_rate(params, source));
}

double sample_influence_time(std::uint32_t source, std::uint32_t target,
                             Rng& rng, const DiffusionParams& params) {
  return rng.exponential(influence_rate(params, source, target));
}

std::optional<JumpResult> next_jump_reference(
    const std::vector<OpinionState>& states, const DiffusionParams& params,
    Rng& rng) {
  auto candidates = candidate_transitions(states, params);
  if (candidates.empty()) return std::nullopt;
  double min_t = std::numeric_limits<double>::infinity();
  Transition winner{};
  for (const auto& c : candidates) {
    double t = c.kind == TransitionKind::inform
                   ? sample_inform_time(c.source, rng, params)
                   : sample_influence_time(c.source, c.target, rng, params);
    if (t < min_t) {
      min_t = t;
      winner = c;
    }
  }
  return JumpResult{winner, min_t};
}

std::optional<JumpResult> next_jump_race(const std::vector<OpinionState>& states,
                                         const DiffusionParams& params,
                                         Rng& rng) {
  auto candidates = candidate_transitions(states, params);
  if (candidates.empty()) return std::nullopt;
  std::vector<double> rates(candidates.size());
  double total = 0.0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& c = candidates[k];
    rates[k] = c.kind == TransitionKind::inform
                   ? inform_rate(params, c.source)
                   : influence_rate(params, c.source, c.target);
    total += rates[k];
  }
  double dt = rng.exponential(total);
  std::size_t k = rng.categorical(rates, total);
  return JumpResult{candidates[k], dt};
}

void apply_jump(std::vector<OpinionState>& states, const Transition& winner) {
  OpinionState src = states[winner.source];
  OpinionState tgt = states[winner.target];
  if (!is_candidate(src, tgt, winner.kind))
    throw internal_error("apply_jump: winner is not a legal transition");
  // exclusive branches: one jump changes exactly one individual
  if (tgt == OpinionState::unknown) {
    states[winner.target] = OpinionState::undecided;
  } else if (tgt == OpinionState::undecided) {
    states[winner.target] = src;
  } else {
    states[winner.target] = OpinionState::undecided;
  }
}

namespace {

std::array<int, 4> count_states(const std::vector<OpinionState>& states) {
  std::array<int, 4> counts{};
  for (auto s : states) ++counts[static_cast<std::size_t>(s)];
  return counts;
}

}  // namespace

CascadeTrace run_cascade(const DiffusionParams& params,
                         std::vector<OpinionState> initial,
                         const StoppingRule& stopping, Engine engine, Rng& rng) {
  params.validate();
  stopping.validate();
  const std::size_t n = params.network.vertex_count();
  if (initial.size() != n)
    throw input_error("run_cascade: initial states do not match network size");

  const int required = stopping.stable_jumps_required > 0
                           ? stopping.stable_jumps_required
                           : 3 * static_cast<int>(n);
  const double band = stopping.stable_band * static_cast<double>(n);
  const long cap = 10 * static_cast<long>(n);

  CascadeTrace trace;
  std::array<int, 4> counts = count_states(initial);
  std::array<int, 4> window = counts;  // counts when the stable streak began
  int streak = 0;

  for (;;) {
    auto jump = engine == Engine::reference
                    ? next_jump_reference(initial, params, rng)
                    : next_jump_race(initial, params, rng);
    if (!jump) {
      trace.stop_reason = "exhausted";
      break;
    }
    OpinionState old_state = initial[jump->winner.target];
    apply_jump(initial, jump->winner);
    OpinionState new_state = initial[jump->winner.target];
    --counts[static_cast<std::size_t>(old_state)];
    ++counts[static_cast<std::size_t>(new_state)];
    trace.total_time += jump->dt;
    trace.jumps.push_back({jump->dt, trace.total_time, jump->winner.source,
                           jump->winner.target, old_state, new_state, counts});

    bool stable = true;
    for (std::size_t c = 0; c < 4; ++c)
      if (std::abs(counts[c] - window[c]) > band) stable = false;
    if (stable) {
      ++streak;
    } else {
      streak = 0;
      window = counts;
    }
    if (streak >= required) {
      trace.stop_reason = "stable";
      break;
    }
    if (static_cast<long>(trace.jumps.size()) >= cap) {
      trace.stop_reason = "jump_cap";
      break;
    }
  }
  trace.final_states = std::move(initial);
  return trace;
}

CascadeSummary cascade_summaries(const CascadeTrace& trace) {
  CascadeSummary s;
  s.total_time = trace.total_time;
  s.n_jumps = static_cast<int>(trace.jumps.size());
  s.stop_reason = trace.stop_reason;
  int reached = 0;
  for (auto st : trace.final_states)
    if (st == OpinionState::support || st == OpinionState::reject) ++reached;
  s.reach = trace.final_states.empty()
                ? 0.0
                : static_cast<double>(reached) /
                      static_cast<double>(trace.final_states.size());
  return s;
}

}  // namespace influence
