#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "influence/analysis.hpp"
#include "influence/diffusion.hpp"
#include "influence/graph.hpp"
#include "influence/mcmc.hpp"
#include "influence/model.hpp"
#include "influence/ppc.hpp"
#include "influence/scenarios.hpp"

namespace influence {

// Every artifact carries a schema name and version; readers reject a major
// version they do not understand. CSV files carry it in a leading comment
// line, JSON files in a "schema" object.
inline constexpr int kSchemaMajor = 1;
inline constexpr int kSchemaMinor = 0;
std::string schema_version_string();

void write_csv_schema_line(std::ostream& out, const std::string& name);
// Consumes the first line; throws input_error on a missing or foreign schema.
void expect_csv_schema(std::istream& in, const std::string& name);

// Round-trip safe decimal formatting shared by all CSV writers.
std::string format_double(double value);

// FNV-1a 64-bit hash, hex encoded; used to fingerprint config files.
std::string fnv1a_hex(std::string_view bytes);

// ----- network statistics report ---------------------------------------

void write_stats_json(std::ostream& out, const DirectedNetwork& net,
                      const CommunityResult& communities);

// ----- posterior draws ---------------------------------------------------

// One row per kept draw: o_1..o_n, u_1_1..u_n_p, omega2, sigma2, loglik.
void write_draws_csv(std::ostream& out, const PosteriorSamples& samples, int n,
                     int p);

struct DrawsData {
  std::vector<LatentState> draws;
  std::vector<double> log_lik;
  int n = 0;
  int p = 0;
};
DrawsData read_draws_csv(std::istream& in);

// ----- latent state (id, O, u_1..u_p + sidecar) --------------------------

void write_state_csv(std::ostream& out, const LatentState& state,
                     const std::vector<std::string>& ids);
void write_state_meta_json(std::ostream& out, const LatentState& state);
LatentState read_state(std::istream& csv, std::istream& meta,
                       std::vector<std::string>* ids_out = nullptr);

// ----- cascade outputs ----------------------------------------------------

void write_trace_csv(std::ostream& out, const CascadeTrace& trace);
void write_cascade_summary_json(std::ostream& out, const CascadeSummary& summary);

// ----- experiment grid ----------------------------------------------------

void write_grid_csv(std::ostream& out, std::span<const ExperimentRecord> records);
std::vector<ExperimentRecord> read_grid_csv(std::istream& in);

// ----- posterior predictive checks ---------------------------------------

void write_ppc_csv(std::ostream& out, std::span<const PpcStatResult> results);
void write_ppc_summary_json(std::ostream& out,
                            std::span<const PpcStatResult> results);

// ----- analysis report ----------------------------------------------------

void write_anova_json(std::ostream& out, const AnovaResult& result,
                      const std::optional<TestStatistic>& jb,
                      const std::optional<TestStatistic>& lev);

// ----- coverage report ----------------------------------------------------

void write_coverage_json(std::ostream& out, const CoverageResult& result, int n,
                         int p, std::uint64_t seed);

// ----- fit configuration --------------------------------------------------

// Flat key-value file with [prior] and [sampler] sections, '#' comments.
// Required keys: prior.{a_omega,b_omega,a_sigma,b_sigma} and
// sampler.{samples,warmup,thin,p}; the remaining sampler keys are optional.
struct FitConfig {
  Hyperparams hyper;
  SamplerConfig sampler;
};
FitConfig parse_fit_config(std::istream& in);

}  // namespace influence
