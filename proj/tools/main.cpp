// Command-line front end: stats, fit, ppc, coverage, diffuse, grid, anova.
// Data goes to files, logs go to stderr. Exit codes: 0 success, 2 bad input
// or usage, 3 numeric failure, 4 internal invariant breach.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "influence/analysis.hpp"
#include "influence/diffusion.hpp"
#include "influence/graph.hpp"
#include "influence/io.hpp"
#include "influence/mcmc.hpp"
#include "influence/model.hpp"
#include "influence/ppc.hpp"
#include "influence/rng.hpp"
#include "influence/scenarios.hpp"

namespace {

using influence::input_error;
using ordered_json = nlohmann::ordered_json;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open input file '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open output file '" + path + "'");
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

influence::EdgeListFormat::Header header_mode(const std::string& mode) {
  if (mode == "auto") return influence::EdgeListFormat::Header::automatic;
  if (mode == "yes") return influence::EdgeListFormat::Header::yes;
  if (mode == "no") return influence::EdgeListFormat::Header::no;
  throw input_error("--header must be auto, yes, or no");
}

influence::DirectedNetwork load_network(const std::string& path,
                                        const std::string& header) {
  std::ifstream in = open_input(path);
  influence::EdgeListFormat format;
  format.header = header_mode(header);
  return influence::load_edge_list(in, format);
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(csv);
  while (std::getline(ss, cur, ',')) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

// ----- stats ---------------------------------------------------------------

struct StatsArgs {
  std::string network, out, header = "auto";
};

void run_stats(const StatsArgs& args) {
  influence::DirectedNetwork net = load_network(args.network, args.header);
  influence::DirectedNetwork component = influence::giant_component(net);
  influence::CommunityResult communities =
      influence::fast_greedy_communities(component);
  std::ofstream out = open_output(args.out);
  influence::write_stats_json(out, component, communities);
  std::cerr << "stats: n=" << component.vertex_count()
            << " edges=" << component.edge_count()
            << " communities=" << communities.partition.k << "\n";
}

// ----- fit -----------------------------------------------------------------

struct FitArgs {
  std::string network, config, out, header = "auto";
  std::optional<std::uint64_t> seed;
};

void run_fit(const FitArgs& args) {
  influence::DirectedNetwork net = load_network(args.network, args.header);
  influence::DirectedNetwork component = influence::giant_component(net);

  std::string config_text = slurp(args.config);
  std::istringstream config_in(config_text);
  influence::FitConfig config = influence::parse_fit_config(config_in);
  if (args.seed) config.sampler.seed = *args.seed;

  const int n = static_cast<int>(component.vertex_count());
  const int p = config.sampler.latent_dim;
  std::cerr << "fit: n=" << n << " edges=" << component.edge_count()
            << " samples=" << config.sampler.n_samples
            << " warmup=" << config.sampler.warmup
            << " thin=" << config.sampler.thin << "\n";

  influence::PosteriorSamples samples =
      influence::run_sampler(component, config.hyper, config.sampler);
  influence::DicResult dic = influence::compute_dic(samples.draws, component);
  auto ess = influence::effective_sample_size(samples.log_lik_trace);

  {
    std::ofstream out = open_output(args.out + ".draws.csv");
    influence::write_draws_csv(out, samples, n, p);
  }

  influence::AlignedDraws aligned =
      influence::procrustes_aligned_draws(samples.draws);
  influence::LatentState mean_state;
  mean_state.O = aligned.mean_O;
  mean_state.U = aligned.mean_U;
  double mean_omega2 = 0.0, mean_sigma2 = 0.0;
  for (const auto& d : samples.draws) {
    mean_omega2 += d.omega2;
    mean_sigma2 += d.sigma2;
  }
  mean_state.omega2 = mean_omega2 / static_cast<double>(samples.draws.size());
  mean_state.sigma2 = mean_sigma2 / static_cast<double>(samples.draws.size());
  {
    std::ofstream out = open_output(args.out + ".mean_state.csv");
    influence::write_state_csv(out, mean_state, component.vertex_ids());
  }
  {
    std::ofstream out = open_output(args.out + ".mean_state.json");
    influence::write_state_meta_json(out, mean_state);
  }

  ordered_json manifest;
  manifest["schema"] = {{"name", "influence-fit-manifest"},
                        {"version", influence::schema_version_string()}};
  manifest["seed"] = config.sampler.seed;
  manifest["n"] = n;
  manifest["p"] = p;
  manifest["config_hash"] = influence::fnv1a_hex(config_text);
  manifest["config"] = {
      {"a_omega", config.hyper.a_omega},
      {"b_omega", config.hyper.b_omega},
      {"a_sigma", config.hyper.a_sigma},
      {"b_sigma", config.hyper.b_sigma},
      {"samples", config.sampler.n_samples},
      {"warmup", config.sampler.warmup},
      {"thin", config.sampler.thin},
      {"p", config.sampler.latent_dim},
      {"proposal_sd_o", config.sampler.proposal_sd_O},
      {"proposal_sd_u", config.sampler.proposal_sd_u},
      {"adapt", config.sampler.adapt},
      {"target_accept_o", config.sampler.target_accept_O},
      {"target_accept_u", config.sampler.target_accept_u}};
  manifest["vertex_ids"] = component.vertex_ids();
  std::vector<double> acc_o(samples.acceptance_O.data(),
                            samples.acceptance_O.data() + n);
  std::vector<double> acc_u(samples.acceptance_u.data(),
                            samples.acceptance_u.data() + n);
  manifest["acceptance"] = {{"o", acc_o},
                            {"u", acc_u},
                            {"o_mean", samples.acceptance_O.mean()},
                            {"u_mean", samples.acceptance_u.mean()}};
  manifest["ess_loglik"] = ess ? ordered_json(*ess) : ordered_json(nullptr);
  manifest["dic"] = {{"dic", dic.dic},
                     {"p_d", dic.p_d},
                     {"mean_deviance", dic.mean_deviance}};
  // capacity-susceptibility correlation: 95% interval over the draws plus an
  // explicit contains-zero flag
  auto rho = influence::posterior_correlation_OI(samples.draws);
  std::vector<double> rho_values;
  int rho_undefined = 0;
  for (const auto& value : rho)
    value ? rho_values.push_back(*value) : static_cast<void>(++rho_undefined);
  if (rho_values.size() >= 2) {
    auto [lo, hi] = influence::credible_interval(rho_values, 0.95);
    manifest["correlation_OI"] = {{"lower", lo},
                                  {"upper", hi},
                                  {"contains_zero", lo <= 0.0 && 0.0 <= hi},
                                  {"undefined_draws", rho_undefined}};
  } else {
    manifest["correlation_OI"] = nullptr;
  }
  std::ofstream out = open_output(args.out + ".manifest.json");
  out << manifest.dump(2) << "\n";
  std::cerr << "fit: dic=" << dic.dic << " p_d=" << dic.p_d << "\n";
}

// ----- ppc -----------------------------------------------------------------

struct PpcArgs {
  std::string network, draws, out, header = "auto";
  std::string stats = "density,transitivity,assortativity,degree_sd";
  std::uint64_t seed = 1;
  long max_draws = 0;  // 0 keeps every draw
};

void run_ppc(const PpcArgs& args) {
  influence::DirectedNetwork net = load_network(args.network, args.header);
  influence::DirectedNetwork component = influence::giant_component(net);
  std::ifstream draws_in = open_input(args.draws);
  influence::DrawsData draws = influence::read_draws_csv(draws_in);
  if (draws.n != static_cast<int>(component.vertex_count()))
    throw input_error("draws file has n=" + std::to_string(draws.n) +
                      " but the network giant component has n=" +
                      std::to_string(component.vertex_count()));

  std::size_t keep = draws.draws.size();
  if (args.max_draws > 0)
    keep = std::min<std::size_t>(keep, static_cast<std::size_t>(args.max_draws));
  std::span<const influence::LatentState> used(draws.draws.data(), keep);

  influence::Rng rng(args.seed);
  auto results = influence::posterior_predictive_check(
      used, component, split_list(args.stats), rng);

  {
    std::ofstream out = open_output(args.out + ".ppc.csv");
    influence::write_ppc_csv(out, results);
  }
  std::ofstream out = open_output(args.out + ".summary.json");
  influence::write_ppc_summary_json(out, results);
  for (const auto& r : results)
    std::cerr << "ppc: " << r.name << " tail="
              << (r.tail_probability ? std::to_string(*r.tail_probability)
                                     : std::string("undefined"))
              << "\n";
}

// ----- coverage ------------------------------------------------------------

struct CoverageArgs {
  std::string config, out;
  std::string truth_state, truth_meta;
  int n = 0;
  double level = 0.95;
  std::uint64_t seed = 1;
};

void run_coverage(const CoverageArgs& args) {
  std::string config_text = slurp(args.config);
  std::istringstream config_in(config_text);
  influence::FitConfig config = influence::parse_fit_config(config_in);

  influence::Rng rng(args.seed);
  influence::LatentState truth;
  if (!args.truth_state.empty()) {
    if (args.truth_meta.empty())
      throw input_error("coverage: --truth-state needs --truth-meta");
    std::ifstream csv = open_input(args.truth_state);
    std::ifstream meta = open_input(args.truth_meta);
    truth = influence::read_state(csv, meta);
  } else {
    if (args.n < 2)
      throw input_error("coverage: provide --truth-state or --n >= 2");
    const int p = config.sampler.latent_dim;
    truth.omega2 =
        1.0 / rng.gamma(config.hyper.a_omega, 1.0 / config.hyper.b_omega);
    truth.sigma2 =
        1.0 / rng.gamma(config.hyper.a_sigma, 1.0 / config.hyper.b_sigma);
    truth.O.resize(args.n);
    truth.U.resize(args.n, p);
    for (int i = 0; i < args.n; ++i) {
      truth.O(i) = rng.normal(0.0, std::sqrt(truth.omega2));
      for (int k = 0; k < p; ++k)
        truth.U(i, k) = rng.normal(0.0, std::sqrt(truth.sigma2));
    }
  }
  config.sampler.seed = influence::derive_seed(args.seed, 0xf17);

  influence::CoverageResult result = influence::coverage_experiment(
      truth, config.hyper, config.sampler, args.level, rng);
  std::ofstream out = open_output(args.out);
  influence::write_coverage_json(out, result, truth.n(), truth.latent_dim(),
                                 args.seed);
  std::cerr << "coverage: O=" << result.coverage_O << " u=" << result.coverage_u
            << "\n";
}

// ----- diffuse ---------------------------------------------------------------

struct DiffuseArgs {
  std::string network, state, state_meta, out, header = "auto";
  std::string support, reject;
  std::string engine = "race";
  double stable_band = 0.05;
  int stable_jumps = 0;
  std::uint64_t seed = 1;
};

void run_diffuse(const DiffuseArgs& args) {
  influence::DirectedNetwork net = load_network(args.network, args.header);

  std::ifstream csv = open_input(args.state);
  std::ifstream meta = open_input(args.state_meta);
  std::vector<std::string> state_ids;
  influence::LatentState state = influence::read_state(csv, meta, &state_ids);

  const std::size_t n = net.vertex_count();
  if (state_ids.size() != n)
    throw input_error("state file has " + std::to_string(state_ids.size()) +
                      " rows but the network has " + std::to_string(n) +
                      " vertices");

  // bring the state rows into the network's vertex order
  std::unordered_map<std::string, std::uint32_t> net_index;
  const auto& ids = net.vertex_ids();
  for (std::uint32_t v = 0; v < n; ++v)
    net_index.emplace(ids.empty() ? std::to_string(v) : ids[v], v);
  influence::LatentState ordered;
  ordered.O.resize(state.n());
  ordered.U.resize(state.n(), state.latent_dim());
  ordered.omega2 = state.omega2;
  ordered.sigma2 = state.sigma2;
  for (std::size_t row = 0; row < state_ids.size(); ++row) {
    auto it = net_index.find(state_ids[row]);
    if (it == net_index.end())
      throw input_error("state id '" + state_ids[row] +
                        "' does not appear in the network");
    ordered.O(it->second) = state.O(static_cast<int>(row));
    ordered.U.row(it->second) = state.U.row(static_cast<int>(row));
  }

  influence::ReparamView view = influence::reparameterize(ordered);
  influence::DiffusionParams params{ordered.O, view.susceptibility,
                                    view.similarity, net};

  std::vector<influence::OpinionState> initial(
      n, influence::OpinionState::unknown);
  auto seed_vertices = [&](const std::string& list,
                           influence::OpinionState opinion) {
    for (const auto& id : split_list(list)) {
      auto it = net_index.find(id);
      if (it == net_index.end())
        throw input_error("seed id '" + id + "' does not appear in the network");
      initial[it->second] = opinion;
    }
  };
  seed_vertices(args.support, influence::OpinionState::support);
  seed_vertices(args.reject, influence::OpinionState::reject);

  influence::StoppingRule stopping{args.stable_band, args.stable_jumps};
  influence::Engine engine;
  if (args.engine == "race") engine = influence::Engine::race;
  else if (args.engine == "reference") engine = influence::Engine::reference;
  else throw input_error("--engine must be race or reference");

  influence::Rng rng(args.seed);
  influence::CascadeTrace trace =
      influence::run_cascade(params, std::move(initial), stopping, engine, rng);
  influence::CascadeSummary summary = influence::cascade_summaries(trace);

  {
    std::ofstream out = open_output(args.out + ".trace.csv");
    influence::write_trace_csv(out, trace);
  }
  std::ofstream out = open_output(args.out + ".summary.json");
  influence::write_cascade_summary_json(out, summary);
  std::cerr << "diffuse: jumps=" << summary.n_jumps << " reach=" << summary.reach
            << " stop=" << summary.stop_reason << "\n";
}

// ----- grid ------------------------------------------------------------------

struct GridArgs {
  std::string out;
  std::string engine = "race";
  int n = 1000;
  int replicates = 4;
  int threads = 1;
  double kappa_low = 0.0;
  double kappa_high = 0.9;
  double stable_band = 0.05;
  int stable_jumps = 0;
  std::uint64_t seed = 1;
};

void run_grid(const GridArgs& args) {
  influence::GridConfig config;
  config.n = args.n;
  config.replicates = args.replicates;
  config.master_seed = args.seed;
  config.threads = args.threads;
  config.kappa_low = args.kappa_low;
  config.kappa_high = args.kappa_high;
  config.stopping = influence::StoppingRule{args.stable_band, args.stable_jumps};
  if (args.engine == "race") config.engine = influence::Engine::race;
  else if (args.engine == "reference") config.engine = influence::Engine::reference;
  else throw input_error("--engine must be race or reference");

  auto records = influence::run_experiment_grid(config);
  std::ofstream out = open_output(args.out);
  influence::write_grid_csv(out, records);
  std::cerr << "grid: " << records.size() << " records\n";
}

// ----- anova -------------------------------------------------------------------

struct AnovaArgs {
  std::string grid, out;
  std::string response = "time";
};

void run_anova(const AnovaArgs& args) {
  std::ifstream in = open_input(args.grid);
  auto records = influence::read_grid_csv(in);

  influence::AnovaResponse response;
  if (args.response == "time") response = influence::AnovaResponse::log_total_time;
  else if (args.response == "reach") response = influence::AnovaResponse::log_reach;
  else throw input_error("--response must be time or reach");

  influence::AnovaResult result = influence::nested_anova(records, response);
  std::vector<double> residuals(result.residuals.data(),
                                result.residuals.data() + result.residuals.size());
  auto jb = influence::jarque_bera(residuals);

  // scenario cells reduced below two members by exclusions cannot enter the
  // homoscedasticity test; drop them and report null when too little is left
  std::map<int, int> cell_sizes;
  for (int cell : result.cell_index) ++cell_sizes[cell];
  std::vector<double> lev_values;
  std::vector<int> lev_groups;
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    if (cell_sizes[result.cell_index[k]] >= 2) {
      lev_values.push_back(residuals[k]);
      lev_groups.push_back(result.cell_index[k]);
    }
  }
  std::optional<influence::TestStatistic> lev;
  std::set<int> distinct(lev_groups.begin(), lev_groups.end());
  if (distinct.size() >= 2) lev = influence::levene(lev_values, lev_groups);
  else std::cerr << "anova: too few complete cells for the Levene test\n";

  std::ofstream out = open_output(args.out);
  influence::write_anova_json(out, result, jb, lev);
  for (const auto& f : result.factors)
    std::cerr << "anova: " << f.name << " F=" << f.f_stat << " p=" << f.p_value
              << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Influence-network inference and idea-diffusion simulation"};
  app.require_subcommand(1);

  StatsArgs stats_args;
  auto* stats = app.add_subcommand(
      "stats", "Descriptive statistics of the giant component");
  stats->add_option("--network", stats_args.network, "Edge-list CSV")->required();
  stats->add_option("--out", stats_args.out, "Output JSON path")->required();
  stats->add_option("--header", stats_args.header, "Header handling: auto|yes|no");
  std::uint64_t stats_seed = 0;
  stats->add_option("--seed", stats_seed, "Unused; accepted for uniformity");

  FitArgs fit_args;
  std::uint64_t fit_seed = 0;
  auto* fit = app.add_subcommand("fit", "Posterior sampling of the influence model");
  fit->add_option("--network", fit_args.network, "Edge-list CSV")->required();
  fit->add_option("--config", fit_args.config, "Sampler configuration file")->required();
  fit->add_option("--out", fit_args.out, "Output prefix")->required();
  fit->add_option("--header", fit_args.header, "Header handling: auto|yes|no");
  auto* fit_seed_opt = fit->add_option("--seed", fit_seed, "Overrides the config seed");

  PpcArgs ppc_args;
  auto* ppc = app.add_subcommand("ppc", "Posterior predictive checks");
  ppc->add_option("--network", ppc_args.network, "Edge-list CSV")->required();
  ppc->add_option("--draws", ppc_args.draws, "Draws CSV from fit")->required();
  ppc->add_option("--out", ppc_args.out, "Output prefix")->required();
  ppc->add_option("--stats", ppc_args.stats, "Comma list of statistics");
  ppc->add_option("--max-draws", ppc_args.max_draws, "Cap on draws used (0 = all)");
  ppc->add_option("--header", ppc_args.header, "Header handling: auto|yes|no");
  ppc->add_option("--seed", ppc_args.seed, "Replicate simulation seed");

  CoverageArgs cov_args;
  auto* cov = app.add_subcommand("coverage", "Credible-interval coverage experiment");
  cov->add_option("--config", cov_args.config, "Sampler configuration file")->required();
  cov->add_option("--out", cov_args.out, "Output JSON path")->required();
  cov->add_option("--n", cov_args.n, "Vertices when drawing truth from the prior");
  cov->add_option("--truth-state", cov_args.truth_state, "Truth state CSV");
  cov->add_option("--truth-meta", cov_args.truth_meta, "Truth state sidecar JSON");
  cov->add_option("--level", cov_args.level, "Interval level (default 0.95)");
  cov->add_option("--seed", cov_args.seed, "Experiment seed");

  DiffuseArgs dif_args;
  auto* dif = app.add_subcommand("diffuse", "Cascade simulation from a fitted state");
  dif->add_option("--network", dif_args.network, "Edge-list CSV")->required();
  dif->add_option("--state", dif_args.state, "Latent state CSV")->required();
  dif->add_option("--state-meta", dif_args.state_meta, "State sidecar JSON")->required();
  dif->add_option("--out", dif_args.out, "Output prefix")->required();
  dif->add_option("--support", dif_args.support, "Comma list of supporting seed ids");
  dif->add_option("--reject", dif_args.reject, "Comma list of rejecting seed ids");
  dif->add_option("--engine", dif_args.engine, "race (default) or reference");
  dif->add_option("--stable-band", dif_args.stable_band, "Stability band fraction");
  dif->add_option("--stable-jumps", dif_args.stable_jumps,
                  "Stable jumps to stop (0 = 3n)");
  dif->add_option("--header", dif_args.header, "Header handling: auto|yes|no");
  dif->add_option("--seed", dif_args.seed, "Cascade seed");

  GridArgs grid_args;
  auto* grid = app.add_subcommand("grid", "Scenario grid of cascade experiments");
  grid->add_option("--out", grid_args.out, "Output grid CSV path")->required();
  grid->add_option("--n", grid_args.n, "Network size (default 1000)");
  grid->add_option("--replicates", grid_args.replicates, "Replicates per scenario");
  grid->add_option("--engine", grid_args.engine, "race (default) or reference");
  grid->add_option("--threads", grid_args.threads, "Worker threads");
  grid->add_option("--kappa-low", grid_args.kappa_low, "Base kappa, low regime");
  grid->add_option("--kappa-high", grid_args.kappa_high, "Base kappa, high regime");
  grid->add_option("--stable-band", grid_args.stable_band, "Stability band fraction");
  grid->add_option("--stable-jumps", grid_args.stable_jumps,
                   "Stable jumps to stop (0 = 3n)");
  grid->add_option("--seed", grid_args.seed, "Master seed");

  AnovaArgs anova_args;
  auto* anova = app.add_subcommand("anova", "Nested ANOVA over grid results");
  anova->add_option("--grid", anova_args.grid, "Grid CSV from the grid command")
      ->required();
  anova->add_option("--out", anova_args.out, "Output JSON path")->required();
  anova->add_option("--response", anova_args.response, "time (default) or reach");
  std::uint64_t anova_seed = 0;
  anova->add_option("--seed", anova_seed, "Unused; accepted for uniformity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*stats) run_stats(stats_args);
    if (*fit) {
      if (fit_seed_opt->count() > 0) fit_args.seed = fit_seed;
      run_fit(fit_args);
    }
    if (*ppc) run_ppc(ppc_args);
    if (*cov) run_coverage(cov_args);
    if (*dif) run_diffuse(dif_args);
    if (*grid) run_grid(grid_args);
    if (*anova) run_anova(anova_args);
  } catch (const influence::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const influence::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const influence::internal_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
