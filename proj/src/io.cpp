#include "influence/io.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace influence {

using ordered_json = nlohmann::ordered_json;

std::string schema_version_string() {
  return std::to_string(kSchemaMajor) + "." + std::to_string(kSchemaMinor);
}

namespace {

ordered_json schema_object(const std::string& name) {
  return ordered_json{{"name", name}, {"version", schema_version_string()}};
}

void check_json_schema(const ordered_json& j, const std::string& name) {
  if (!j.contains("schema") || !j["schema"].contains("name") ||
      !j["schema"].contains("version"))
    throw input_error("missing schema block (expected '" + name + "')");
  if (j["schema"]["name"] != name)
    throw input_error("schema name mismatch: expected '" + name + "', found '" +
                      j["schema"]["name"].get<std::string>() + "'");
  std::string version = j["schema"]["version"].get<std::string>();
  int major = std::atoi(version.c_str());
  if (major != kSchemaMajor)
    throw input_error("unsupported schema major version " + version +
                      " for '" + name + "'");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& field, const std::string& where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw input_error("cannot parse number '" + field + "' in " + where);
  }
}

long parse_long(const std::string& field, const std::string& where) {
  try {
    std::size_t pos = 0;
    long v = std::stol(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw input_error("cannot parse integer '" + field + "' in " + where);
  }
}

}  // namespace

void write_csv_schema_line(std::ostream& out, const std::string& name) {
  out << "# " << name << " " << schema_version_string() << "\n";
}

void expect_csv_schema(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line))
    throw input_error("empty file (expected '" + name + "' data)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::istringstream hdr(line);
  std::string hash, found, version;
  hdr >> hash >> found >> version;
  if (hash != "#" || found.empty() || version.empty())
    throw input_error("missing schema line (expected '" + name + "')");
  if (found != name)
    throw input_error("schema name mismatch: expected '" + name +
                      "', found '" + found + "'");
  if (std::atoi(version.c_str()) != kSchemaMajor)
    throw input_error("unsupported schema major version " + version + " for '" +
                      name + "'");
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ----- network statistics report ---------------------------------------

void write_stats_json(std::ostream& out, const DirectedNetwork& net,
                      const CommunityResult& communities) {
  ordered_json j;
  j["schema"] = schema_object("influence-stats");
  j["n"] = net.vertex_count();
  j["edges"] = net.edge_count();
  j["density"] = density(net);
  DegreeStats deg = degree_stats(net);
  j["average_degree"] = deg.mean;
  j["degree_sd"] = deg.sd;
  j["transitivity"] = transitivity(net);
  auto assort = assortativity(net);
  j["assortativity"] = assort ? ordered_json(*assort) : ordered_json(nullptr);
  auto dist = average_distance(net);
  j["average_distance"] = dist ? ordered_json(*dist) : ordered_json(nullptr);
  j["clustering_modularity"] = communities.modularity;
  j["communities"] = {{"k", communities.partition.k},
                      {"labels", communities.partition.labels}};
  out << j.dump(2) << "\n";
}

// ----- posterior draws ---------------------------------------------------

void write_draws_csv(std::ostream& out, const PosteriorSamples& samples, int n,
                     int p) {
  write_csv_schema_line(out, "influence-draws");
  for (int i = 1; i <= n; ++i) out << "o_" << i << ",";
  for (int i = 1; i <= n; ++i)
    for (int k = 1; k <= p; ++k) out << "u_" << i << "_" << k << ",";
  out << "omega2,sigma2,loglik\n";
  for (std::size_t b = 0; b < samples.draws.size(); ++b) {
    const LatentState& s = samples.draws[b];
    for (int i = 0; i < n; ++i) out << format_double(s.O(i)) << ",";
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < p; ++k) out << format_double(s.U(i, k)) << ",";
    out << format_double(s.omega2) << "," << format_double(s.sigma2) << ","
        << format_double(samples.log_lik_trace[b]) << "\n";
  }
}

DrawsData read_draws_csv(std::istream& in) {
  expect_csv_schema(in, "influence-draws");
  std::string line;
  if (!std::getline(in, line)) throw input_error("draws file has no header");
  auto header = split_csv(line);
  int n = 0;
  while (n < static_cast<int>(header.size()) &&
         header[n] == "o_" + std::to_string(n + 1))
    ++n;
  if (n == 0) throw input_error("draws header: no o_ columns found");
  int u_cols = 0;
  while (n + u_cols < static_cast<int>(header.size()) &&
         header[n + u_cols].rfind("u_", 0) == 0)
    ++u_cols;
  if (u_cols == 0 || u_cols % n != 0)
    throw input_error("draws header: u_ columns do not match o_ columns");
  int p = u_cols / n;
  std::size_t expected = static_cast<std::size_t>(n) + u_cols + 3;
  if (header.size() != expected || header[expected - 3] != "omega2" ||
      header[expected - 2] != "sigma2" || header[expected - 1] != "loglik")
    throw input_error("draws header: expected omega2,sigma2,loglik suffix");

  DrawsData data;
  data.n = n;
  data.p = p;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != expected)
      throw input_error("draws row " + std::to_string(row_no) +
                        ": wrong column count");
    LatentState s;
    s.O.resize(n);
    s.U.resize(n, p);
    std::size_t f = 0;
    const std::string where = "draws row " + std::to_string(row_no);
    for (int i = 0; i < n; ++i) s.O(i) = parse_double(fields[f++], where);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < p; ++k) s.U(i, k) = parse_double(fields[f++], where);
    s.omega2 = parse_double(fields[f++], where);
    s.sigma2 = parse_double(fields[f++], where);
    data.log_lik.push_back(parse_double(fields[f++], where));
    data.draws.push_back(std::move(s));
  }
  if (data.draws.empty()) throw input_error("draws file contains no draws");
  return data;
}

// ----- latent state --------------------------------------------------------

void write_state_csv(std::ostream& out, const LatentState& state,
                     const std::vector<std::string>& ids) {
  write_csv_schema_line(out, "influence-state");
  const int p = state.latent_dim();
  out << "id,o";
  for (int k = 1; k <= p; ++k) out << ",u_" << k;
  out << "\n";
  for (int i = 0; i < state.n(); ++i) {
    out << (ids.empty() ? std::to_string(i) : ids[i]) << ","
        << format_double(state.O(i));
    for (int k = 0; k < p; ++k) out << "," << format_double(state.U(i, k));
    out << "\n";
  }
}

void write_state_meta_json(std::ostream& out, const LatentState& state) {
  ordered_json j;
  j["schema"] = schema_object("influence-state-meta");
  j["omega2"] = state.omega2;
  j["sigma2"] = state.sigma2;
  j["p"] = state.latent_dim();
  out << j.dump(2) << "\n";
}

LatentState read_state(std::istream& csv, std::istream& meta,
                       std::vector<std::string>* ids_out) {
  ordered_json j = ordered_json::parse(meta, nullptr, true, true);
  check_json_schema(j, "influence-state-meta");
  const int p = j.at("p").get<int>();

  expect_csv_schema(csv, "influence-state");
  std::string line;
  if (!std::getline(csv, line)) throw input_error("state file has no header");
  auto header = split_csv(line);
  if (static_cast<int>(header.size()) != p + 2 || header[0] != "id" ||
      header[1] != "o")
    throw input_error("state header: expected id,o,u_1..u_" + std::to_string(p));

  std::vector<std::string> ids;
  std::vector<double> o_values;
  std::vector<double> u_values;
  std::size_t row_no = 1;
  while (std::getline(csv, line)) {
    ++row_no;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (static_cast<int>(fields.size()) != p + 2)
      throw input_error("state row " + std::to_string(row_no) +
                        ": wrong column count");
    const std::string where = "state row " + std::to_string(row_no);
    ids.push_back(fields[0]);
    o_values.push_back(parse_double(fields[1], where));
    for (int k = 0; k < p; ++k)
      u_values.push_back(parse_double(fields[2 + k], where));
  }
  const int n = static_cast<int>(ids.size());
  if (n == 0) throw input_error("state file contains no rows");

  LatentState state;
  state.O = Eigen::Map<Eigen::VectorXd>(o_values.data(), n);
  state.U.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < p; ++k) state.U(i, k) = u_values[i * p + k];
  state.omega2 = j.at("omega2").get<double>();
  state.sigma2 = j.at("sigma2").get<double>();
  if (ids_out) *ids_out = std::move(ids);
  return state;
}

// ----- cascade outputs ------------------------------------------------------

void write_trace_csv(std::ostream& out, const CascadeTrace& trace) {
  write_csv_schema_line(out, "influence-trace");
  out << "jump_index,dt,elapsed,source,target,old_state,new_state,"
         "n_I,n_U,n_S,n_R\n";
  for (std::size_t k = 0; k < trace.jumps.size(); ++k) {
    const auto& j = trace.jumps[k];
    out << k << "," << format_double(j.dt) << "," << format_double(j.elapsed)
        << "," << j.source << "," << j.target << "," << opinion_code(j.old_state)
        << "," << opinion_code(j.new_state);
    for (int c = 0; c < 4; ++c) out << "," << j.counts[c];
    out << "\n";
  }
}

void write_cascade_summary_json(std::ostream& out, const CascadeSummary& summary) {
  ordered_json j;
  j["schema"] = schema_object("influence-cascade-summary");
  j["total_time"] = summary.total_time;
  j["reach"] = summary.reach;
  j["n_jumps"] = summary.n_jumps;
  j["stop_reason"] = summary.stop_reason;
  out << j.dump(2) << "\n";
}

// ----- experiment grid -------------------------------------------------------

void write_grid_csv(std::ostream& out, std::span<const ExperimentRecord> records) {
  write_csv_schema_line(out, "influence-grid");
  out << "spec_id,replicate,o_dist,i_dist,modularity_regime,initiator_rule,"
         "total_time,reach,realized_modularity,realized_avg_degree\n";
  for (const auto& r : records) {
    out << r.spec_id << "," << r.replicate << "," << to_string(r.o_dist) << ","
        << to_string(r.i_dist) << "," << to_string(r.modularity_regime) << ","
        << to_string(r.initiator_rule) << "," << format_double(r.total_time)
        << "," << format_double(r.reach) << ","
        << format_double(r.realized_modularity) << ","
        << format_double(r.realized_avg_degree) << "\n";
  }
}

namespace {

CapacityDist capacity_from_string(const std::string& s, const std::string& where) {
  if (s == "constant") return CapacityDist::constant_calibrated;
  if (s == "gamma") return CapacityDist::gamma_shifted;
  throw input_error("unknown o_dist '" + s + "' in " + where);
}

SusceptibilityDist susceptibility_from_string(const std::string& s,
                                              const std::string& where) {
  if (s == "constant") return SusceptibilityDist::constant_two;
  if (s == "gamma") return SusceptibilityDist::gamma;
  throw input_error("unknown i_dist '" + s + "' in " + where);
}

ModularityRegime regime_from_string(const std::string& s,
                                    const std::string& where) {
  if (s == "low") return ModularityRegime::low;
  if (s == "high") return ModularityRegime::high;
  throw input_error("unknown modularity_regime '" + s + "' in " + where);
}

InitiatorRule rule_from_string(const std::string& s, const std::string& where) {
  if (s == "random") return InitiatorRule::random_pair;
  if (s == "max_capacity") return InitiatorRule::max_capacity;
  throw input_error("unknown initiator_rule '" + s + "' in " + where);
}

}  // namespace

std::vector<ExperimentRecord> read_grid_csv(std::istream& in) {
  expect_csv_schema(in, "influence-grid");
  std::string line;
  if (!std::getline(in, line)) throw input_error("grid file has no header");
  const std::string expected =
      "spec_id,replicate,o_dist,i_dist,modularity_regime,initiator_rule,"
      "total_time,reach,realized_modularity,realized_avg_degree";
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv(line);
  auto want = split_csv(expected);
  for (std::size_t c = 0; c < want.size(); ++c)
    if (c >= header.size() || header[c] != want[c])
      throw input_error("grid header mismatch at column '" + want[c] + "'");

  std::vector<ExperimentRecord> records;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != want.size())
      throw input_error("grid row " + std::to_string(row_no) +
                        ": wrong column count");
    const std::string where = "grid row " + std::to_string(row_no);
    ExperimentRecord r;
    r.spec_id = static_cast<int>(parse_long(fields[0], where));
    r.replicate = static_cast<int>(parse_long(fields[1], where));
    r.o_dist = capacity_from_string(fields[2], where);
    r.i_dist = susceptibility_from_string(fields[3], where);
    r.modularity_regime = regime_from_string(fields[4], where);
    r.initiator_rule = rule_from_string(fields[5], where);
    r.total_time = parse_double(fields[6], where);
    r.reach = parse_double(fields[7], where);
    r.realized_modularity = parse_double(fields[8], where);
    r.realized_avg_degree = parse_double(fields[9], where);
    records.push_back(std::move(r));
  }
  if (records.empty()) throw input_error("grid file contains no records");
  return records;
}

// ----- posterior predictive checks ------------------------------------------

void write_ppc_csv(std::ostream& out, std::span<const PpcStatResult> results) {
  write_csv_schema_line(out, "influence-ppc");
  out << "statistic,replicate_index,value\n";
  for (const auto& r : results)
    for (std::size_t k = 0; k < r.replicates.size(); ++k) {
      out << r.name << "," << k << ",";
      if (r.replicates[k]) out << format_double(*r.replicates[k]);
      out << "\n";
    }
}

void write_ppc_summary_json(std::ostream& out,
                            std::span<const PpcStatResult> results) {
  ordered_json j;
  j["schema"] = schema_object("influence-ppc-summary");
  ordered_json stats = ordered_json::object();
  for (const auto& r : results) {
    ordered_json s;
    s["observed"] = r.observed ? ordered_json(*r.observed) : ordered_json(nullptr);
    s["tail_probability"] = r.tail_probability
                                ? ordered_json(*r.tail_probability)
                                : ordered_json(nullptr);
    s["replicates"] = r.replicates.size();
    s["missing"] = r.missing;
    stats[r.name] = std::move(s);
  }
  j["statistics"] = std::move(stats);
  out << j.dump(2) << "\n";
}

// ----- analysis report --------------------------------------------------------

void write_anova_json(std::ostream& out, const AnovaResult& result,
                      const std::optional<TestStatistic>& jb,
                      const std::optional<TestStatistic>& lev) {
  ordered_json j;
  j["schema"] = schema_object("influence-anova-report");
  j["response"] = result.response;
  j["coding"] =
      "treatment coding; reference levels: constant capacity (1), constant "
      "susceptibility (1), low modularity (1), random sampling (a); level "
      "tags follow the scenario numbering";
  j["intercept"] = result.intercept;
  ordered_json factors = ordered_json::array();
  for (const auto& f : result.factors) {
    ordered_json row;
    row["factor"] = f.name;
    ordered_json coef = ordered_json::array();
    for (const auto& [tag, value] : f.coefficients)
      coef.push_back({{"level", tag}, {"coefficient", value}});
    row["coefficients"] = std::move(coef);
    row["f"] = f.f_stat;
    row["p"] = f.p_value;
    row["df"] = f.df;
    factors.push_back(std::move(row));
  }
  j["factors"] = std::move(factors);
  j["model_ss"] = result.model_ss;
  j["residual_ss"] = result.residual_ss;
  j["total_ss"] = result.total_ss;
  j["residual_df"] = result.residual_df;
  j["excluded_records"] = result.excluded;
  ordered_json diag;
  diag["jarque_bera_stat"] = jb ? ordered_json(jb->statistic) : ordered_json(nullptr);
  diag["jarque_bera_p"] = jb ? ordered_json(jb->p_value) : ordered_json(nullptr);
  diag["levene_stat"] = lev ? ordered_json(lev->statistic) : ordered_json(nullptr);
  diag["levene_p"] = lev ? ordered_json(lev->p_value) : ordered_json(nullptr);
  j["diagnostics"] = std::move(diag);
  out << j.dump(2) << "\n";
}

// ----- coverage report ----------------------------------------------------------

void write_coverage_json(std::ostream& out, const CoverageResult& result, int n,
                         int p, std::uint64_t seed) {
  ordered_json j;
  j["schema"] = schema_object("influence-coverage");
  j["level"] = result.level;
  j["coverage_O"] = result.coverage_O;
  j["coverage_u"] = result.coverage_u;
  j["n"] = n;
  j["p"] = p;
  j["seed"] = seed;
  out << j.dump(2) << "\n";
}

// ----- fit configuration ---------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

FitConfig parse_fit_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[' && s.back() == ']') {
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw input_error("config line " + std::to_string(line_no) +
                        ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty())
      throw input_error("config line " + std::to_string(line_no) +
                        ": empty key or value");
    std::string full = section.empty() ? key : section + "." + key;
    if (kv.count(full))
      throw input_error("config: duplicate key '" + full + "'");
    kv[full] = value;
  }

  const std::set<std::string> known = {
      "prior.a_omega",          "prior.b_omega",
      "prior.a_sigma",          "prior.b_sigma",
      "sampler.samples",        "sampler.warmup",
      "sampler.thin",           "sampler.p",
      "sampler.seed",           "sampler.proposal_sd_o",
      "sampler.proposal_sd_u",  "sampler.adapt",
      "sampler.target_accept_o", "sampler.target_accept_u"};
  for (const auto& [key, value] : kv)
    if (!known.count(key)) throw input_error("config: unknown key '" + key + "'");

  auto require = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw input_error("config: missing key '" + key + "'");
    return it->second;
  };
  auto as_double = [&](const std::string& key, const std::string& value) {
    return parse_double(value, "config key '" + key + "'");
  };
  auto as_long = [&](const std::string& key, const std::string& value) {
    return parse_long(value, "config key '" + key + "'");
  };

  FitConfig config;
  config.hyper.a_omega = as_double("prior.a_omega", require("prior.a_omega"));
  config.hyper.b_omega = as_double("prior.b_omega", require("prior.b_omega"));
  config.hyper.a_sigma = as_double("prior.a_sigma", require("prior.a_sigma"));
  config.hyper.b_sigma = as_double("prior.b_sigma", require("prior.b_sigma"));
  config.sampler.n_samples =
      static_cast<int>(as_long("sampler.samples", require("sampler.samples")));
  config.sampler.warmup =
      static_cast<int>(as_long("sampler.warmup", require("sampler.warmup")));
  config.sampler.thin =
      static_cast<int>(as_long("sampler.thin", require("sampler.thin")));
  config.sampler.latent_dim =
      static_cast<int>(as_long("sampler.p", require("sampler.p")));

  if (auto it = kv.find("sampler.seed"); it != kv.end())
    config.sampler.seed =
        static_cast<std::uint64_t>(as_long("sampler.seed", it->second));
  if (auto it = kv.find("sampler.proposal_sd_o"); it != kv.end())
    config.sampler.proposal_sd_O = as_double("sampler.proposal_sd_o", it->second);
  if (auto it = kv.find("sampler.proposal_sd_u"); it != kv.end())
    config.sampler.proposal_sd_u = as_double("sampler.proposal_sd_u", it->second);
  if (auto it = kv.find("sampler.adapt"); it != kv.end()) {
    if (it->second == "true") config.sampler.adapt = true;
    else if (it->second == "false") config.sampler.adapt = false;
    else throw input_error("config key 'sampler.adapt' must be true or false");
  }
  if (auto it = kv.find("sampler.target_accept_o"); it != kv.end())
    config.sampler.target_accept_O =
        as_double("sampler.target_accept_o", it->second);
  if (auto it = kv.find("sampler.target_accept_u"); it != kv.end())
    config.sampler.target_accept_u =
        as_double("sampler.target_accept_u", it->second);

  try {
    config.hyper.validate();
    config.sampler.validate();
  } catch (const input_error& e) {
    throw input_error(std::string("config: ") + e.what());
  }
  return config;
}

}  // namespace influence
