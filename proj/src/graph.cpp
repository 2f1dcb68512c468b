#include "influence/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace influence {

DirectedNetwork::DirectedNetwork(std::size_t n, std::vector<Edge> edges,
                                 std::vector<std::string> vertex_ids)
    : n_(n), ids_(std::move(vertex_ids)) {
  if (!ids_.empty() && ids_.size() != n_)
    throw input_error("vertex id list does not match vertex count");
  for (const auto& [s, t] : edges) {
    if (s >= n_ || t >= n_)
      throw input_error("edge index out of range");
    if (s == t)
      throw input_error("self-loop on vertex " + std::to_string(s));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  out_.assign(n_, {});
  in_.assign(n_, {});
  for (const auto& [s, t] : edges_) {
    out_[s].push_back(t);
    in_[t].push_back(s);
  }
  for (auto& v : in_) std::sort(v.begin(), v.end());
  // out_ lists are already sorted because edges_ is
}

bool DirectedNetwork::has_edge(std::uint32_t i, std::uint32_t j) const {
  const auto& nb = out_[i];
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<std::uint8_t> DirectedNetwork::dense_adjacency() const {
  std::vector<std::uint8_t> adj(n_ * n_, 0);
  for (const auto& [s, t] : edges_) adj[static_cast<std::size_t>(s) * n_ + t] = 1;
  return adj;
}

void validate_partition(const Partition& p, std::size_t n) {
  if (p.labels.size() != n)
    throw input_error("partition does not cover all vertices");
  if (p.k <= 0) throw input_error("partition has no communities");
  std::vector<char> seen(p.k, 0);
  for (int lab : p.labels) {
    if (lab < 0 || lab >= p.k)
      throw input_error("partition label out of range");
    seen[lab] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw input_error("partition labels are not contiguous");
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

DirectedNetwork load_edge_list(std::istream& in, const EdgeListFormat& format) {
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<std::string> ids;
  std::vector<DirectedNetwork::Edge> edges;

  auto intern = [&](const std::string& id) {
    auto it = index.find(id);
    if (it != index.end()) return it->second;
    auto idx = static_cast<std::uint32_t>(ids.size());
    index.emplace(id, idx);
    ids.push_back(id);
    return idx;
  };

  std::string line;
  std::size_t line_no = 0;
  bool first_record = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::string rec = trim(line);
    if (rec.empty()) continue;

    std::size_t sep = rec.find(format.delimiter);
    if (sep == std::string::npos ||
        rec.find(format.delimiter, sep + 1) != std::string::npos)
      throw input_error("line " + std::to_string(line_no) +
                        ": expected exactly two fields");
    std::string src = trim(rec.substr(0, sep));
    std::string dst = trim(rec.substr(sep + 1));
    if (src.empty() || dst.empty())
      throw input_error("line " + std::to_string(line_no) + ": empty field");

    if (first_record) {
      first_record = false;
      bool header_like = (src == "source" && dst == "target");
      if (format.header == EdgeListFormat::Header::yes ||
          (format.header == EdgeListFormat::Header::automatic && header_like))
        continue;
    }
    if (src == dst)
      throw input_error("line " + std::to_string(line_no) + ": self-loop on '" +
                        src + "'");
    std::uint32_t src_idx = intern(src);  // source interned first: ids follow
    std::uint32_t dst_idx = intern(dst);  // first-appearance order exactly
    edges.emplace_back(src_idx, dst_idx);
  }
  const std::size_t n = ids.size();
  return DirectedNetwork(n, std::move(edges), std::move(ids));
}

DirectedNetwork giant_component(const DirectedNetwork& net) {
  const std::size_t n = net.vertex_count();
  if (n == 0) throw input_error("giant_component: empty network");

  std::vector<int> comp(n, -1);
  int n_comp = 0;
  for (std::uint32_t root = 0; root < n; ++root) {
    if (comp[root] >= 0) continue;
    comp[root] = n_comp;
    std::deque<std::uint32_t> queue{root};
    while (!queue.empty()) {
      std::uint32_t v = queue.front();
      queue.pop_front();
      for (auto w : net.out_neighbors(v))
        if (comp[w] < 0) comp[w] = n_comp, queue.push_back(w);
      for (auto w : net.in_neighbors(v))
        if (comp[w] < 0) comp[w] = n_comp, queue.push_back(w);
    }
    ++n_comp;
  }

  // components are discovered in order of their lowest vertex, so the first
  // component of maximal size wins ties
  std::vector<std::size_t> size(n_comp, 0);
  for (auto c : comp) ++size[c];
  int best = static_cast<int>(std::max_element(size.begin(), size.end()) -
                              size.begin());

  std::vector<std::uint32_t> remap(n, 0);
  std::vector<std::string> ids;
  const auto& old_ids = net.vertex_ids();
  std::uint32_t next = 0;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (comp[v] == best) {
      remap[v] = next++;
      if (!old_ids.empty()) ids.push_back(old_ids[v]);
    }
  }
  std::vector<DirectedNetwork::Edge> edges;
  for (const auto& [s, t] : net.edges())
    if (comp[s] == best && comp[t] == best)
      edges.emplace_back(remap[s], remap[t]);
  return DirectedNetwork(next, std::move(edges), std::move(ids));
}

double density(const DirectedNetwork& net) {
  const double n = static_cast<double>(net.vertex_count());
  if (net.vertex_count() < 2)
    throw input_error("density: need at least two vertices");
  return static_cast<double>(net.edge_count()) / (n * (n - 1.0));
}

DegreeStats degree_stats(const DirectedNetwork& net) {
  const std::size_t n = net.vertex_count();
  if (n == 0) throw input_error("degree_stats: empty network");
  DegreeStats st;
  st.mean = 2.0 * static_cast<double>(net.edge_count()) / static_cast<double>(n);
  double ss = 0.0;
  for (std::uint32_t v = 0; v < n; ++v) {
    double d = static_cast<double>(net.total_degree(v)) - st.mean;
    ss += d * d;
  }
  st.sd = std::sqrt(ss / static_cast<double>(n));
  return st;
}

namespace {

// simple undirected projection: mutual pairs collapse to one edge
std::vector<std::vector<std::uint32_t>> undirected_adjacency(
    const DirectedNetwork& net) {
  std::vector<std::vector<std::uint32_t>> adj(net.vertex_count());
  for (const auto& [s, t] : net.edges()) {
    adj[s].push_back(t);
    adj[t].push_back(s);
  }
  for (auto& nb : adj) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return adj;
}

std::vector<DirectedNetwork::Edge> undirected_edges(
    const std::vector<std::vector<std::uint32_t>>& adj) {
  std::vector<DirectedNetwork::Edge> edges;
  for (std::uint32_t v = 0; v < adj.size(); ++v)
    for (auto w : adj[v])
      if (v < w) edges.emplace_back(v, w);
  return edges;
}

}  // namespace

double transitivity(const DirectedNetwork& net) {
  auto adj = undirected_adjacency(net);
  double closed = 0.0;  // common neighbors summed over edges = 3 * triangles
  for (std::uint32_t v = 0; v < adj.size(); ++v) {
    for (auto w : adj[v]) {
      if (v >= w) continue;
      const auto& a = adj[v];
      const auto& b = adj[w];
      std::size_t i = 0, j = 0;
      while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (a[i] > b[j]) ++j;
        else ++closed, ++i, ++j;
      }
    }
  }
  double triples = 0.0;
  for (const auto& nb : adj) {
    double d = static_cast<double>(nb.size());
    triples += d * (d - 1.0) / 2.0;
  }
  if (triples == 0.0) return 0.0;
  return closed / triples;
}

std::optional<double> assortativity(const DirectedNetwork& net) {
  auto adj = undirected_adjacency(net);
  auto edges = undirected_edges(adj);
  if (edges.empty()) return std::nullopt;

  // both orderings of each undirected edge contribute one (x, y) pair
  double sx = 0, sxx = 0, sxy = 0;
  const double m = 2.0 * static_cast<double>(edges.size());
  for (const auto& [v, w] : edges) {
    double dv = static_cast<double>(net.total_degree(v));
    double dw = static_cast<double>(net.total_degree(w));
    sx += dv + dw;
    sxx += dv * dv + dw * dw;
    sxy += 2.0 * dv * dw;
  }
  double mean = sx / m;
  double var = sxx / m - mean * mean;
  if (var <= 1e-12 * std::max(1.0, mean * mean)) return std::nullopt;
  double cov = sxy / m - mean * mean;
  return cov / var;
}

std::optional<double> average_distance(const DirectedNetwork& net) {
  const std::size_t n = net.vertex_count();
  double total = 0.0;
  std::size_t pairs = 0;
  std::vector<int> dist(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::deque<std::uint32_t> queue{s};
    while (!queue.empty()) {
      std::uint32_t v = queue.front();
      queue.pop_front();
      for (auto w : net.out_neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          total += dist[w];
          ++pairs;
          queue.push_back(w);
        }
      }
    }
  }
  if (pairs == 0) return std::nullopt;
  return total / static_cast<double>(pairs);
}

double modularity(const DirectedNetwork& net, const Partition& partition) {
  if (partition.labels.size() != net.vertex_count())
    throw input_error("modularity: partition does not cover all vertices");
  auto adj = undirected_adjacency(net);
  auto edges = undirected_edges(adj);
  const double m = static_cast<double>(edges.size());
  if (m == 0.0) return 0.0;

  int k = partition.k > 0
              ? partition.k
              : 1 + *std::max_element(partition.labels.begin(),
                                      partition.labels.end());
  std::vector<double> within(k, 0.0), deg(k, 0.0);
  for (const auto& [v, w] : edges) {
    int cv = partition.labels[v];
    int cw = partition.labels[w];
    if (cv < 0 || cv >= k || cw < 0 || cw >= k)
      throw input_error("modularity: label out of range");
    if (cv == cw) within[cv] += 1.0;
  }
  for (std::uint32_t v = 0; v < adj.size(); ++v)
    deg[partition.labels[v]] += static_cast<double>(adj[v].size());

  double q = 0.0;
  for (int c = 0; c < k; ++c) {
    double a = deg[c] / (2.0 * m);
    q += within[c] / m - a * a;
  }
  return q;
}

CommunityResult fast_greedy_communities(const DirectedNetwork& net) {
  const std::size_t n = net.vertex_count();
  if (n == 0) throw input_error("fast_greedy_communities: empty network");
  auto adj = undirected_adjacency(net);
  auto edges = undirected_edges(adj);
  const double m = static_cast<double>(edges.size());

  if (m == 0.0) {
    Partition p;
    p.labels.resize(n);
    std::iota(p.labels.begin(), p.labels.end(), 0);
    p.k = static_cast<int>(n);
    return {std::move(p), 0.0};
  }

  // symmetric cross-community edge fractions e[i][j] = edges(i,j) / (2m) and
  // degree fractions a[i] = d_i / (2m); merging i and j changes Q by
  // 2 (e[i][j] - a[i] a[j])
  std::vector<std::map<int, double>> e(n);
  std::vector<double> a(n, 0.0);
  std::vector<char> alive(n, 1);
  for (const auto& [v, w] : edges) {
    e[v][w] += 1.0 / (2.0 * m);
    e[w][v] += 1.0 / (2.0 * m);
  }
  for (std::uint32_t v = 0; v < n; ++v)
    a[v] = static_cast<double>(adj[v].size()) / (2.0 * m);

  double q = 0.0;
  for (std::uint32_t v = 0; v < n; ++v) q -= a[v] * a[v];

  double best_q = q;
  std::size_t best_step = 0;
  std::vector<std::pair<int, int>> merges;

  for (;;) {
    int bi = -1, bj = -1;
    double best_dq = -std::numeric_limits<double>::infinity();
    for (std::uint32_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (const auto& [j, eij] : e[i]) {
        if (j <= static_cast<int>(i) || !alive[j]) continue;
        double dq = 2.0 * (eij - a[i] * a[j]);
        if (dq > best_dq) {
          best_dq = dq;
          bi = static_cast<int>(i);
          bj = j;
        }
      }
    }
    if (bi < 0) break;  // no connected pair left

    // merge bj into bi; within-community edge mass never feeds future
    // merge gains, so only cross-community entries are maintained
    for (const auto& [k2, v2] : e[bj]) {
      if (k2 == bi) continue;
      e[bi][k2] += v2;
      e[k2][bi] += v2;
      e[k2].erase(bj);
    }
    e[bi].erase(bj);
    e[bj].clear();
    a[bi] += a[bj];
    alive[bj] = 0;

    q += best_dq;
    merges.emplace_back(bi, bj);
    if (q > best_q + 1e-12) {
      best_q = q;
      best_step = merges.size();
    }
  }

  // replay merges up to the best step
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t s = 0; s < best_step; ++s)
    parent[find(merges[s].second)] = find(merges[s].first);

  Partition p;
  p.labels.assign(n, -1);
  int next = 0;
  for (std::uint32_t v = 0; v < n; ++v) {
    int r = find(static_cast<int>(v));
    if (p.labels[r] < 0) p.labels[r] = next++;
    p.labels[v] = p.labels[r];
  }
  p.k = next;
  double best_partition_q = modularity(net, p);
  return {std::move(p), best_partition_q};
}

const std::map<std::string, GraphStatistic>& graph_statistic_registry() {
  static const std::map<std::string, GraphStatistic> registry = {
      {"density",
       [](const DirectedNetwork& g) -> std::optional<double> {
         if (g.vertex_count() < 2) return std::nullopt;
         return density(g);
       }},
      {"average_degree",
       [](const DirectedNetwork& g) -> std::optional<double> {
         if (g.vertex_count() == 0) return std::nullopt;
         return degree_stats(g).mean;
       }},
      {"degree_sd",
       [](const DirectedNetwork& g) -> std::optional<double> {
         if (g.vertex_count() == 0) return std::nullopt;
         return degree_stats(g).sd;
       }},
      {"transitivity",
       [](const DirectedNetwork& g) -> std::optional<double> {
         return transitivity(g);
       }},
      {"assortativity",
       [](const DirectedNetwork& g) { return assortativity(g); }},
      {"average_distance",
       [](const DirectedNetwork& g) { return average_distance(g); }},
      {"clustering_modularity",
       [](const DirectedNetwork& g) -> std::optional<double> {
         if (g.vertex_count() == 0) return std::nullopt;
         return fast_greedy_communities(g).modularity;
       }},
  };
  return registry;
}

}  // namespace influence
