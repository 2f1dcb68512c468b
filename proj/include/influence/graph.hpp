#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "influence/errors.hpp"

namespace influence {

// Directed binary graph over dense 0-based vertex indices. No self-loops, no
// duplicate edges. Immutable after construction and safe to share across
// threads; every statistic below is a pure function of it.
class DirectedNetwork {
 public:
  using Edge = std::pair<std::uint32_t, std::uint32_t>;

  // Duplicate edges are collapsed; self-loops and out-of-range indices are
  // rejected.
  DirectedNetwork(std::size_t n, std::vector<Edge> edges,
                  std::vector<std::string> vertex_ids = {});

  std::size_t vertex_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  const std::vector<std::uint32_t>& out_neighbors(std::uint32_t v) const {
    return out_[v];
  }
  const std::vector<std::uint32_t>& in_neighbors(std::uint32_t v) const {
    return in_[v];
  }
  bool has_edge(std::uint32_t i, std::uint32_t j) const;
  std::size_t total_degree(std::uint32_t v) const {
    return out_[v].size() + in_[v].size();
  }

  // Source-file ids for each vertex; empty for synthetic graphs.
  const std::vector<std::string>& vertex_ids() const { return ids_; }

  // Row-major n*n adjacency bytes, for likelihood inner loops.
  std::vector<std::uint8_t> dense_adjacency() const;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;  // sorted lexicographically, unique
  std::vector<std::vector<std::uint32_t>> out_, in_;
  std::vector<std::string> ids_;
};

// Assignment of every vertex to one of k communities, labels 0..k-1.
struct Partition {
  std::vector<int> labels;
  int k = 0;
};

// Throws input_error unless labels are a contiguous cover of 0..k-1.
void validate_partition(const Partition& p, std::size_t n);

struct EdgeListFormat {
  enum class Header { automatic, yes, no };
  // automatic treats a literal first record "source,target" as a header
  Header header = Header::automatic;
  char delimiter = ',';
};

// Reads "src,dst" records with string or integer ids. Ids are mapped to dense
// indices in first-appearance order, duplicates are collapsed, self-loops and
// malformed records raise input_error with the line number.
DirectedNetwork load_edge_list(std::istream& in, const EdgeListFormat& format = {});

// Largest weakly connected component, vertices reindexed densely in ascending
// original order. Ties between equal-size components go to the one containing
// the lowest original index.
DirectedNetwork giant_component(const DirectedNetwork& net);

// |edges| / (n (n-1)); requires n >= 2.
double density(const DirectedNetwork& net);

struct DegreeStats {
  double mean = 0.0;
  double sd = 0.0;  // population formula (divide by n)
};
DegreeStats degree_stats(const DirectedNetwork& net);

// Global clustering coefficient of the undirected projection:
// 3 * triangles / connected triples, 0 when no triples exist.
double transitivity(const DirectedNetwork& net);

// Pearson correlation of total degrees over the ordered endpoint pairs of the
// undirected projection's edges. nullopt when the degree variance is zero.
std::optional<double> assortativity(const DirectedNetwork& net);

// Mean directed shortest-path length over ordered reachable pairs, excluding
// self-pairs. nullopt when no pair is reachable.
std::optional<double> average_distance(const DirectedNetwork& net);

struct CommunityResult {
  Partition partition;
  double modularity = 0.0;
};

// Agglomerative modularity maximization (greedy pairwise merges on the
// undirected projection); returns the partition at the best merge step.
CommunityResult fast_greedy_communities(const DirectedNetwork& net);

// Newman modularity Q of a partition on the undirected projection.
double modularity(const DirectedNetwork& net, const Partition& partition);

// Named statistics usable in posterior predictive checks. Undefined values
// are reported as nullopt instead of throwing.
using GraphStatistic =
    std::function<std::optional<double>(const DirectedNetwork&)>;
const std::map<std::string, GraphStatistic>& graph_statistic_registry();

}  // namespace influence
