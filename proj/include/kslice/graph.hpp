#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kslice/numeric.hpp"

namespace kslice {

using Vertex = int;
using Edge = std::pair<Vertex, Vertex>;

/// Reported by parse_graph; carries the 1-based line of the offending input.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Undirected simple graph with sorted adjacency lists and a declared degree bound.
/// Immutable after construction.
class Graph {
 public:
  Graph() = default;

  /// Throws std::invalid_argument on self-loops, duplicates, out-of-range
  /// endpoints, or a vertex whose degree exceeds the declared bound.
  /// Without a declared bound, delta is the observed max degree (at least 1).
  Graph(int n, std::span<const Edge> edges, std::optional<int> delta = std::nullopt);

  int n() const { return static_cast<int>(adjacency_.size()); }
  std::size_t edge_count() const { return edge_count_; }
  int delta() const { return delta_; }
  int max_degree() const;
  int degree(Vertex v) const { return static_cast<int>(adjacency_[v].size()); }
  std::span<const Vertex> neighbors(Vertex v) const { return adjacency_[v]; }
  bool adjacent(Vertex u, Vertex v) const;

  /// Edges (u, v) with u < v in lexicographic order.
  std::vector<Edge> edges() const;

  /// Open-neighbourhood masks; requires n <= 64.
  std::vector<Mask> neighbor_masks() const;

  /// Same vertices and edges with a different declared degree bound.
  Graph with_delta(int delta) const;

  bool operator==(const Graph& other) const {
    return adjacency_ == other.adjacency_ && delta_ == other.delta_;
  }

 private:
  std::vector<std::vector<Vertex>> adjacency_;
  std::size_t edge_count_ = 0;
  int delta_ = 1;
};

/// "n m" header followed by m lines "u v"; blank lines and '#' comments ignored.
Graph parse_graph(std::string_view text, std::optional<int> delta = std::nullopt);
Graph read_graph_file(const std::string& path, std::optional<int> delta = std::nullopt);

/// Canonical edge-list document: header then edges sorted lexicographically.
std::string serialize_graph(const Graph& g);

struct ComponentDecomposition {
  std::vector<std::vector<Vertex>> components;  ///< each sorted; ordered by minimum vertex
  std::vector<int> label;                       ///< vertex -> component index

  std::size_t count() const { return components.size(); }
  std::vector<std::size_t> sizes() const;
};

ComponentDecomposition components(const Graph& g);

/// Whether `vertices` is exactly the vertex set of one connected component.
bool is_component(const Graph& g, std::span<const Vertex> vertices);

/// Non-negative rational p/q.
struct Ratio {
  std::int64_t num = 1;
  std::int64_t den = 16;
};

struct GoodnessReport {
  bool is_good = false;
  std::size_t max_component_size = 0;
  std::size_t component_count = 0;
  double size_cap = 0;          ///< 1000 * delta * ln n
  std::size_t count_floor = 0;  ///< ceil(coeff * n / delta)
};

/// Component-structure test with natural log in the size cap; requires n >= 2.
GoodnessReport is_delta_good(const Graph& g, Ratio count_floor_coeff = {});

/// Result of vertex surgery: the new graph plus the stable relabelling.
struct Surgery {
  Graph graph;
  std::vector<Vertex> old_to_new;  ///< -1 for removed vertices
  std::vector<Vertex> new_to_old;
};

/// Induced subgraph on `keep` (any order, duplicates rejected), relabelled by
/// increasing original index. The declared degree bound is inherited.
Surgery induced_subgraph(const Graph& g, std::span<const Vertex> keep);
Surgery delete_vertex(const Graph& g, Vertex u);
Surgery delete_closed_neighborhood(const Graph& g, Vertex u);

struct GoodnessExperiment {
  std::size_t trials = 0;
  std::size_t failures = 0;
  double failure_rate() const { return trials ? static_cast<double>(failures) / trials : 0.0; }
};

/// Draws uniform supersets W of `s_set` with |W| = ell and counts how often
/// the induced graph fails is_delta_good (judged against g's declared bound).
GoodnessExperiment random_subset_goodness_experiment(const Graph& g,
                                                     std::span<const Vertex> s_set,
                                                     int ell, std::size_t trials,
                                                     std::uint64_t seed,
                                                     Ratio count_floor_coeff = {});

// Generators used by the corpus, tests and sweeps.
Graph empty_graph(int n, std::optional<int> delta = std::nullopt);
Graph path_graph(int n);
Graph cycle_graph(int n);
Graph complete_graph(int n);
Graph disjoint_union(std::span<const Graph> parts);
/// Greedy random graph: pairs visited in seeded random order, each kept with
/// probability keep_probability if both endpoints stay within max_degree.
Graph random_bounded_degree(int n, int max_degree, std::uint64_t seed,
                            double keep_probability = 1.0);
/// Uniform random recursive forest: vertex v > 0 attaches to a uniform earlier
/// vertex with probability attach_probability, subject to max_degree.
Graph random_forest(int n, int max_degree, std::uint64_t seed, double attach_probability = 0.8);

}  // namespace kslice
