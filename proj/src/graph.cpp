#include "kslice/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kslice/rng.hpp"

namespace kslice {

Graph::Graph(int n, std::span<const Edge> edges, std::optional<int> delta) {
  if (n < 0) throw std::invalid_argument("vertex count must be non-negative");
  adjacency_.assign(static_cast<std::size_t>(n), {});
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw std::invalid_argument("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                  ") out of range");
    }
    if (u == v) throw std::invalid_argument("self-loop at vertex " + std::to_string(u));
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end());
    if (std::adjacent_find(list.begin(), list.end()) != list.end()) {
      throw std::invalid_argument("duplicate edge");
    }
  }
  edge_count_ = edges.size();
  const int observed = max_degree();
  if (delta) {
    if (*delta < 1) throw std::invalid_argument("degree bound must be positive");
    if (observed > *delta) {
      throw std::invalid_argument("max degree " + std::to_string(observed) +
                                  " exceeds declared bound " + std::to_string(*delta));
    }
    delta_ = *delta;
  } else {
    delta_ = std::max(observed, 1);
  }
}

int Graph::max_degree() const {
  std::size_t best = 0;
  for (const auto& list : adjacency_) best = std::max(best, list.size());
  return static_cast<int>(best);
}

bool Graph::adjacent(Vertex u, Vertex v) const {
  const auto& list = adjacency_.at(u);
  return std::binary_search(list.begin(), list.end(), v);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (Vertex u = 0; u < n(); ++u) {
    for (Vertex v : adjacency_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

std::vector<Mask> Graph::neighbor_masks() const {
  if (n() > 64) throw std::invalid_argument("bitmask view needs n <= 64");
  std::vector<Mask> masks(adjacency_.size(), 0);
  for (Vertex v = 0; v < n(); ++v) {
    for (Vertex w : adjacency_[v]) masks[v] |= Mask{1} << w;
  }
  return masks;
}

Graph Graph::with_delta(int delta) const {
  const auto e = edges();
  return Graph(n(), e, delta);
}

namespace {

std::vector<std::string> tokens_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    if (tok.front() == '#') break;
    out.push_back(tok);
  }
  return out;
}

long long parse_int(const std::string& tok, std::size_t line) {
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(tok, &used);
  } catch (const std::exception&) {
    throw ParseError(line, "expected integer, got '" + tok + "'");
  }
  if (used != tok.size()) throw ParseError(line, "expected integer, got '" + tok + "'");
  return value;
}

}  // namespace

Graph parse_graph(std::string_view text, std::optional<int> delta) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  long long n = -1;
  long long m = -1;
  std::vector<Edge> edges;
  std::vector<std::vector<Vertex>> seen;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto toks = tokens_of(line);
    if (toks.empty()) continue;
    if (toks.size() != 2) throw ParseError(line_no, "expected two integers");
    const long long a = parse_int(toks[0], line_no);
    const long long b = parse_int(toks[1], line_no);
    if (n < 0) {
      if (a < 0 || b < 0) throw ParseError(line_no, "negative header value");
      if (a > (1 << 26)) throw ParseError(line_no, "vertex count too large");
      n = a;
      m = b;
      seen.assign(static_cast<std::size_t>(n), {});
      continue;
    }
    if (static_cast<long long>(edges.size()) >= m) {
      throw ParseError(line_no, "more edge lines than declared (" + std::to_string(m) + ")");
    }
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw ParseError(line_no, "vertex out of range [0, " + std::to_string(n) + ")");
    }
    if (a == b) throw ParseError(line_no, "self-loop at vertex " + std::to_string(a));
    auto u = static_cast<Vertex>(std::min(a, b));
    auto v = static_cast<Vertex>(std::max(a, b));
    auto& list = seen[u];
    if (std::find(list.begin(), list.end(), v) != list.end()) {
      throw ParseError(line_no, "duplicate edge " + std::to_string(u) + " " + std::to_string(v));
    }
    list.push_back(v);
    edges.emplace_back(static_cast<Vertex>(a), static_cast<Vertex>(b));
  }
  if (n < 0) throw ParseError(line_no + 1, "missing 'n m' header");
  if (static_cast<long long>(edges.size()) != m) {
    throw ParseError(line_no + 1, "expected " + std::to_string(m) + " edges, found " +
                                      std::to_string(edges.size()));
  }
  try {
    return Graph(static_cast<int>(n), edges, delta);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no, e.what());
  }
}

Graph read_graph_file(const std::string& path, std::optional<int> delta) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open graph file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str(), delta);
}

std::string serialize_graph(const Graph& g) {
  std::ostringstream out;
  out << g.n() << ' ' << g.edge_count() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
  return out.str();
}

std::vector<std::size_t> ComponentDecomposition::sizes() const {
  std::vector<std::size_t> out;
  out.reserve(components.size());
  for (const auto& c : components) out.push_back(c.size());
  return out;
}

ComponentDecomposition components(const Graph& g) {
  ComponentDecomposition d;
  d.label.assign(static_cast<std::size_t>(g.n()), -1);
  std::vector<Vertex> stack;
  for (Vertex s = 0; s < g.n(); ++s) {
    if (d.label[s] >= 0) continue;
    const int id = static_cast<int>(d.components.size());
    std::vector<Vertex> members;
    d.label[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const Vertex v = stack.back();
      stack.pop_back();
      members.push_back(v);
      for (Vertex w : g.neighbors(v)) {
        if (d.label[w] < 0) {
          d.label[w] = id;
          stack.push_back(w);
        }
      }
    }
    std::sort(members.begin(), members.end());
    d.components.push_back(std::move(members));
  }
  return d;
}

bool is_component(const Graph& g, std::span<const Vertex> vertices) {
  if (vertices.empty()) return false;
  for (Vertex v : vertices) {
    if (v < 0 || v >= g.n()) return false;
  }
  const auto d = components(g);
  const int id = d.label[vertices.front()];
  std::vector<Vertex> sorted(vertices.begin(), vertices.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted == d.components[id];
}

GoodnessReport is_delta_good(const Graph& g, Ratio coeff) {
  if (g.n() < 2) throw std::invalid_argument("goodness needs n >= 2");
  if (coeff.num < 0 || coeff.den <= 0) throw std::invalid_argument("invalid count floor coefficient");
  const auto d = components(g);
  GoodnessReport r;
  r.component_count = d.count();
  for (const auto& c : d.components) r.max_component_size = std::max(r.max_component_size, c.size());
  r.size_cap = 1000.0 * g.delta() * std::log(static_cast<double>(g.n()));
  const auto numer = static_cast<std::int64_t>(coeff.num) * g.n();
  const auto denom = static_cast<std::int64_t>(coeff.den) * g.delta();
  r.count_floor = static_cast<std::size_t>((numer + denom - 1) / denom);
  r.is_good = g.max_degree() <= g.delta() &&
              static_cast<double>(r.max_component_size) <= r.size_cap &&
              r.component_count >= r.count_floor;
  return r;
}

Surgery induced_subgraph(const Graph& g, std::span<const Vertex> keep) {
  Surgery s;
  s.old_to_new.assign(static_cast<std::size_t>(g.n()), -1);
  std::vector<Vertex> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("duplicate vertex in induced subgraph");
  }
  for (Vertex v : sorted) {
    if (v < 0 || v >= g.n()) throw std::invalid_argument("vertex out of range");
    s.old_to_new[v] = static_cast<Vertex>(s.new_to_old.size());
    s.new_to_old.push_back(v);
  }
  std::vector<Edge> edges;
  for (const auto& [u, v] : g.edges()) {
    if (s.old_to_new[u] >= 0 && s.old_to_new[v] >= 0) edges.emplace_back(s.old_to_new[u], s.old_to_new[v]);
  }
  s.graph = Graph(static_cast<int>(s.new_to_old.size()), edges, g.delta());
  return s;
}

Surgery delete_vertex(const Graph& g, Vertex u) {
  if (u < 0 || u >= g.n()) throw std::out_of_range("vertex " + std::to_string(u) + " out of range");
  std::vector<Vertex> keep;
  for (Vertex v = 0; v < g.n(); ++v) {
    if (v != u) keep.push_back(v);
  }
  return induced_subgraph(g, keep);
}

Surgery delete_closed_neighborhood(const Graph& g, Vertex u) {
  if (u < 0 || u >= g.n()) throw std::out_of_range("vertex " + std::to_string(u) + " out of range");
  std::vector<char> drop(static_cast<std::size_t>(g.n()), 0);
  drop[u] = 1;
  for (Vertex w : g.neighbors(u)) drop[w] = 1;
  std::vector<Vertex> keep;
  for (Vertex v = 0; v < g.n(); ++v) {
    if (!drop[v]) keep.push_back(v);
  }
  return induced_subgraph(g, keep);
}

GoodnessExperiment random_subset_goodness_experiment(const Graph& g, std::span<const Vertex> s_set,
                                                     int ell, std::size_t trials, std::uint64_t seed,
                                                     Ratio coeff) {
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  std::vector<char> in_s(static_cast<std::size_t>(g.n()), 0);
  for (Vertex v : s_set) {
    if (v < 0 || v >= g.n()) throw std::invalid_argument("s_set vertex out of range");
    if (in_s[v]) throw std::invalid_argument("duplicate vertex in s_set");
    in_s[v] = 1;
  }
  const auto s_size = static_cast<int>(s_set.size());
  if (ell < s_size || ell > g.n()) throw std::invalid_argument("need |s_set| <= ell <= n");
  if (ell < 2) throw std::invalid_argument("ell must be at least 2");
  {
    const auto restricted = induced_subgraph(g, s_set);
    for (const auto& c : components(restricted.graph).components) {
      if (c.size() > 2) throw std::invalid_argument("s_set induces a component larger than 2");
    }
  }
  std::vector<Vertex> rest;
  for (Vertex v = 0; v < g.n(); ++v) {
    if (!in_s[v]) rest.push_back(v);
  }
  Rng rng(seed, 0x676f6f64);  // "good"
  GoodnessExperiment out;
  out.trials = trials;
  std::vector<Vertex> w;
  for (std::size_t t = 0; t < trials; ++t) {
    // partial Fisher-Yates: the first ell - |S| entries of `rest` are the draw
    const auto need = static_cast<std::size_t>(ell - s_size);
    for (std::size_t i = 0; i < need; ++i) {
      const auto j = i + rng.below(rest.size() - i);
      std::swap(rest[i], rest[j]);
    }
    w.assign(s_set.begin(), s_set.end());
    w.insert(w.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(need));
    const auto sub = induced_subgraph(g, w);
    if (!is_delta_good(sub.graph, coeff).is_good) ++out.failures;
  }
  return out;
}

Graph empty_graph(int n, std::optional<int> delta) { return Graph(n, std::span<const Edge>{}, delta); }

Graph path_graph(int n) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph(n, e);
}

Graph cycle_graph(int n) {
  if (n < 3) throw std::invalid_argument("cycle needs n >= 3");
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Graph(n, e);
}

Graph complete_graph(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  }
  return Graph(n, e);
}

Graph disjoint_union(std::span<const Graph> parts) {
  std::vector<Edge> e;
  int offset = 0;
  int delta = 1;
  for (const auto& p : parts) {
    for (const auto& [u, v] : p.edges()) e.emplace_back(u + offset, v + offset);
    offset += p.n();
    delta = std::max(delta, p.delta());
  }
  return Graph(offset, e, delta);
}

Graph random_bounded_degree(int n, int max_degree, std::uint64_t seed, double keep_probability) {
  if (max_degree < 1) throw std::invalid_argument("max_degree must be positive");
  std::vector<Edge> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  Rng rng(seed, 0x72616e64);  // "rand"
  for (std::size_t i = pairs.size(); i > 1; --i) std::swap(pairs[i - 1], pairs[rng.below(i)]);
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  std::vector<Edge> kept;
  for (const auto& [u, v] : pairs) {
    if (deg[u] >= max_degree || deg[v] >= max_degree) continue;
    if (keep_probability < 1.0 && rng.uniform() >= keep_probability) continue;
    ++deg[u];
    ++deg[v];
    kept.emplace_back(u, v);
  }
  return Graph(n, kept, max_degree);
}

Graph random_forest(int n, int max_degree, std::uint64_t seed, double attach_probability) {
  Rng rng(seed, 0x74726565);  // "tree"
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  std::vector<Edge> e;
  for (int v = 1; v < n; ++v) {
    if (rng.uniform() >= attach_probability) continue;
    const auto parent = static_cast<Vertex>(rng.below(static_cast<std::uint64_t>(v)));
    if (deg[parent] >= max_degree) continue;
    ++deg[parent];
    ++deg[v];
    e.emplace_back(parent, v);
  }
  return Graph(n, e, max_degree);
}

}  // namespace kslice
