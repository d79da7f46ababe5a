#include "kslice/count.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/constants/constants.hpp>
#include <json.hpp>

#include "kslice/hardcore.hpp"

namespace kslice {

using Poly = std::vector<BigInt>;

SizeCountVector::SizeCountVector(std::vector<BigInt> counts) : counts_(std::move(counts)) {
  for (const auto& c : counts_) {
    if (c < 0) throw std::invalid_argument("size counts must be non-negative");
  }
}

std::size_t SizeCountVector::independence_number() const {
  for (std::size_t j = counts_.size(); j-- > 0;) {
    if (counts_[j] != 0) return j;
  }
  return 0;
}

BigInt SizeCountVector::total() const {
  BigInt sum = 0;
  for (const auto& c : counts_) sum += c;
  return sum;
}

std::string SizeCountVector::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : counts_) arr.push_back(c.str());
  return arr.dump();
}

SizeCountVector SizeCountVector::from_json(const std::string& text) {
  const auto arr = nlohmann::json::parse(text);
  if (!arr.is_array()) throw std::invalid_argument("size counts must be a JSON array");
  std::vector<BigInt> out;
  for (const auto& item : arr) {
    if (!item.is_string()) throw std::invalid_argument("size counts must be decimal strings");
    const auto s = item.get<std::string>();
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("invalid count '" + s + "'");
    }
    out.emplace_back(s);
  }
  return SizeCountVector(std::move(out));
}

namespace {

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, BigInt(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly out(std::max(a.size(), b.size()), BigInt(0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

Poly poly_shift(const Poly& a, std::size_t by) {
  Poly out(by, BigInt(0));
  out.insert(out.end(), a.begin(), a.end());
  return out;
}

// Enumeration with a closed form once the remaining candidates are edgeless.
class Enumerator {
 public:
  explicit Enumerator(const Graph& g) : nbr_(g.neighbor_masks()), acc_(g.n() + 1, 0) {
    const int n = g.n();
    binom_.assign(n + 1, std::vector<std::uint64_t>(n + 1, 0));
    for (int i = 0; i <= n; ++i) {
      binom_[i][0] = 1;
      for (int j = 1; j <= i; ++j) binom_[i][j] = binom_[i - 1][j - 1] + binom_[i - 1][j];
    }
  }

  Poly run(Mask all) {
    descend(all, 0);
    Poly out;
    for (auto c : acc_) out.emplace_back(c);
    return out;
  }

 private:
  void descend(Mask avail, int size) {
    int pivot = -1;
    for (Mask rest = avail; rest; rest &= rest - 1) {
      const int v = std::countr_zero(rest);
      if (nbr_[v] & avail) {
        pivot = v;
        break;
      }
    }
    if (pivot < 0) {
      const int free = std::popcount(avail);
      for (int j = 0; j <= free; ++j) acc_[size + j] += binom_[free][j];
      return;
    }
    const Mask without = avail & ~(Mask{1} << pivot);
    descend(without, size);
    descend(without & ~nbr_[pivot], size + 1);
  }

  std::vector<Mask> nbr_;
  std::vector<std::uint64_t> acc_;
  std::vector<std::vector<std::uint64_t>> binom_;
};

Poly brute_force_polynomial(const Graph& g) {
  if (g.n() > kBruteForceMaxVertices) {
    throw std::invalid_argument("brute-force counting limited to n <= 30, got n = " +
                                std::to_string(g.n()));
  }
  if (g.n() == 0) return Poly{BigInt(1)};
  Enumerator e(g);
  const Mask all = g.n() == 64 ? ~Mask{0} : (Mask{1} << g.n()) - 1;
  return e.run(all);
}

// Connected tree on vertices 0..m-1.
Poly tree_polynomial(const Graph& t) {
  const int m = t.n();
  if (m == 0) return Poly{BigInt(1)};
  std::vector<Vertex> order;
  std::vector<Vertex> parent(m, -1);
  order.reserve(m);
  order.push_back(0);
  parent[0] = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Vertex v = order[i];
    for (Vertex w : t.neighbors(v)) {
      if (parent[w] < 0) {
        parent[w] = v;
        order.push_back(w);
      }
    }
  }
  std::vector<Poly> in(m, Poly{BigInt(0), BigInt(1)});
  std::vector<Poly> out(m, Poly{BigInt(1)});
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Vertex v = *it;
    if (v == 0) break;
    const Vertex p = parent[v];
    in[p] = poly_mul(in[p], out[v]);
    out[p] = poly_mul(out[p], poly_add(in[v], out[v]));
    Poly().swap(in[v]);
    Poly().swap(out[v]);
  }
  return poly_add(in[0], out[0]);
}

bool is_tree(const Graph& c) { return c.edge_count() + 1 == static_cast<std::size_t>(c.n()); }

bool is_cycle(const Graph& c) {
  if (c.n() < 3 || c.edge_count() != static_cast<std::size_t>(c.n())) return false;
  for (Vertex v = 0; v < c.n(); ++v) {
    if (c.degree(v) != 2) return false;
  }
  return true;
}

Poly forest_polynomial(const Graph& g);

// Z_C = Z_{C - v} + x Z_{C - N[v]}; both sides are paths.
Poly cycle_polynomial(const Graph& c) {
  const auto out = delete_vertex(c, 0);
  const auto in = delete_closed_neighborhood(c, 0);
  return poly_add(forest_polynomial(out.graph), poly_shift(forest_polynomial(in.graph), 1));
}

Poly forest_polynomial(const Graph& g) {
  Poly total{BigInt(1)};
  for (const auto& comp : components(g).components) {
    const auto sub = induced_subgraph(g, comp);
    if (!is_tree(sub.graph)) throw std::logic_error("forest_polynomial on a non-forest");
    total = poly_mul(total, tree_polynomial(sub.graph));
  }
  return total;
}

Poly component_polynomial(const Graph& c, CountMethod method) {
  if (is_tree(c)) return tree_polynomial(c);
  if (is_cycle(c)) return cycle_polynomial(c);
  if (method == CountMethod::automatic && c.n() <= kBruteForceMaxVertices) {
    return brute_force_polynomial(c);
  }
  throw std::invalid_argument("component of size " + std::to_string(c.n()) +
                              " is neither a tree nor a cycle and too large to enumerate");
}

Poly count_polynomial(const Graph& g, CountMethod method) {
  if (method == CountMethod::brute_force) return brute_force_polynomial(g);
  Poly total{BigInt(1)};
  for (const auto& comp : components(g).components) {
    const auto sub = induced_subgraph(g, comp);
    total = poly_mul(total, component_polynomial(sub.graph, method));
  }
  return total;
}

}  // namespace

bool structured_countable(const Graph& g) {
  for (const auto& comp : components(g).components) {
    const auto sub = induced_subgraph(g, comp);
    if (!is_tree(sub.graph) && !is_cycle(sub.graph)) return false;
  }
  return true;
}

SizeCountVector size_counts(const Graph& g, const PinSet& pins, CountMethod method) {
  const int n = g.n();
  std::vector<char> removed(static_cast<std::size_t>(n), 0);
  std::vector<char> pinned_in(static_cast<std::size_t>(n), 0);
  std::vector<char> pinned_out(static_cast<std::size_t>(n), 0);
  for (Vertex v : pins.in) {
    if (v < 0 || v >= n) throw std::invalid_argument("in-pin out of range");
    if (pinned_in[v]) throw std::invalid_argument("duplicate in-pin");
    pinned_in[v] = 1;
  }
  for (Vertex v : pins.out) {
    if (v < 0 || v >= n) throw std::invalid_argument("out-pin out of range");
    if (pinned_in[v]) throw std::invalid_argument("vertex pinned both in and out");
    pinned_out[v] = 1;
  }
  for (Vertex v : pins.in) {
    for (Vertex w : g.neighbors(v)) {
      if (pinned_in[w]) throw std::invalid_argument("in-pins are not independent");
      removed[w] = 1;
    }
    removed[v] = 1;
  }
  std::vector<Vertex> keep;
  for (Vertex v = 0; v < n; ++v) {
    if (!removed[v] && !pinned_out[v]) keep.push_back(v);
  }

  Poly poly;
  if (keep.size() == static_cast<std::size_t>(n)) {
    poly = count_polynomial(g, method);
  } else {
    poly = count_polynomial(induced_subgraph(g, keep).graph, method);
  }
  std::vector<BigInt> out(static_cast<std::size_t>(n) + 1, BigInt(0));
  const std::size_t shift = pins.in.size();
  for (std::size_t j = 0; j < poly.size() && j + shift < out.size(); ++j) out[j + shift] = poly[j];
  return SizeCountVector(std::move(out));
}

std::vector<Vertex> mask_members(Mask m) {
  std::vector<Vertex> out;
  for (; m; m &= m - 1) out.push_back(std::countr_zero(m));
  return out;
}

Mask members_mask(std::span<const Vertex> vertices) {
  Mask m = 0;
  for (Vertex v : vertices) {
    if (v < 0 || v >= 64) throw std::invalid_argument("vertex outside bitmask range");
    m |= Mask{1} << v;
  }
  return m;
}

SliceSpace::SliceSpace(Graph g, int k, std::vector<Mask> states)
    : graph_(std::move(g)), k_(k), states_(std::move(states)) {
  if (!std::is_sorted(states_.begin(), states_.end()) ||
      std::adjacent_find(states_.begin(), states_.end()) != states_.end()) {
    throw std::invalid_argument("slice states must be sorted and distinct");
  }
}

std::optional<std::size_t> SliceSpace::index_of(Mask m) const {
  const auto it = std::lower_bound(states_.begin(), states_.end(), m);
  if (it == states_.end() || *it != m) return std::nullopt;
  return static_cast<std::size_t>(it - states_.begin());
}

namespace {

void collect_sets(const std::vector<Mask>& nbr, int n, int next, Mask chosen, Mask blocked, int need,
                  std::vector<Mask>& out) {
  if (need == 0) {
    out.push_back(chosen);
    return;
  }
  for (int v = next; v < n; ++v) {
    if (n - v < need) break;
    if (blocked & (Mask{1} << v)) continue;
    collect_sets(nbr, n, v + 1, chosen | (Mask{1} << v), blocked | nbr[v], need - 1, out);
  }
}

}  // namespace

SliceSpace enumerate_slice(const Graph& g, int k) {
  if (g.n() > kBruteForceMaxVertices) {
    throw std::invalid_argument("slice enumeration limited to n <= 30");
  }
  if (k < 0 || k > g.n()) throw std::invalid_argument("slice size must satisfy 0 <= k <= n");
  std::vector<Mask> states;
  collect_sets(g.neighbor_masks(), g.n(), 0, 0, 0, k, states);
  std::sort(states.begin(), states.end());
  return SliceSpace(g, k, std::move(states));
}

std::vector<Mask> enumerate_independent_sets(const Graph& g) {
  if (g.n() > kBruteForceMaxVertices) {
    throw std::invalid_argument("enumeration limited to n <= 30");
  }
  const auto nbr = g.neighbor_masks();
  std::vector<Mask> out;
  for (int k = 0; k <= g.n(); ++k) {
    const auto before = out.size();
    collect_sets(nbr, g.n(), 0, 0, 0, k, out);
    if (out.size() == before) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

Complex eval_Z(const SizeCountVector& counts, const Complex& z) {
  Complex acc(0);
  for (std::size_t j = counts.size(); j-- > 0;) acc = acc * z + Complex(to_real(counts[j]));
  return acc;
}

Real eval_Z(const SizeCountVector& counts, const Real& z) {
  Real acc = 0;
  for (std::size_t j = counts.size(); j-- > 0;) acc = acc * z + to_real(counts[j]);
  return acc;
}

namespace {

Real abs_sum(const SizeCountVector& counts, const Real& r) {
  return eval_Z(counts, r);  // coefficients are non-negative
}

}  // namespace

Complex occupancy_ratio(const Graph& g, Vertex u, const Real& lambda, const Complex& t) {
  if (u < 0 || u >= g.n()) throw std::out_of_range("vertex out of range");
  const auto in_graph = delete_closed_neighborhood(g, u).graph;
  const auto out_graph = delete_vertex(g, u).graph;
  const auto in_counts = size_counts(in_graph);
  const auto out_counts = size_counts(out_graph);
  const Complex z = Complex(lambda) * exp(t);
  const Complex denominator = eval_Z(out_counts, z);
  const Real scale = abs_sum(out_counts, abs(z));
  if (abs(denominator) <= Real("1e-40") * scale) {
    throw std::domain_error("Z_{G-u} vanishes at lambda e^t with lambda = " + decimal(lambda) +
                            ", t = " + decimal(Real(t.real())) + " + " + decimal(Real(t.imag())) +
                            "i");
  }
  return z * eval_Z(in_counts, z) / denominator;
}

namespace {

void validate_probe(const Graph& g, const ZeroProbeConfig& cfg) {
  if (!(cfg.probe_radius > 0)) throw std::invalid_argument("probe radius must be positive");
  if (cfg.activity_grid.empty()) throw std::invalid_argument("activity grid must be non-empty");
  if (cfg.angular_samples < 1) throw std::invalid_argument("angular samples must be positive");
  for (double r : cfg.contour_radii) {
    if (!(r > 0)) throw std::invalid_argument("contour radii must be positive");
  }
  const double cap = g.delta() >= 3 ? critical_activity(g.delta())
                                    : std::numeric_limits<double>::infinity();
  for (double l : cfg.activity_grid) {
    if (!(l >= 0) || !(l < cap)) {
      throw std::invalid_argument("activity " + decimal(l) + " outside [0, lambda_c)");
    }
  }
}

template <class Visit>
void for_each_probe_point(const ZeroProbeConfig& cfg, Visit&& visit) {
  std::vector<double> radii = cfg.contour_radii;
  if (radii.empty()) radii.push_back(cfg.probe_radius);
  const Real two_pi = 2 * boost::math::constants::pi<Real>();
  for (double lambda : cfg.activity_grid) {
    for (double r : radii) {
      for (int j = 0; j < cfg.angular_samples; ++j) {
        const Real theta = two_pi * j / cfg.angular_samples;
        const Complex t(Real(r) * cos(theta), Real(r) * sin(theta));
        visit(ZeroProbePoint{lambda, r, theta.convert_to<double>(), 0.0}, t);
      }
    }
  }
}

}  // namespace

ZeroProbeReport zero_free_probe(const Graph& g, const ZeroProbeConfig& cfg) {
  validate_probe(g, cfg);
  const auto counts = size_counts(g);
  ZeroProbeReport rep;
  rep.min_modulus = std::numeric_limits<double>::infinity();
  for_each_probe_point(cfg, [&](ZeroProbePoint p, const Complex& t) {
    const Real lambda(p.lambda);
    const Complex z = Complex(lambda) * exp(t);
    const Real base = eval_Z(counts, lambda);
    p.modulus = (abs(eval_Z(counts, z)) / base).convert_to<double>();
    ++rep.points;
    if (p.modulus < rep.min_modulus) {
      rep.min_modulus = p.modulus;
      rep.argmin = p;
    }
    if (p.modulus < cfg.tolerance) rep.near_zero.push_back(p);
  });
  return rep;
}

OccupancyScan occupancy_ratio_scan(const Graph& g, const ZeroProbeConfig& cfg) {
  validate_probe(g, cfg);
  OccupancyScan scan;
  for (Vertex u = 0; u < g.n(); ++u) {
    const auto in_counts = size_counts(delete_closed_neighborhood(g, u).graph);
    const auto out_counts = size_counts(delete_vertex(g, u).graph);
    for_each_probe_point(cfg, [&](ZeroProbePoint p, const Complex& t) {
      const Complex z = Complex(Real(p.lambda)) * exp(t);
      const Complex den = eval_Z(out_counts, z);
      ++scan.points;
      const double mod = (abs(den) == 0)
                             ? std::numeric_limits<double>::infinity()
                             : abs(z * eval_Z(in_counts, z) / den).convert_to<double>();
      p.modulus = mod;
      if (mod > scan.max_modulus) {
        scan.max_modulus = mod;
        scan.vertex = u;
        scan.where = p;
      }
    });
  }
  return scan;
}

}  // namespace kslice
