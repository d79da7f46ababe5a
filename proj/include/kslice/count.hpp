#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kslice/graph.hpp"
#include "kslice/numeric.hpp"

namespace kslice {

/// a_0..a_n where a_j counts the independent sets of size j; the coefficient
/// list of the independence polynomial.
class SizeCountVector {
 public:
  SizeCountVector() = default;
  explicit SizeCountVector(std::vector<BigInt> counts);

  std::size_t size() const { return counts_.size(); }
  const BigInt& operator[](std::size_t j) const { return counts_[j]; }
  /// a_j, or zero past the end.
  BigInt at(std::size_t j) const { return j < counts_.size() ? counts_[j] : BigInt(0); }
  const std::vector<BigInt>& counts() const { return counts_; }

  /// Largest j with a_j > 0.
  std::size_t independence_number() const;
  BigInt total() const;

  /// JSON array of decimal strings.
  std::string to_json() const;
  static SizeCountVector from_json(const std::string& text);

  bool operator==(const SizeCountVector&) const = default;

 private:
  std::vector<BigInt> counts_;
};

/// Vertices forced into / out of the independent set. Neighbours of in-pins
/// are implicitly out.
struct PinSet {
  std::vector<Vertex> in;
  std::vector<Vertex> out;
};

enum class CountMethod { automatic, brute_force, structured };

constexpr int kBruteForceMaxVertices = 30;

/// Exact size counts. Index j counts sets of total size j including in-pins;
/// the vector always has length n + 1.
/// automatic: each connected component is counted by the tree/cycle DP when it
/// is a tree or cycle and by enumeration when it has at most 30 vertices.
/// brute_force: whole-graph enumeration, n <= 30.
/// structured: every component must be a tree or a cycle.
SizeCountVector size_counts(const Graph& g, const PinSet& pins = {},
                            CountMethod method = CountMethod::automatic);

/// Whether the structured DP covers every component of g.
bool structured_countable(const Graph& g);

std::vector<Vertex> mask_members(Mask m);
Mask members_mask(std::span<const Vertex> vertices);

/// I_k(G) enumerated as bitmasks in increasing numeric order.
class SliceSpace {
 public:
  SliceSpace(Graph g, int k, std::vector<Mask> states);

  const Graph& graph() const { return graph_; }
  int n() const { return graph_.n(); }
  int k() const { return k_; }
  std::size_t size() const { return states_.size(); }
  bool empty() const { return states_.empty(); }
  Mask state(std::size_t i) const { return states_[i]; }
  const std::vector<Mask>& states() const { return states_; }
  std::optional<std::size_t> index_of(Mask m) const;

 private:
  Graph graph_;
  int k_;
  std::vector<Mask> states_;
};

/// All independent sets of size k; empty space when a_k = 0. Requires n <= 30.
SliceSpace enumerate_slice(const Graph& g, int k);

/// Every independent set of g (any size), increasing numeric order. n <= 30.
std::vector<Mask> enumerate_independent_sets(const Graph& g);

/// Horner evaluation of sum_j a_j z^j in 50-digit arithmetic.
Complex eval_Z(const SizeCountVector& counts, const Complex& z);
Real eval_Z(const SizeCountVector& counts, const Real& z);

/// lambda e^t Z_{G^u}(lambda e^t) / Z_{G - u}(lambda e^t), where G^u removes the
/// closed neighbourhood of u. Throws std::domain_error when the denominator
/// vanishes at the evaluation point.
Complex occupancy_ratio(const Graph& g, Vertex u, const Real& lambda, const Complex& t);

struct ZeroProbeConfig {
  double probe_radius = 0.05;
  std::vector<double> activity_grid;
  int angular_samples = 64;
  std::vector<double> contour_radii;  ///< empty means {probe_radius}
  double tolerance = 1e-6;
};

struct ZeroProbePoint {
  double lambda = 0;
  double radius = 0;
  double angle = 0;
  double modulus = 0;
};

struct ZeroProbeReport {
  double min_modulus = 0;
  ZeroProbePoint argmin;
  std::vector<ZeroProbePoint> near_zero;  ///< points with modulus below tolerance
  std::size_t points = 0;
};

/// Scans |Z_G(lambda e^t) / Z_G(lambda)| over the activity grid and the
/// circles |t| = r. Reports what it finds; it does not certify zero-freeness.
ZeroProbeReport zero_free_probe(const Graph& g, const ZeroProbeConfig& cfg);

struct OccupancyScan {
  double max_modulus = 0;
  Vertex vertex = 0;
  ZeroProbePoint where;
  std::size_t points = 0;
};

/// Largest |R_u(lambda, t)| over all vertices, activities and probe circles.
OccupancyScan occupancy_ratio_scan(const Graph& g, const ZeroProbeConfig& cfg);

}  // namespace kslice
