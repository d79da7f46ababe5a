#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "kslice/graph.hpp"
#include "kslice/kernel.hpp"
#include "kslice/rng.hpp"

namespace kslice {

/// Mutable size-k independent set with an occupancy table for O(deg) checks.
class SliceState {
 public:
  SliceState(const Graph& g, std::span<const Vertex> members);

  int k() const { return static_cast<int>(members_.size()); }
  bool occupied(Vertex v) const { return occupied_[v] != 0; }
  /// Members in insertion order (not sorted).
  const std::vector<Vertex>& members() const { return members_; }
  std::vector<Vertex> sorted() const;

  /// Whether (I \ u) + v is independent, for u in I and v not in I.
  bool can_swap(const Graph& g, Vertex u, Vertex v) const;
  void swap(Vertex u, Vertex v);

  bool operator==(const SliceState& o) const { return occupied_ == o.occupied_; }

 private:
  std::vector<Vertex> members_;
  std::vector<int> slot_;  ///< position in members_, -1 when vacant
  std::vector<char> occupied_;
};

/// Throws std::invalid_argument unless `members` is an independent set of g
/// with distinct in-range vertices.
void validate_independent(const Graph& g, std::span<const Vertex> members);

/// One down-up step. Returns whether the state changed.
/// `component` is the component label of every vertex and is read only by
/// the modified walk.
bool step_down_up(const Graph& g, SliceState& state, WalkVariant variant, Rng& rng,
                  std::span<const int> component);

enum class InitRule { fixed, greedy, uniform };

struct ChainConfig {
  WalkVariant variant = WalkVariant::metropolis;
  std::uint64_t steps = 0;
  std::uint64_t seed = 1;
  std::uint64_t thinning = 1;
  InitRule init = InitRule::greedy;
  std::vector<Vertex> initial;  ///< used by InitRule::fixed
};

/// Lowest-index greedy independent set truncated to k; throws
/// std::domain_error when it stalls below k.
std::vector<Vertex> greedy_initial(const Graph& g, int k);

/// Starting state per cfg.init. The uniform rule enumerates the slice (n <= 30).
std::vector<Vertex> initial_state(const Graph& g, int k, const ChainConfig& cfg);

struct Trajectory {
  std::map<std::vector<Vertex>, std::uint64_t> visits;  ///< sorted member lists
  std::vector<Vertex> initial;
  std::vector<Vertex> final_state;
  std::uint64_t samples = 0;
  std::uint64_t moves = 0;
};

/// Runs cfg.steps steps and records the state at every multiple of cfg.thinning
/// (including step 0).
Trajectory simulate(const Graph& g, int k, const ChainConfig& cfg);

/// Same chain, but calls `visit(t, state)` at every recorded step.
template <class Visit>
void run_chain(const Graph& g, int k, const ChainConfig& cfg, Visit&& visit);

struct AcceptanceEstimate {
  double rate = 0;
  double stderr_ = 0;
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  bool precondition = false;  ///< k <= 16 n / (17 (delta + 1))
  bool meets_bound = false;   ///< rate >= 1/17 - 3 stderr
};

/// Fraction of Metropolis proposals that move to a different valid state.
/// cfg.variant is ignored. steps = 0 throws std::invalid_argument.
AcceptanceEstimate acceptance_rate(const Graph& g, int k, const ChainConfig& cfg);

/// Exact per-state probability of a Metropolis move, averaged under the uniform law.
Rational exact_acceptance_rate(const SliceSpace& space);

/// Heat-bath single-site dynamics for the hard-core model.
class GlauberChain {
 public:
  GlauberChain(const Graph& g, double lambda, std::uint64_t seed);

  void step();
  void run(std::uint64_t steps);
  std::size_t size() const { return size_; }
  bool occupied(Vertex v) const { return occupied_[v] != 0; }
  std::vector<Vertex> members() const;
  /// Whether no edge has both ends occupied.
  bool independent() const;

 private:
  Graph g_;
  double p_occupy_;
  Rng rng_;
  std::vector<char> occupied_;
  std::vector<int> blocked_;  ///< occupied neighbour count
  std::size_t size_ = 0;
};

std::vector<Vertex> glauber_hardcore(const Graph& g, double lambda, std::uint64_t steps,
                                     std::uint64_t seed);

constexpr std::uint64_t kDefaultAttemptCap = 1000000;

struct RejectionConfig {
  std::optional<std::uint64_t> burn_in;  ///< default max(n, ceil(10 n ln n))
  std::uint64_t attempt_cap = kDefaultAttemptCap;
};

struct RejectionSample {
  std::vector<Vertex> set;
  std::uint64_t attempts = 0;
};

std::uint64_t default_burn_in(int n);

/// Draws from the hard-core model with a continuing Glauber chain (burn-in
/// between draws) until the draw has size k.
RejectionSample rejection_sample(const Graph& g, double lambda, int k, std::uint64_t seed,
                                 const RejectionConfig& cfg = {});

/// Repeated rejection sampling on one seed; returns attempts per success.
std::vector<std::uint64_t> rejection_attempts(const Graph& g, double lambda, int k,
                                              std::uint64_t seed, std::size_t trials,
                                              const RejectionConfig& cfg = {});

struct CouplingReport {
  std::vector<double> mean_distance;  ///< t = 0..horizon
  std::optional<double> rate;         ///< c in E d_t ~ d_0 exp(-c t / n)
  double coupled_fraction = 0;
  double mean_coupling_time = 0;  ///< over coupled trials
  std::size_t trials = 0;
};

struct CouplingStart {
  std::vector<Vertex> x;
  std::vector<Vertex> y;
};

/// Identity coupling of two modified down-up walks: both chains use the same
/// (u, v) each step. Distance is |X xor Y| / 2. Without explicit starts each
/// trial draws X uniformly among slice states that admit a cross-component
/// move and sets Y = (X \ u) + v for a uniform such move.
CouplingReport coupling_contraction(const Graph& g, int k, std::size_t trials,
                                    std::size_t horizon, std::uint64_t seed,
                                    const std::optional<CouplingStart>& start = std::nullopt);

// ---------------------------------------------------------------------------

template <class Visit>
void run_chain(const Graph& g, int k, const ChainConfig& cfg, Visit&& visit) {
  if (cfg.thinning == 0) throw std::invalid_argument("thinning must be positive");
  const auto init = initial_state(g, k, cfg);
  SliceState state(g, init);
  const auto label = components(g).label;
  Rng rng(cfg.seed, 0x77616c6b);  // "walk"
  visit(std::uint64_t{0}, state);
  for (std::uint64_t t = 1; t <= cfg.steps; ++t) {
    step_down_up(g, state, cfg.variant, rng, label);
    if (t % cfg.thinning == 0) visit(t, state);
  }
}

}  // namespace kslice
