#include "kslice/walks.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kslice/count.hpp"

namespace kslice {

void validate_independent(const Graph& g, std::span<const Vertex> members) {
  std::vector<char> seen(g.n(), 0);
  for (Vertex v : members) {
    if (v < 0 || v >= g.n()) throw std::invalid_argument("vertex " + std::to_string(v) + " out of range");
    if (seen[v]) throw std::invalid_argument("vertex " + std::to_string(v) + " repeated");
    seen[v] = 1;
  }
  for (Vertex v : members) {
    for (Vertex w : g.neighbors(v)) {
      if (seen[w]) {
        throw std::invalid_argument("not independent: edge " + std::to_string(v) + "-" + std::to_string(w));
      }
    }
  }
}

SliceState::SliceState(const Graph& g, std::span<const Vertex> members)
    : members_(members.begin(), members.end()), slot_(g.n(), -1), occupied_(g.n(), 0) {
  validate_independent(g, members);
  for (std::size_t i = 0; i < members_.size(); ++i) {
    slot_[members_[i]] = static_cast<int>(i);
    occupied_[members_[i]] = 1;
  }
}

std::vector<Vertex> SliceState::sorted() const {
  auto out = members_;
  std::sort(out.begin(), out.end());
  return out;
}

bool SliceState::can_swap(const Graph& g, Vertex u, Vertex v) const {
  if (occupied_[v]) return false;
  for (Vertex w : g.neighbors(v)) {
    if (w != u && occupied_[w]) return false;
  }
  return true;
}

void SliceState::swap(Vertex u, Vertex v) {
  const int s = slot_[u];
  members_[s] = v;
  slot_[v] = s;
  slot_[u] = -1;
  occupied_[u] = 0;
  occupied_[v] = 1;
}

bool step_down_up(const Graph& g, SliceState& state, WalkVariant variant, Rng& rng,
                  std::span<const int> component) {
  const int n = g.n();
  const int k = state.k();
  if (k == 0 || n == 0) return false;
  switch (variant) {
    case WalkVariant::metropolis: {
      const Vertex u = state.members()[rng.below(k)];
      const auto v = static_cast<Vertex>(rng.below(n));
      if (v == u || !state.can_swap(g, u, v)) return false;
      state.swap(u, v);
      return true;
    }
    case WalkVariant::hdx: {
      const Vertex u = state.members()[rng.below(k)];
      // uniform over valid completions of I \ u; u itself is one, so this stops
      for (;;) {
        const auto v = static_cast<Vertex>(rng.below(n));
        if (v == u) return false;
        if (state.can_swap(g, u, v)) {
          state.swap(u, v);
          return true;
        }
      }
    }
    case WalkVariant::modified: {
      const auto u = static_cast<Vertex>(rng.below(n));
      const auto v = static_cast<Vertex>(rng.below(n));
      if (component[u] == component[v] || !state.occupied(u)) return false;
      if (!state.can_swap(g, u, v)) return false;
      state.swap(u, v);
      return true;
    }
  }
  return false;
}

std::vector<Vertex> greedy_initial(const Graph& g, int k) {
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  std::vector<Vertex> out;
  std::vector<char> blocked(g.n(), 0);
  for (Vertex v = 0; v < g.n() && static_cast<int>(out.size()) < k; ++v) {
    if (blocked[v]) continue;
    out.push_back(v);
    blocked[v] = 1;
    for (Vertex w : g.neighbors(v)) blocked[w] = 1;
  }
  if (static_cast<int>(out.size()) < k) {
    throw std::domain_error("greedy construction stalls at size " + std::to_string(out.size()) +
                            " below k = " + std::to_string(k));
  }
  return out;
}

std::vector<Vertex> initial_state(const Graph& g, int k, const ChainConfig& cfg) {
  switch (cfg.init) {
    case InitRule::fixed: {
      if (static_cast<int>(cfg.initial.size()) != k) {
        throw std::invalid_argument("fixed initial state has the wrong size");
      }
      validate_independent(g, cfg.initial);
      return cfg.initial;
    }
    case InitRule::greedy:
      return greedy_initial(g, k);
    case InitRule::uniform: {
      const auto space = enumerate_slice(g, k);
      if (space.empty()) throw std::domain_error("no independent set of size " + std::to_string(k));
      Rng rng(cfg.seed, 0x696e6974);  // "init"
      return mask_members(space.state(rng.below(space.size())));
    }
  }
  throw std::invalid_argument("unknown initial rule");
}

Trajectory simulate(const Graph& g, int k, const ChainConfig& cfg) {
  if (cfg.thinning == 0) throw std::invalid_argument("thinning must be positive");
  Trajectory out;
  out.initial = initial_state(g, k, cfg);
  SliceState state(g, out.initial);
  const auto label = components(g).label;
  Rng rng(cfg.seed, 0x77616c6b);  // "walk"
  out.visits[state.sorted()] += 1;
  out.samples = 1;
  for (std::uint64_t t = 1; t <= cfg.steps; ++t) {
    if (step_down_up(g, state, cfg.variant, rng, label)) ++out.moves;
    if (t % cfg.thinning == 0) {
      out.visits[state.sorted()] += 1;
      ++out.samples;
    }
  }
  out.final_state = state.sorted();
  std::sort(out.initial.begin(), out.initial.end());
  return out;
}

AcceptanceEstimate acceptance_rate(const Graph& g, int k, const ChainConfig& cfg) {
  if (cfg.steps == 0) throw std::invalid_argument("no proposals observed (steps = 0)");
  if (k < 1) throw std::invalid_argument("acceptance rate needs k >= 1");
  ChainConfig c = cfg;
  c.variant = WalkVariant::metropolis;
  SliceState state(g, initial_state(g, k, c));
  const auto label = components(g).label;
  Rng rng(c.seed, 0x61636370);  // "accp"
  AcceptanceEstimate est;
  for (std::uint64_t t = 0; t < c.steps; ++t) {
    if (step_down_up(g, state, WalkVariant::metropolis, rng, label)) ++est.accepted;
  }
  est.proposals = c.steps;
  est.rate = static_cast<double>(est.accepted) / static_cast<double>(est.proposals);
  est.stderr_ = std::sqrt(est.rate * (1 - est.rate) / static_cast<double>(est.proposals));
  est.precondition = 17LL * k * (g.delta() + 1) <= 16LL * g.n();
  est.meets_bound = est.rate >= 1.0 / 17.0 - 3 * est.stderr_;
  return est;
}

Rational exact_acceptance_rate(const SliceSpace& space) {
  if (space.empty()) throw std::invalid_argument("empty slice");
  if (space.k() == 0) return 0;
  const auto kernel = build_kernel(space, WalkVariant::metropolis);
  Rational stay = 0;
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    const auto r = kernel.row(i);
    const auto x = kernel.exact_row(i);
    for (std::size_t e = 0; e < r.size(); ++e) {
      if (r[e].col == i) stay += x[e];
    }
  }
  return Rational(1) - stay / static_cast<long long>(kernel.size());
}

GlauberChain::GlauberChain(const Graph& g, double lambda, std::uint64_t seed)
    : g_(g), p_occupy_(lambda / (1 + lambda)), rng_(seed, 0x676c6175),  // "glau"
      occupied_(g.n(), 0), blocked_(g.n(), 0) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw std::invalid_argument("activity must be positive");
}

void GlauberChain::step() {
  const int n = g_.n();
  if (n == 0) return;
  const auto v = static_cast<Vertex>(rng_.below(n));
  const bool want = rng_.uniform() < p_occupy_;
  if (want) {
    if (occupied_[v] || blocked_[v]) return;
    occupied_[v] = 1;
    ++size_;
    for (Vertex w : g_.neighbors(v)) ++blocked_[w];
  } else if (occupied_[v]) {
    occupied_[v] = 0;
    --size_;
    for (Vertex w : g_.neighbors(v)) --blocked_[w];
  }
}

void GlauberChain::run(std::uint64_t steps) {
  for (std::uint64_t t = 0; t < steps; ++t) step();
}

std::vector<Vertex> GlauberChain::members() const {
  std::vector<Vertex> out;
  for (Vertex v = 0; v < g_.n(); ++v) {
    if (occupied_[v]) out.push_back(v);
  }
  return out;
}

bool GlauberChain::independent() const {
  for (const auto& [u, v] : g_.edges()) {
    if (occupied_[u] && occupied_[v]) return false;
  }
  return true;
}

std::vector<Vertex> glauber_hardcore(const Graph& g, double lambda, std::uint64_t steps,
                                     std::uint64_t seed) {
  GlauberChain chain(g, lambda, seed);
  chain.run(steps);
  return chain.members();
}

std::uint64_t default_burn_in(int n) {
  if (n <= 1) return 1;
  const auto scaled = static_cast<std::uint64_t>(std::ceil(10.0 * n * std::log(static_cast<double>(n))));
  return std::max<std::uint64_t>(n, scaled);
}

namespace {

void require_nonempty_slice(const Graph& g, int k) {
  if (k < 0 || k > g.n()) throw std::invalid_argument("k must satisfy 0 <= k <= n");
  try {
    greedy_initial(g, k);
    return;
  } catch (const std::domain_error&) {
  }
  SizeCountVector counts;
  try {
    counts = size_counts(g);
  } catch (const std::invalid_argument&) {
    return;  // too large to count; the attempt cap decides
  }
  if (counts.at(k) == 0) throw std::domain_error("empty slice: no independent set of size " + std::to_string(k));
}

}  // namespace

namespace {

std::uint64_t draw_until(GlauberChain& chain, std::uint64_t burn, int k, std::uint64_t cap) {
  for (std::uint64_t a = 1;; ++a) {
    if (a > cap) throw std::runtime_error("attempt cap " + std::to_string(cap) + " exceeded");
    chain.run(burn);
    if (static_cast<int>(chain.size()) == k) return a;
  }
}

}  // namespace

RejectionSample rejection_sample(const Graph& g, double lambda, int k, std::uint64_t seed,
                                 const RejectionConfig& cfg) {
  if (!(lambda > 0)) throw std::invalid_argument("activity must be positive");
  require_nonempty_slice(g, k);
  const auto burn = cfg.burn_in.value_or(default_burn_in(g.n()));
  if (burn == 0) throw std::invalid_argument("burn-in must be positive");
  GlauberChain chain(g, lambda, seed);
  const auto attempts = draw_until(chain, burn, k, cfg.attempt_cap);
  return {chain.members(), attempts};
}

std::vector<std::uint64_t> rejection_attempts(const Graph& g, double lambda, int k,
                                              std::uint64_t seed, std::size_t trials,
                                              const RejectionConfig& cfg) {
  if (!(lambda > 0)) throw std::invalid_argument("activity must be positive");
  require_nonempty_slice(g, k);
  const auto burn = cfg.burn_in.value_or(default_burn_in(g.n()));
  if (burn == 0) throw std::invalid_argument("burn-in must be positive");
  GlauberChain chain(g, lambda, seed);
  std::vector<std::uint64_t> out;
  out.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) out.push_back(draw_until(chain, burn, k, cfg.attempt_cap));
  return out;
}

CouplingReport coupling_contraction(const Graph& g, int k, std::size_t trials, std::size_t horizon,
                                    std::uint64_t seed, const std::optional<CouplingStart>& start) {
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  const int n = g.n();
  const auto label = components(g).label;

  // candidate (state, u, v) discrepancies when no explicit start is given
  std::vector<Mask> movable;
  std::vector<std::vector<std::pair<Vertex, Vertex>>> moves;
  if (!start) {
    const auto space = enumerate_slice(g, k);
    const auto nbr = g.neighbor_masks();
    for (Mask x : space.states()) {
      std::vector<std::pair<Vertex, Vertex>> m;
      for (Mask rest = x; rest; rest &= rest - 1) {
        const int u = std::countr_zero(rest);
        const Mask s = x & ~(Mask{1} << u);
        for (int v = 0; v < n; ++v) {
          if (label[v] == label[u] || ((x >> v) & 1) || (nbr[v] & s)) continue;
          m.emplace_back(u, v);
        }
      }
      if (!m.empty()) {
        movable.push_back(x);
        moves.push_back(std::move(m));
      }
    }
    if (movable.empty()) throw std::domain_error("no valid initial discrepancy pair");
  } else {
    validate_independent(g, start->x);
    validate_independent(g, start->y);
    if (static_cast<int>(start->x.size()) != k || static_cast<int>(start->y.size()) != k) {
      throw std::invalid_argument("coupling starts must have size k");
    }
  }

  CouplingReport rep;
  rep.trials = trials;
  rep.mean_distance.assign(horizon + 1, 0.0);
  Rng rng(seed, 0x636f7570);  // "coup"
  std::size_t coupled = 0;
  double total_time = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::vector<Vertex> xs, ys;
    if (start) {
      xs = start->x;
      ys = start->y;
    } else {
      const auto i = rng.below(movable.size());
      const auto [u, v] = moves[i][rng.below(moves[i].size())];
      xs = mask_members(movable[i]);
      ys = xs;
      std::replace(ys.begin(), ys.end(), u, v);
    }
    SliceState x(g, xs), y(g, ys);
    auto distance = [&] {
      int d = 0;
      for (Vertex v : x.members()) d += !y.occupied(v);
      return d;
    };
    std::optional<std::size_t> meet;
    for (std::size_t t = 0; t <= horizon; ++t) {
      if (t > 0) {
        const auto u = static_cast<Vertex>(rng.below(n));
        const auto v = static_cast<Vertex>(rng.below(n));
        if (label[u] != label[v]) {
          if (x.occupied(u) && x.can_swap(g, u, v)) x.swap(u, v);
          if (y.occupied(u) && y.can_swap(g, u, v)) y.swap(u, v);
        }
      }
      const int d = distance();
      rep.mean_distance[t] += d;
      if (d == 0 && !meet) meet = t;
    }
    if (meet) {
      ++coupled;
      total_time += static_cast<double>(*meet);
    }
  }
  for (auto& d : rep.mean_distance) d /= static_cast<double>(trials);
  rep.coupled_fraction = static_cast<double>(coupled) / static_cast<double>(trials);
  rep.mean_coupling_time = coupled ? total_time / static_cast<double>(coupled) : 0.0;

  const double d0 = rep.mean_distance[0];
  if (d0 > 0 && n > 0) {
    double num = 0, den = 0;
    for (std::size_t t = 1; t <= horizon; ++t) {
      if (rep.mean_distance[t] <= 0) continue;
      num += static_cast<double>(t) * std::log(rep.mean_distance[t] / d0);
      den += static_cast<double>(t) * static_cast<double>(t);
    }
    if (den > 0) rep.rate = -n * num / den;
  }
  return rep;
}

}  // namespace kslice
