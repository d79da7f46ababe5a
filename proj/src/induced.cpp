#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "kslice/spectral.hpp"

namespace kslice {

Kernel build_swap_kernel(const Graph& g, std::vector<Mask> states) {
  std::sort(states.begin(), states.end());
  if (std::adjacent_find(states.begin(), states.end()) != states.end()) {
    throw std::invalid_argument("swap kernel states must be distinct");
  }
  if (states.empty()) throw std::invalid_argument("empty state space");
  const int n = g.n();
  const auto label = components(g).label;
  const Rational p(2, static_cast<long long>(n) * n);
  std::vector<ExactRow> rows(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Mask x = states[i];
    Rational off = 0;
    for (Mask rest = x; rest; rest &= rest - 1) {
      const int a = std::countr_zero(rest);
      for (int b = 0; b < n; ++b) {
        if (((x >> b) & 1) || label[a] == label[b]) continue;
        const Mask y = (x & ~(Mask{1} << a)) | (Mask{1} << b);
        const auto it = std::lower_bound(states.begin(), states.end(), y);
        if (it == states.end() || *it != y) continue;
        rows[i].emplace_back(static_cast<std::uint32_t>(it - states.begin()), p);
        off += p;
      }
    }
    rows[i].emplace_back(static_cast<std::uint32_t>(i), Rational(1) - off);
  }
  const Rational uniform(1, static_cast<long long>(states.size()));
  std::vector<Rational> pi(states.size(), uniform);
  return Kernel::from_exact(KernelKind::swap, std::move(states), std::move(rows), std::move(pi));
}

namespace {

Mask component_mask(const Graph& g, std::span<const Vertex> component) {
  if (!is_component(g, component)) throw std::invalid_argument("vertex set is not a connected component");
  return members_mask(component);
}

}  // namespace

InducedChain induced_kernel(const Graph& g, std::span<const Vertex> component, int k) {
  const int n = g.n();
  if (n > kBruteForceMaxVertices) throw std::invalid_argument("induced chain limited to n <= 30");
  const Mask gmask = component_mask(g, component);
  if (static_cast<int>(component.size()) == n) {
    throw std::invalid_argument("component is the whole graph; the induced chain needs another component");
  }
  if (k < 0 || k > n) throw std::invalid_argument("k must satisfy 0 <= k <= n");
  const auto total = size_counts(g).at(k);
  if (total == 0) throw std::domain_error("empty slice: no independent set of size " + std::to_string(k));

  std::vector<Vertex> outside;
  for (Vertex v = 0; v < n; ++v) {
    if (!((gmask >> v) & 1)) outside.push_back(v);
  }
  const auto rest = induced_subgraph(g, outside);
  const auto rest_counts = size_counts(rest.graph);
  const auto inside = induced_subgraph(g, component);

  // sum over K in I_m(rest) of M(K), the number of vertices addable to K
  const auto rest_nbr = rest.graph.neighbor_masks();
  std::vector<BigInt> addable_total(k + 1, BigInt(0));
  for (int m = 0; m <= k && m <= rest.graph.n(); ++m) {
    if (rest_counts.at(m) == 0) continue;
    const auto rest_slice = enumerate_slice(rest.graph, m);
    for (Mask kset : rest_slice.states()) {
      long long count = 0;
      for (int w = 0; w < rest.graph.n(); ++w) {
        if (!((kset >> w) & 1) && !(rest_nbr[w] & kset)) ++count;
      }
      addable_total[m] += count;
    }
  }

  auto lift = [&](Mask local) {
    Mask out = 0;
    for (Mask r = local; r; r &= r - 1) out |= Mask{1} << inside.new_to_old[std::countr_zero(r)];
    return out;
  };
  std::vector<Mask> states;
  for (Mask local : enumerate_independent_sets(inside.graph)) {
    const int s = std::popcount(local);
    if (s <= k && rest_counts.at(k - s) > 0) states.push_back(lift(local));
  }
  std::sort(states.begin(), states.end());
  auto index = [&](Mask m) -> std::optional<std::uint32_t> {
    const auto it = std::lower_bound(states.begin(), states.end(), m);
    if (it == states.end() || *it != m) return std::nullopt;
    return static_cast<std::uint32_t>(it - states.begin());
  };

  const auto nbr = g.neighbor_masks();
  const long long gsize = static_cast<long long>(component.size());
  std::vector<ExactRow> rows(states.size());
  std::vector<Rational> pi;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Mask x = states[i];
    const int m = k - std::popcount(x);
    pi.emplace_back(Rational(rest_counts.at(m)) / Rational(total));
    Rational off = 0;
    for (Vertex u : component) {
      const Mask bit = Mask{1} << u;
      if (x & bit) {
        // u swaps with an addable outside vertex
        const Rational p = Rational(addable_total[m]) / Rational(rest_counts.at(m)) / (gsize * n);
        if (p == 0) continue;
        const auto j = index(x & ~bit);
        if (!j) throw std::logic_error("induced removal leaves the state space");
        rows[i].emplace_back(*j, p);
        off += p;
      } else if (m > 0 && !(nbr[u] & x)) {
        // u swaps with an occupied outside vertex
        const Rational p(m, gsize * n);
        const auto j = index(x | bit);
        if (!j) throw std::logic_error("induced addition leaves the state space");
        rows[i].emplace_back(*j, p);
        off += p;
      }
    }
    rows[i].emplace_back(static_cast<std::uint32_t>(i), Rational(1) - off);
  }

  InducedChain out{Kernel::from_exact(KernelKind::induced, states, std::move(rows), pi),
                   std::vector<Vertex>(component.begin(), component.end()), {}, false, 0, true};
  std::sort(out.component.begin(), out.component.end());

  // independent route: project the enumerated slice
  std::vector<long long> hits(states.size(), 0);
  const auto slice = enumerate_slice(g, k);
  for (Mask x : slice.states()) {
    const auto j = index(x & gmask);
    if (!j) throw std::logic_error("slice member projects outside the induced state space");
    ++hits[*j];
  }
  for (long long h : hits) out.marginal.emplace_back(h, static_cast<long long>(slice.size()));
  out.marginal_matches = out.marginal == pi;

  // P(I, I \ v) / P(I \ v, I) against a_{k-|I \ v|} / a_{k-|I|} on the rest
  const auto& kern = out.kernel;
  auto exact_at = [&](std::size_t a, std::size_t b) {
    const auto r = kern.row(a);
    const auto v = kern.exact_row(a);
    for (std::size_t e = 0; e < r.size(); ++e) {
      if (r[e].col == b) return v[e];
    }
    return Rational(0);
  };
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Mask x = states[i];
    for (Mask r = x; r; r &= r - 1) {
      const auto j = index(x & ~(Mask{1} << std::countr_zero(r)));
      if (!j) continue;
      const Rational forward = exact_at(i, *j), back = exact_at(*j, i);
      const int m = k - std::popcount(x);
      ++out.identity_checks;
      if (back == 0 || forward / back != Rational(rest_counts.at(m + 1)) / Rational(rest_counts.at(m))) {
        out.identity_holds = false;
      }
    }
  }
  return out;
}

InducedComparison induced_vs_hardcore(const Graph& g, std::span<const Vertex> component, int k) {
  const auto chain = induced_kernel(g, component, k);
  const auto& kern = chain.kernel;
  InducedComparison out;
  const Rational alpha(k, g.n());
  out.alpha = to_double(alpha);

  const auto inside = induced_subgraph(g, component);
  const auto inside_counts = size_counts(inside.graph);
  Rational z = 0, power = 1;
  for (std::size_t j = 0; j < inside_counts.size(); ++j) {
    z += Rational(inside_counts[j]) * power;
    power *= alpha;
  }
  auto note = [&](double r, double& lo, double& hi) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    const double dev = r > 0 ? std::max(r, 1.0 / r) : std::numeric_limits<double>::infinity();
    out.max_deviation = std::max(out.max_deviation, dev);
  };
  const long long gsize = static_cast<long long>(component.size());
  const Rational remove_p = Rational(1) / (Rational(1) + alpha) / gsize;
  const Rational add_p = alpha / (Rational(1) + alpha) / gsize;
  for (std::size_t i = 0; i < kern.size(); ++i) {
    const Mask x = kern.labels()[i];
    const int s = std::popcount(x);
    Rational hc = 1;
    for (int c = 0; c < s; ++c) hc *= alpha;
    hc /= z;
    note(to_double(kern.exact_stationary()[i] / hc), out.stationary_min, out.stationary_max);
    const auto r = kern.row(i);
    const auto v = kern.exact_row(i);
    for (std::size_t e = 0; e < r.size(); ++e) {
      if (r[e].col == i) continue;
      const bool removal = std::popcount(kern.labels()[r[e].col]) < s;
      note(to_double(v[e] / (removal ? remove_p : add_p)), out.transition_min, out.transition_max);
    }
  }
  return out;
}

namespace {

struct Conditioning {
  Mask gmask;
  std::vector<std::size_t> agree_g;       ///< I on G equals I_G
  std::vector<std::size_t> agree_g_minus; ///< I on G equals I_G \ u
  std::vector<std::size_t> agree_g_less_u;  ///< I on G \ u equals I_G \ u
};

Conditioning condition(const SliceSpace& space, std::span<const Vertex> component, Mask i_g, Vertex u,
                       std::span<const double> f) {
  const Graph& g = space.graph();
  if (f.size() != space.size()) throw std::invalid_argument("f must have one value per slice state");
  for (double v : f) {
    if (!(v >= 0) || !std::isfinite(v)) throw std::invalid_argument("f must be finite and non-negative");
  }
  Conditioning c;
  c.gmask = component_mask(g, component);
  if (u < 0 || u >= g.n() || !((i_g >> u) & 1)) throw std::invalid_argument("u must belong to I_G");
  if (i_g & ~c.gmask) throw std::invalid_argument("I_G must lie inside the component");
  const auto nbr = g.neighbor_masks();
  for (Mask r = i_g; r; r &= r - 1) {
    if (nbr[std::countr_zero(r)] & i_g) throw std::invalid_argument("I_G is not independent");
  }
  const Mask ubit = Mask{1} << u;
  const Mask minus = i_g & ~ubit;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Mask x = space.state(i) & c.gmask;
    if (x == i_g) c.agree_g.push_back(i);
    if (x == minus) c.agree_g_minus.push_back(i);
    if ((x & ~ubit) == minus) c.agree_g_less_u.push_back(i);
  }
  if (c.agree_g.empty()) throw std::domain_error("no slice state agrees with I_G on the component");
  return c;
}

double mean_over(std::span<const double> f, const std::vector<std::size_t>& idx) {
  double s = 0;
  for (auto i : idx) s += f[i];
  return s / static_cast<double>(idx.size());
}

}  // namespace

DecompositionRatio decomposition_ratio(const SliceSpace& space, std::span<const Vertex> component,
                                       Mask i_g, Vertex u, std::span<const double> f) {
  const auto c = condition(space, component, i_g, u, f);
  if (c.agree_g_minus.empty()) throw std::domain_error("no slice state agrees with I_G \\ u on the component");
  const Graph& g = space.graph();
  const int n = g.n();
  DecompositionRatio out;
  const double a = std::sqrt(mean_over(f, c.agree_g));
  const double b = std::sqrt(mean_over(f, c.agree_g_minus));
  out.lhs = (a - b) * (a - b);

  const auto label = components(g).label;
  const auto nbr = g.neighbor_masks();
  const Mask ubit = Mask{1} << u;
  double sum = 0;
  double fmax = 0;
  for (auto i : c.agree_g) {
    const Mask x = space.state(i);
    const double fx = std::sqrt(f[i]);
    fmax = std::max(fmax, f[i]);
    for (int v = 0; v < n; ++v) {
      if (label[v] == label[u] || ((x >> v) & 1) || (nbr[v] & (x & ~ubit))) continue;
      const auto j = space.index_of((x & ~ubit) | (Mask{1} << v));
      if (!j) throw std::logic_error("swap leaves the slice");
      const double d = fx - std::sqrt(f[*j]);
      sum += d * d;
    }
  }
  out.rhs = sum / (static_cast<double>(c.agree_g.size()) * n);
  const double zero = 1e-24 * (1.0 + fmax);
  if (out.rhs > 0) {
    out.ratio = out.lhs / out.rhs;
  } else if (out.lhs > zero) {
    out.ratio = std::numeric_limits<double>::infinity();
    out.infinite = true;
  } else {
    out.ratio = 0;
  }
  return out;
}

SteinCheck stein_difference_check(const SliceSpace& space, std::span<const Vertex> component, Mask i_g,
                                  Vertex u, std::span<const double> f) {
  const auto c = condition(space, component, i_g, u, f);
  const Graph& g = space.graph();
  std::vector<Mask> mu_states, nu_states;
  for (auto i : c.agree_g_less_u) mu_states.push_back(space.state(i));
  for (auto i : c.agree_g) nu_states.push_back(space.state(i));
  const auto p_mu = build_swap_kernel(g, mu_states);
  const auto p_nu = build_swap_kernel(g, nu_states);

  std::vector<double> f_mu(mu_states.size());
  for (std::size_t i = 0; i < mu_states.size(); ++i) f_mu[i] = f[c.agree_g_less_u[i]];
  const auto sol = solve_poisson(p_mu, f_mu);
  const auto& h = sol.h;
  const auto ph_mu = p_mu.apply(h);

  // nu states sit inside the mu states; both lists are sorted
  std::vector<std::size_t> nu_in_mu(nu_states.size());
  for (std::size_t i = 0; i < nu_states.size(); ++i) {
    nu_in_mu[i] = static_cast<std::size_t>(
        std::lower_bound(mu_states.begin(), mu_states.end(), nu_states[i]) - mu_states.begin());
  }
  std::vector<double> h_nu(nu_states.size());
  for (std::size_t i = 0; i < nu_states.size(); ++i) h_nu[i] = h[nu_in_mu[i]];
  const auto ph_nu = p_nu.apply(h_nu);

  SteinCheck out;
  out.mu_states = mu_states.size();
  out.nu_states = nu_states.size();
  out.poisson_residual = sol.residual;
  out.lhs = mean_over(f, c.agree_g);
  double correction = 0;
  for (std::size_t i = 0; i < nu_states.size(); ++i) {
    const std::size_t j = nu_in_mu[i];
    correction += (ph_nu[i] - h_nu[i]) - (ph_mu[j] - h[j]);
  }
  correction /= static_cast<double>(nu_states.size());
  out.rhs = expectation(p_mu, f_mu) + correction;
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

}  // namespace kslice
