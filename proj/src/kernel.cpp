#include "kslice/kernel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace kslice {

std::string_view kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::metropolis: return "metropolis";
    case KernelKind::hdx: return "hdx";
    case KernelKind::modified: return "modified";
    case KernelKind::glauber: return "glauber";
    case KernelKind::induced: return "induced";
    case KernelKind::swap: return "swap";
    case KernelKind::custom: return "custom";
  }
  return "custom";
}

std::string_view variant_name(WalkVariant v) { return kernel_kind_name(kernel_kind(v)); }

WalkVariant parse_variant(std::string_view name) {
  if (name == "metropolis") return WalkVariant::metropolis;
  if (name == "hdx") return WalkVariant::hdx;
  if (name == "modified") return WalkVariant::modified;
  throw std::invalid_argument("unknown walk variant '" + std::string(name) + "'");
}

KernelKind kernel_kind(WalkVariant v) {
  switch (v) {
    case WalkVariant::metropolis: return KernelKind::metropolis;
    case WalkVariant::hdx: return KernelKind::hdx;
    case WalkVariant::modified: return KernelKind::modified;
  }
  return KernelKind::custom;
}

namespace {

bool exact_invariants_hold(const std::vector<std::size_t>& row_ptr,
                           const std::vector<KernelEntry>& entries,
                           const std::vector<Rational>& exact, const std::vector<Rational>& pi,
                           std::string* why) {
  const std::size_t n = pi.size();
  Rational total = 0;
  for (const auto& p : pi) total += p;
  if (total != 1) {
    if (why) *why = "stationary law does not sum to 1";
    return false;
  }
  std::vector<Rational> flow(n, Rational(0));
  for (std::size_t i = 0; i < n; ++i) {
    Rational sum = 0;
    for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) {
      if (exact[e] < 0) {
        if (why) *why = "negative transition probability in row " + std::to_string(i);
        return false;
      }
      sum += exact[e];
      flow[entries[e].col] += pi[i] * exact[e];
    }
    if (sum != 1) {
      if (why) *why = "row " + std::to_string(i) + " does not sum to 1";
      return false;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (flow[i] != pi[i]) {
      if (why) *why = "stationary law not preserved at state " + std::to_string(i);
      return false;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) {
      const std::size_t j = entries[e].col;
      const auto first = entries.begin() + static_cast<std::ptrdiff_t>(row_ptr[j]);
      const auto last = entries.begin() + static_cast<std::ptrdiff_t>(row_ptr[j + 1]);
      const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(i),
                                       [](const KernelEntry& x, std::uint32_t c) { return x.col < c; });
      const Rational back = (it != last && it->col == i)
                                ? exact[static_cast<std::size_t>(it - entries.begin())]
                                : Rational(0);
      if (pi[i] * exact[e] != pi[j] * back) {
        if (why) *why = "detailed balance fails between " + std::to_string(i) + " and " + std::to_string(j);
        return false;
      }
    }
  }
  return true;
}

}  // namespace

Kernel Kernel::from_exact(KernelKind kind, std::vector<Mask> labels, std::vector<ExactRow> rows,
                          std::vector<Rational> stationary) {
  if (rows.size() != stationary.size()) throw std::invalid_argument("row count does not match stationary law");
  if (!labels.empty() && labels.size() != rows.size()) throw std::invalid_argument("label count mismatch");
  Kernel k;
  k.kind_ = kind;
  k.labels_ = std::move(labels);
  k.row_ptr_.assign(1, 0);
  for (auto& row : rows) {
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < row.size();) {
      const auto col = row[i].first;
      if (col >= rows.size()) throw std::invalid_argument("column out of range");
      Rational p = 0;
      for (; i < row.size() && row[i].first == col; ++i) p += row[i].second;
      if (p == 0) continue;
      k.entries_.push_back(KernelEntry{col, to_double(p)});
      k.exact_.push_back(std::move(p));
    }
    k.row_ptr_.push_back(k.entries_.size());
  }
  k.stationary_.reserve(stationary.size());
  for (const auto& p : stationary) k.stationary_.push_back(to_double(p));
  k.exact_stationary_ = std::move(stationary);
  std::string why;
  if (!exact_invariants_hold(k.row_ptr_, k.entries_, k.exact_, k.exact_stationary_, &why)) {
    throw std::logic_error("kernel invariant violated: " + why);
  }
  return k;
}

Kernel Kernel::from_dense(const Eigen::MatrixXd& p, std::vector<double> stationary, KernelKind kind,
                          double tol) {
  const auto n = static_cast<std::size_t>(p.rows());
  if (p.cols() != p.rows() || stationary.size() != n) throw std::invalid_argument("dimension mismatch");
  Kernel k;
  k.kind_ = kind;
  k.row_ptr_.assign(1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v < 0) throw std::invalid_argument("negative transition probability");
      if (v != 0) k.entries_.push_back(KernelEntry{static_cast<std::uint32_t>(j), v});
    }
    k.row_ptr_.push_back(k.entries_.size());
  }
  k.stationary_ = std::move(stationary);
  const auto check = check_kernel(k);
  if (check.max_row_error > tol || check.max_balance_error > tol || check.max_stationarity_error > tol) {
    throw std::invalid_argument("matrix is not a reversible stochastic kernel for the given law");
  }
  return k;
}

double Kernel::at(std::size_t i, std::size_t j) const {
  const auto r = row(i);
  const auto it = std::lower_bound(r.begin(), r.end(), static_cast<std::uint32_t>(j),
                                   [](const KernelEntry& x, std::uint32_t c) { return x.col < c; });
  return (it != r.end() && it->col == j) ? it->p : 0.0;
}

Eigen::MatrixXd Kernel::dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < size(); ++i) {
    for (const auto& e : row(i)) m(static_cast<Eigen::Index>(i), e.col) = e.p;
  }
  return m;
}

std::vector<double> Kernel::apply(std::span<const double> f) const {
  if (f.size() != size()) throw std::invalid_argument("dimension mismatch");
  std::vector<double> out(size(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    double acc = 0;
    for (const auto& e : row(i)) acc += e.p * f[e.col];
    out[i] = acc;
  }
  return out;
}

std::vector<double> Kernel::apply_left(std::span<const double> nu) const {
  if (nu.size() != size()) throw std::invalid_argument("dimension mismatch");
  std::vector<double> out(size(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    if (nu[i] == 0) continue;
    for (const auto& e : row(i)) out[e.col] += nu[i] * e.p;
  }
  return out;
}

KernelCheck check_kernel(const Kernel& kernel) {
  KernelCheck c;
  const std::size_t n = kernel.size();
  const auto& pi = kernel.stationary();
  std::vector<double> flow(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0;
    for (const auto& e : kernel.row(i)) {
      sum += e.p;
      flow[e.col] += pi[i] * e.p;
      const double back = kernel.at(e.col, i);
      c.max_balance_error = std::max(c.max_balance_error, std::abs(pi[i] * e.p - pi[e.col] * back));
    }
    c.max_row_error = std::max(c.max_row_error, std::abs(sum - 1.0));
  }
  for (std::size_t i = 0; i < n; ++i) {
    c.max_stationarity_error = std::max(c.max_stationarity_error, std::abs(flow[i] - pi[i]));
  }
  if (kernel.has_exact()) {
    c.exact_checked = true;
    std::vector<std::size_t> row_ptr{0};
    std::vector<KernelEntry> entries;
    std::vector<Rational> exact;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = kernel.row(i);
      const auto x = kernel.exact_row(i);
      entries.insert(entries.end(), r.begin(), r.end());
      exact.insert(exact.end(), x.begin(), x.end());
      row_ptr.push_back(entries.size());
    }
    c.exact_ok = exact_invariants_hold(row_ptr, entries, exact, kernel.exact_stationary(), nullptr);
  }
  return c;
}

Kernel build_kernel(const SliceSpace& space, WalkVariant variant, std::size_t max_states) {
  if (space.empty()) throw std::invalid_argument("empty state space");
  if (space.size() > max_states) {
    throw std::length_error("slice has " + std::to_string(space.size()) + " states; cap is " +
                            std::to_string(max_states));
  }
  const Graph& g = space.graph();
  const int n = g.n();
  const int k = space.k();
  const auto nbr = g.neighbor_masks();
  const auto label = components(g).label;
  const std::size_t size = space.size();
  std::vector<ExactRow> rows(size);
  const Rational uniform(1, static_cast<long long>(size));

  for (std::size_t i = 0; i < size; ++i) {
    const Mask x = space.state(i);
    ExactRow& row = rows[i];
    Rational off = 0;
    auto add = [&](Mask y, const Rational& p) {
      const auto j = space.index_of(y);
      if (!j) throw std::logic_error("transition leaves the slice");
      row.emplace_back(static_cast<std::uint32_t>(*j), p);
      off += p;
    };
    for (Mask rest = x; rest; rest &= rest - 1) {
      const int u = std::countr_zero(rest);
      const Mask s = x & ~(Mask{1} << u);
      switch (variant) {
        case WalkVariant::metropolis: {
          const Rational p(1, static_cast<long long>(k) * n);
          for (int v = 0; v < n; ++v) {
            if (v == u || ((s >> v) & 1) || (nbr[v] & s)) continue;
            add(s | (Mask{1} << v), p);
          }
          break;
        }
        case WalkVariant::hdx: {
          long long completions = 0;
          for (int v = 0; v < n; ++v) {
            if (!((s >> v) & 1) && !(nbr[v] & s)) ++completions;
          }
          const Rational p(1, static_cast<long long>(k) * completions);
          for (int v = 0; v < n; ++v) {
            if (v == u || ((s >> v) & 1) || (nbr[v] & s)) continue;
            add(s | (Mask{1} << v), p);
          }
          break;
        }
        case WalkVariant::modified: {
          const Rational p(1, static_cast<long long>(n) * n);
          for (int v = 0; v < n; ++v) {
            if (label[v] == label[u] || ((s >> v) & 1) || (nbr[v] & s)) continue;
            add(s | (Mask{1} << v), p);
          }
          break;
        }
      }
    }
    row.emplace_back(static_cast<std::uint32_t>(i), Rational(1) - off);
  }
  return Kernel::from_exact(kernel_kind(variant), space.states(), std::move(rows),
                            std::vector<Rational>(size, uniform));
}

Kernel build_glauber_kernel(const Graph& g, const Rational& lambda, std::size_t max_states) {
  if (!(lambda > 0)) throw std::invalid_argument("activity must be positive");
  const auto states = enumerate_independent_sets(g);
  if (states.size() > max_states) throw std::length_error("too many independent sets for an exact kernel");
  const int n = g.n();
  const auto nbr = g.neighbor_masks();
  auto index = [&](Mask m) {
    return static_cast<std::uint32_t>(std::lower_bound(states.begin(), states.end(), m) - states.begin());
  };
  std::vector<ExactRow> rows(states.size());
  std::vector<Rational> weight(states.size());
  Rational z = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Mask x = states[i];
    Rational w = 1;
    for (int c = std::popcount(x); c > 0; --c) w *= lambda;
    weight[i] = w;
    z += w;
    Rational off = 0;
    if (n > 0) {
      const Rational add_p = lambda / (Rational(1) + lambda) / n;
      const Rational remove_p = Rational(1) / (Rational(1) + lambda) / n;
      for (int v = 0; v < n; ++v) {
        const Mask bit = Mask{1} << v;
        if (x & bit) {
          rows[i].emplace_back(index(x & ~bit), remove_p);
          off += remove_p;
        } else if (!(nbr[v] & x)) {
          rows[i].emplace_back(index(x | bit), add_p);
          off += add_p;
        }
      }
    }
    rows[i].emplace_back(static_cast<std::uint32_t>(i), Rational(1) - off);
  }
  for (auto& w : weight) w /= z;
  return Kernel::from_exact(KernelKind::glauber, states, std::move(rows), std::move(weight));
}

}  // namespace kslice
