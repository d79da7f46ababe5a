#pragma once
// Deliberately naive reference implementations. They share types with the
// library but none of its algorithms: subsets are walked one by one, kernels
// are filled from the walk definitions pair by pair.

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "kslice/graph.hpp"
#include "kslice/numeric.hpp"

namespace oracle {

using kslice::BigInt;
using kslice::Edge;
using kslice::Rational;
using Set = std::set<int>;

inline bool independent(const std::vector<Edge>& edges, const Set& s) {
  for (auto [a, b] : edges) {
    if (s.count(a) && s.count(b)) return false;
  }
  return true;
}

inline std::vector<Set> all_independent(int n, const std::vector<Edge>& edges) {
  std::vector<Set> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    Set s;
    for (int v = 0; v < n; ++v) {
      if ((m >> v) & 1) s.insert(v);
    }
    if (independent(edges, s)) out.push_back(s);
  }
  return out;
}

inline std::vector<Set> slice(int n, const std::vector<Edge>& edges, int k) {
  std::vector<Set> out;
  for (auto& s : all_independent(n, edges)) {
    if (static_cast<int>(s.size()) == k) out.push_back(s);
  }
  return out;
}

inline std::vector<BigInt> counts(int n, const std::vector<Edge>& edges) {
  std::vector<BigInt> a(n + 1, BigInt(0));
  for (auto& s : all_independent(n, edges)) a[s.size()] += 1;
  return a;
}

inline Rational rpow(const Rational& b, int e) {
  Rational r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

inline BigInt binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// i_k(P_n) = C(n-k+1, k); i_k(C_n) = n/(n-k) C(n-k, k)
inline BigInt path_count(int n, int k) { return binom(n - k + 1, k); }
inline BigInt cycle_count(int n, int k) {
  if (k == 0) return 1;
  if (2 * k > n) return 0;
  return BigInt(n) * binom(n - k, k) / (n - k);
}

inline std::uint64_t mask(const Set& s) {
  std::uint64_t m = 0;
  for (int v : s) m |= std::uint64_t{1} << v;
  return m;
}

enum class Walk { metropolis, hdx, modified };

// Dense exact kernel on the listed states, straight from the walk definitions.
inline std::vector<std::vector<Rational>> walk_kernel(int n, const std::vector<Edge>& edges,
                                                      const std::vector<Set>& states, Walk w) {
  const std::size_t N = states.size();
  std::map<Set, std::size_t> index;
  for (std::size_t i = 0; i < N; ++i) index[states[i]] = i;
  std::vector<int> comp(n);
  for (int v = 0; v < n; ++v) comp[v] = v;
  for (bool changed = true; changed;) {
    changed = false;
    for (auto [a, b] : edges) {
      const int m = std::min(comp[a], comp[b]);
      if (comp[a] != m || comp[b] != m) {
        comp[a] = comp[b] = m;
        changed = true;
      }
    }
  }
  std::vector<std::vector<Rational>> P(N, std::vector<Rational>(N, Rational(0)));
  for (std::size_t i = 0; i < N; ++i) {
    const Set& x = states[i];
    const int k = static_cast<int>(x.size());
    if (k == 0) {
      P[i][i] = 1;  // nothing to remove: the walk holds
    } else if (w == Walk::metropolis) {
      for (int u : x) {
        for (int v = 0; v < n; ++v) {
          Set y = x;
          y.erase(u);
          y.insert(v);
          const Rational p(1, static_cast<long long>(k) * n);
          if (static_cast<int>(y.size()) == k && independent(edges, y)) {
            P[i][index.at(y)] += p;
          } else {
            P[i][i] += p;
          }
        }
      }
    } else if (w == Walk::hdx) {
      for (int u : x) {
        std::vector<Set> ok;
        for (int v = 0; v < n; ++v) {
          Set y = x;
          y.erase(u);
          y.insert(v);
          if (static_cast<int>(y.size()) == k && independent(edges, y)) ok.push_back(y);
        }
        for (auto& y : ok) P[i][index.at(y)] += Rational(1, static_cast<long long>(k) * ok.size());
      }
    } else {
      for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
          const Rational p(1, static_cast<long long>(n) * n);
          bool moved = false;
          if (x.count(u) && !x.count(v) && comp[u] != comp[v]) {
            Set y = x;
            y.erase(u);
            y.insert(v);
            if (independent(edges, y)) {
              P[i][index.at(y)] += p;
              moved = true;
            }
          }
          if (!moved) P[i][i] += p;
        }
      }
    }
  }
  return P;
}

inline Eigen::MatrixXd to_dense(const std::vector<std::vector<Rational>>& P) {
  const auto N = static_cast<Eigen::Index>(P.size());
  Eigen::MatrixXd M(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) M(i, j) = kslice::to_double(P[i][j]);
  }
  return M;
}

// Gap of a kernel reversible w.r.t. pi via the symmetrized matrix.
inline double gap(const Eigen::MatrixXd& P, const std::vector<double>& pi) {
  const auto N = P.rows();
  if (N == 1) return 1.0;
  Eigen::MatrixXd S(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) S(i, j) = std::sqrt(pi[i] / pi[j]) * P(i, j);
  }
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  return 1.0 - es.eigenvalues()(N - 2);
}

// TV(delta_s P^t, pi) by explicit matrix powers.
inline std::vector<double> tv_profile(const Eigen::MatrixXd& P, const std::vector<double>& pi, int s, int horizon) {
  Eigen::RowVectorXd nu = Eigen::RowVectorXd::Zero(P.rows());
  nu(s) = 1;
  std::vector<double> out;
  for (int t = 0; t <= horizon; ++t) {
    double d = 0;
    for (Eigen::Index i = 0; i < P.rows(); ++i) d += std::abs(nu(i) - pi[i]);
    out.push_back(d / 2);
    nu = nu * P;
  }
  return out;
}

}  // namespace oracle
