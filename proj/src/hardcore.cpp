#include "kslice/hardcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/constants/constants.hpp>

namespace kslice {

namespace {

BigInt ipow(long long base, int exp) {
  BigInt out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

void require_delta(int delta) {
  if (delta < 3) throw std::invalid_argument("thresholds need delta >= 3, got " + std::to_string(delta));
}

// Central-moment route shared by the real and rational paths.
template <class T>
std::vector<T> cumulants_from_distribution(const std::vector<T>& p, int d, T shift) {
  T mean = 0;
  for (std::size_t j = 0; j < p.size(); ++j) mean += T(static_cast<long long>(j)) * p[j];
  std::vector<T> m(static_cast<std::size_t>(d) + 1, T(0));
  m[0] = 1;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 0) continue;
    const T dev = T(static_cast<long long>(j)) - mean;
    T power = dev;
    for (int r = 1; r <= d; ++r) {
      m[r] += power * p[j];
      power *= dev;
    }
  }
  m[1] = 0;
  // binomial(n-1, i-1) table
  std::vector<std::vector<T>> binom(static_cast<std::size_t>(d) + 1);
  for (int i = 0; i <= d; ++i) {
    binom[i].assign(static_cast<std::size_t>(i) + 1, T(1));
    for (int j = 1; j < i; ++j) binom[i][j] = binom[i - 1][j - 1] + binom[i - 1][j];
  }
  std::vector<T> kappa(static_cast<std::size_t>(d) + 1, T(0));
  for (int r = 2; r <= d; ++r) {
    T acc = m[r];
    for (int i = 2; i < r; ++i) acc -= binom[r - 1][i - 1] * kappa[i] * m[r - i];
    kappa[r] = acc;
  }
  if (d >= 1) kappa[1] = mean + shift;
  return kappa;
}

std::vector<Real> real_distribution(const SizeCountVector& counts, const Real& lambda) {
  std::vector<Real> p(counts.size());
  Real power = 1;
  Real z = 0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    p[j] = to_real(counts[j]) * power;
    z += p[j];
    power *= lambda;
  }
  for (auto& x : p) x /= z;
  return p;
}

}  // namespace

Rational critical_activity_exact(int delta) {
  require_delta(delta);
  return Rational(ipow(delta - 1, delta - 1), ipow(delta - 2, delta));
}

double critical_activity(int delta) { return to_double(critical_activity_exact(delta)); }

Rational critical_density_exact(int delta) {
  const Rational lc = critical_activity_exact(delta);
  return lc / (Rational(1) + Rational(delta + 1) * lc);
}

double critical_density(int delta) { return to_double(critical_density_exact(delta)); }

HardCoreModel::HardCoreModel(SizeCountVector counts, Real lambda)
    : counts_(std::move(counts)), lambda_(std::move(lambda)) {
  if (counts_.size() == 0) throw std::invalid_argument("empty count vector");
  if (!(lambda_ >= 0)) throw std::invalid_argument("activity must be non-negative");
}

Real HardCoreModel::partition_function() const { return eval_Z(counts_, lambda_); }

std::vector<Real> HardCoreModel::size_distribution() const {
  return real_distribution(counts_, lambda_);
}

Real HardCoreModel::mean() const { return mean_size(counts_, lambda_); }

Real mean_size(const SizeCountVector& counts, const Real& lambda) {
  Real num = 0;
  Real den = 0;
  Real power = 1;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const Real w = to_real(counts[j]) * power;
    num += Real(static_cast<long long>(j)) * w;
    den += w;
    power *= lambda;
  }
  return num / den;
}

Real solve_activity(const SizeCountVector& counts, int k, const Real& tol) {
  if (k <= 0) throw std::invalid_argument("target size must be at least 1");
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  if (static_cast<std::size_t>(k) >= counts.independence_number()) {
    throw std::domain_error("target size " + std::to_string(k) +
                            " is not below the independence number " +
                            std::to_string(counts.independence_number()));
  }
  const Real target(k);
  Real lo("1e-12");
  Real hi(1);
  while (mean_size(counts, hi) < target) {
    hi *= 2;
    if (hi > Real("1e300")) throw std::runtime_error("activity bracket diverged");
  }
  Real mid = hi;
  for (int iter = 0; iter < 4000; ++iter) {
    mid = (lo + hi) / 2;
    const Real m = mean_size(counts, mid);
    if (abs(m - target) <= tol) return mid;
    if (m < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

Real slice_probability(const HardCoreModel& model, int k) {
  if (k < 0 || static_cast<std::size_t>(k) >= model.counts().size()) return Real(0);
  return to_real(model.counts()[k]) * pow(model.lambda(), k) / model.partition_function();
}

Rational slice_probability_exact(const SizeCountVector& counts, const Rational& lambda, int k) {
  Rational z = 0;
  Rational power = 1;
  Rational at_k = 0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const Rational w = Rational(counts[j]) * power;
    if (static_cast<int>(j) == k) at_k = w;
    z += w;
    power *= lambda;
  }
  return at_k / z;
}

Real CumulantReport::sigma() const { return sqrt(variance); }

CumulantReport cumulants(const HardCoreModel& model, int d) {
  if (d < 2) throw std::invalid_argument("cumulant order must be at least 2");
  if (!(model.lambda() > 0)) throw std::domain_error("degenerate support: activity is zero");
  std::size_t support = 0;
  for (const auto& c : model.counts().counts()) support += c != 0 ? 1 : 0;
  if (support < 2) throw std::domain_error("degenerate support: |I| takes a single value");

  CumulantReport rep;
  rep.lambda = model.lambda();
  rep.max_order = d;
  rep.kappa = cumulants_from_distribution(model.size_distribution(), d, Real(0));
  rep.mean = rep.kappa[1];
  rep.variance = rep.kappa[2];
  rep.beta.assign(static_cast<std::size_t>(d) + 1, Real(0));
  const Real sigma = rep.sigma();
  Real factorial = 2;
  Real sigma_power = sigma * sigma;
  for (int j = 3; j <= d; ++j) {
    factorial *= j;
    sigma_power *= sigma;
    rep.beta[j] = rep.kappa[j] / (factorial * sigma_power);
  }
  return rep;
}

std::vector<Real> raw_cumulants(const SizeCountVector& counts, const Real& lambda, int d, int offset) {
  if (d < 1) throw std::invalid_argument("cumulant order must be at least 1");
  return cumulants_from_distribution(real_distribution(counts, lambda), d, Real(offset));
}

std::vector<Rational> exact_cumulants(const SizeCountVector& counts, const Rational& lambda, int d) {
  if (d < 1) throw std::invalid_argument("cumulant order must be at least 1");
  std::vector<Rational> p(counts.size());
  Rational power = 1;
  Rational z = 0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    p[j] = Rational(counts[j]) * power;
    z += p[j];
    power *= lambda;
  }
  for (auto& x : p) x /= z;
  return cumulants_from_distribution(p, d, Rational(0));
}

template <class T>
static T hermite_impl(int k, const T& x) {
  if (k < 0) throw std::invalid_argument("Hermite degree must be non-negative");
  T prev = 1;
  if (k == 0) return prev;
  T cur = x;
  for (int j = 1; j < k; ++j) {
    T next = x * cur - T(j) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double hermite(int k, double x) { return hermite_impl(k, x); }
Real hermite(int k, const Real& x) { return hermite_impl(k, x); }

int EdgeworthSequence::order() const {
  int r = 0;
  for (std::size_t i = 0; i < multiplicity.size(); ++i) r += static_cast<int>(i + 3) * multiplicity[i];
  return r;
}

double EdgeworthSequence::weight() const {
  double w = 0;
  for (std::size_t i = 0; i < multiplicity.size(); ++i) w += multiplicity[i] * (static_cast<double>(i) + 1) / 2;
  return w;
}

int edgeworth_required_order(int d) { return d <= 1 ? 2 : 2 * d; }

namespace {

// twice_budget bounds sum_a j_a (a - 2); a ranges over 3..max_a.
void grow_sequences(int a, int max_a, int twice_budget, std::vector<int>& current,
                    std::vector<std::vector<int>>& out) {
  if (a > max_a) {
    bool any = false;
    for (int m : current) any = any || m > 0;
    if (any) out.push_back(current);
    return;
  }
  for (int j = 0; j * (a - 2) <= twice_budget; ++j) {
    current[a - 3] = j;
    grow_sequences(a + 1, max_a, twice_budget - j * (a - 2), current, out);
  }
  current[a - 3] = 0;
}

}  // namespace

std::vector<EdgeworthTerm> edgeworth_terms(int d) {
  if (d < 1) throw std::invalid_argument("Edgeworth order must be at least 1");
  const int twice_budget = 2 * (d - 1);
  const int max_a = 2 + twice_budget;
  std::vector<EdgeworthTerm> terms;
  if (max_a < 3) return terms;
  std::vector<int> current(static_cast<std::size_t>(max_a - 2), 0);
  std::vector<std::vector<int>> raw;
  grow_sequences(3, max_a, twice_budget, current, raw);
  for (auto& m : raw) {
    while (!m.empty() && m.back() == 0) m.pop_back();
    EdgeworthSequence s{m};
    const int r = s.order();
    auto it = std::find_if(terms.begin(), terms.end(), [r](const EdgeworthTerm& t) { return t.r == r; });
    if (it == terms.end()) {
      terms.push_back(EdgeworthTerm{r, {}, 0});
      it = terms.end() - 1;
    }
    it->sequences.push_back(std::move(s));
  }
  std::sort(terms.begin(), terms.end(), [](const auto& x, const auto& y) { return x.r < y.r; });
  return terms;
}

Real gaussian_term(const CumulantReport& report, const Real& a) {
  const Real sigma = report.sigma();
  if (!(sigma > 0)) throw std::domain_error("sigma must be positive");
  const Real root_two_pi = sqrt(2 * boost::math::constants::pi<Real>());
  return exp(-(a * a) / (2 * report.variance)) / (root_two_pi * sigma);
}

Real edgeworth_estimate(const CumulantReport& report, const Real& a, int d) {
  if (d < 1) throw std::invalid_argument("Edgeworth order must be at least 1");
  if (!(report.variance > 0)) throw std::domain_error("sigma must be positive");
  if (report.max_order < edgeworth_required_order(d)) {
    throw std::invalid_argument("order " + std::to_string(d) + " needs cumulants up to " +
                                std::to_string(edgeworth_required_order(d)));
  }
  const Real x = a / report.sigma();
  Real correction = 1;
  for (auto term : edgeworth_terms(d)) {
    Real coefficient = 0;
    for (const auto& s : term.sequences) {
      Real prod = 1;
      for (std::size_t i = 0; i < s.multiplicity.size(); ++i) {
        const int j = s.multiplicity[i];
        if (j == 0) continue;
        Real factorial = 1;
        for (int f = 2; f <= j; ++f) factorial *= f;
        prod *= pow(report.beta[i + 3], j) / factorial;
      }
      coefficient += prod;
    }
    correction += hermite(term.r, x) * coefficient;
  }
  return gaussian_term(report, a) * correction;
}

Real CumulantStability::max_difference() const {
  Real best = 0;
  for (std::size_t j = 1; j < difference.size(); ++j) {
    if (difference[j] > best) best = difference[j];
  }
  return best;
}

CumulantStability cumulant_stability(const Graph& g, Vertex u, const Real& lambda, int d) {
  if (u < 0 || u >= g.n()) throw std::out_of_range("vertex out of range");
  if (!(lambda > 0)) throw std::invalid_argument("activity must be positive");
  if (g.n() < 2) throw std::domain_error("G minus u is empty; X' is degenerate");
  const auto in_counts = size_counts(delete_closed_neighborhood(g, u).graph);
  const auto out_counts = size_counts(delete_vertex(g, u).graph);
  CumulantStability s;
  s.in_cumulants = raw_cumulants(in_counts, lambda, d, 1);
  s.out_cumulants = raw_cumulants(out_counts, lambda, d, 0);
  s.difference.assign(static_cast<std::size_t>(d) + 1, Real(0));
  for (int j = 1; j <= d; ++j) s.difference[j] = abs(s.in_cumulants[j] - s.out_cumulants[j]);
  return s;
}

MarginalBound marginal_bounds(const Graph& g, int k) {
  const auto counts = size_counts(g);
  if (k < 0 || counts.at(static_cast<std::size_t>(k)) == 0) {
    throw std::domain_error("empty slice at k = " + std::to_string(k));
  }
  const BigInt total = counts[k];
  MarginalBound out;
  bool first = true;
  for (Vertex u = 0; u < g.n(); ++u) {
    const auto pinned = size_counts(g, PinSet{{u}, {}});
    const Rational occ(pinned.at(static_cast<std::size_t>(k)), total);
    out.occupation.push_back(occ);
    const Rational m = std::min(occ, Rational(1) - occ);
    if (first || m < out.value) {
      out.value = m;
      out.vertex = u;
      first = false;
    }
  }
  return out;
}

}  // namespace kslice
