#pragma once

#include <vector>

#include "kslice/count.hpp"
#include "kslice/graph.hpp"
#include "kslice/numeric.hpp"

namespace kslice {

/// Tree-uniqueness threshold (D-1)^(D-1) / (D-2)^D; requires delta >= 3.
Rational critical_activity_exact(int delta);
double critical_activity(int delta);

/// Clique occupancy fraction at the critical activity: lc / (1 + (D+1) lc).
Rational critical_density_exact(int delta);
double critical_density(int delta);

/// Law of |I| under the hard-core measure lambda^|I| / Z_G(lambda).
class HardCoreModel {
 public:
  HardCoreModel(SizeCountVector counts, Real lambda);

  const SizeCountVector& counts() const { return counts_; }
  const Real& lambda() const { return lambda_; }
  Real partition_function() const;
  /// P(|I| = j) for j = 0..n.
  std::vector<Real> size_distribution() const;
  Real mean() const;

 private:
  SizeCountVector counts_;
  Real lambda_;
};

/// E_lambda |I| computed from exact counts.
Real mean_size(const SizeCountVector& counts, const Real& lambda);

/// Bisection for E_lambda |I| = k on [1e-12, hi], hi doubled until the mean
/// passes k. Requires 1 <= k < independence number.
Real solve_activity(const SizeCountVector& counts, int k, const Real& tol = Real("1e-9"));

/// a_k lambda^k / Z_G(lambda).
Real slice_probability(const HardCoreModel& model, int k);
Rational slice_probability_exact(const SizeCountVector& counts, const Rational& lambda, int k);

struct CumulantReport {
  Real lambda;
  Real mean;
  Real variance;
  int max_order = 0;
  std::vector<Real> kappa;  ///< kappa[j] for j = 0..max_order; kappa[0] unused (0)
  std::vector<Real> beta;   ///< beta[j] = kappa_j / (j! sigma^j) for j >= 3; lower entries 0

  Real sigma() const;
};

/// Cumulants kappa_1..kappa_d from central moments in 50-digit arithmetic.
/// Throws std::domain_error when |I| is supported on a single point.
CumulantReport cumulants(const HardCoreModel& model, int d = 6);

/// kappa_1..kappa_d of |I| + offset; no support restriction (degenerate laws
/// have zero higher cumulants).
std::vector<Real> raw_cumulants(const SizeCountVector& counts, const Real& lambda, int d,
                                int offset = 0);

/// Exact rational cumulants for rational activity.
std::vector<Rational> exact_cumulants(const SizeCountVector& counts, const Rational& lambda, int d);

/// Probabilists' Hermite polynomial He_k(x).
double hermite(int k, double x);
Real hermite(int k, const Real& x);

/// One index sequence (j_3, ..., j_l); multiplicity[i] is j_{i+3}.
struct EdgeworthSequence {
  std::vector<int> multiplicity;
  int order() const;      ///< sum_a a j_a
  double weight() const;  ///< sum_a j_a (a - 2) / 2
};

struct EdgeworthTerm {
  int r = 0;
  std::vector<EdgeworthSequence> sequences;
  Real coefficient = 0;  ///< sum over sequences of prod beta_a^j_a / j_a!
};

/// Correction terms kept at order d: all sequences of weight at most d - 1.
/// Order 1 is the plain Gaussian; order 2 keeps H3 b3 + H4 b4 + H6 b3^2/2.
std::vector<EdgeworthTerm> edgeworth_terms(int d);

/// Highest cumulant order the order-d expansion reads.
int edgeworth_required_order(int d);

/// Lattice-point estimate of P(X = mean + a).
Real edgeworth_estimate(const CumulantReport& report, const Real& a, int d);

/// Gaussian leading term exp(-a^2 / 2 sigma^2) / (sqrt(2 pi) sigma).
Real gaussian_term(const CumulantReport& report, const Real& a);

struct CumulantStability {
  std::vector<Real> in_cumulants;   ///< X: 1 + |I| on G minus N[u]
  std::vector<Real> out_cumulants;  ///< X': |I| on G minus u
  std::vector<Real> difference;     ///< |kappa_j(X) - kappa_j(X')|, index j = 1..d (0 unused)
  Real max_difference() const;
};

CumulantStability cumulant_stability(const Graph& g, Vertex u, const Real& lambda, int d = 4);

struct MarginalBound {
  Rational value;  ///< min over u of min(mu_k[u], 1 - mu_k[u])
  Vertex vertex = 0;
  std::vector<Rational> occupation;  ///< mu_k[u] per vertex
};

MarginalBound marginal_bounds(const Graph& g, int k);

}  // namespace kslice
