#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kslice/count.hpp"
#include "kslice/graph.hpp"
#include "kslice/kernel.hpp"
#include "kslice/numeric.hpp"

namespace kslice {

// --- influence -------------------------------------------------------------

/// M(i, j) = P[j | i] - P[j | not i] under the uniform slice law.
/// Rows (and the matching columns) with P[i] in {0, 1} are flagged and left zero.
struct InfluenceMatrix {
  Eigen::MatrixXd values;
  std::vector<std::vector<Rational>> exact;
  std::vector<Rational> marginal;  ///< P[i]
  std::vector<bool> flagged;

  int n() const { return static_cast<int>(flagged.size()); }
  std::vector<Vertex> flagged_rows() const;
};

/// Exact conditionals from the enumerated slice (n <= 30). Throws
/// std::domain_error on an empty slice.
InfluenceMatrix influence_matrix(const Graph& g, int k);

struct IndependenceNorms {
  double lambda_max = 0;   ///< largest real eigenvalue on unflagged rows
  double linf = 0;         ///< max_i sum_j |M(i, j)| over unflagged rows
  double residual = 0;     ///< |M x - lambda x| for the reported eigenpair
  std::size_t flagged = 0;
};

/// Throws std::runtime_error when the eigensolve fails or lambda_max exceeds
/// the row norm by more than 1e-8.
IndependenceNorms independence_norms(const InfluenceMatrix& m);
IndependenceNorms independence_norms(const Eigen::MatrixXd& m);

// --- functionals -----------------------------------------------------------

double expectation(const Kernel& kern, std::span<const double> f);
double variance(const Kernel& kern, std::span<const double> f);
/// E[f log f] - E f log E f for f >= 0, summed in a cancellation-free form.
double entropy(const Kernel& kern, std::span<const double> f);

/// (1/2) sum_{x,y} pi(x) P(x,y) (f(x) - f(y)) (g(x) - g(y)).
double dirichlet_form(const Kernel& kern, std::span<const double> f, std::span<const double> g);

// --- spectra ---------------------------------------------------------------

struct Spectrum {
  std::vector<double> eigenvalues;  ///< ascending, of D^(1/2) P D^(-1/2)
  Eigen::MatrixXd eigenvectors;     ///< orthonormal columns in the symmetrized basis
};

Spectrum symmetrized_spectrum(const Kernel& kern);

/// 1 minus the second-largest eigenvalue; 1 for a single-state kernel.
double spectral_gap(const Kernel& kern);

struct LsiOptions {
  double tol = 1e-6;
  int restarts = 32;
  std::uint64_t seed = 1;
  int max_iterations = 4000;
  int stall_window = 100;
  double stall_improvement = 1e-10;
};

struct SpectralReport {
  double gap = 0;
  double lsi = 0;                  ///< best E(sqrt f, sqrt f) / Ent f found
  std::vector<double> certificate; ///< f* attaining lsi
  std::vector<double> trace;       ///< final ratio of every start, in start order
  int best_start = -1;
  int degenerate_starts = 0;
};

/// Non-convex minimisation of E(sqrt f, sqrt f) / Ent f by gradient descent on
/// log f. Starts: f = 1 +- eps phi_2 (phi_2 the slowest eigenfunction), then
/// `restarts` random log-normal starts. The result is an upper bound on the
/// log-Sobolev constant, not a certified value.
SpectralReport lsi_constant(const Kernel& kern, const LsiOptions& opt = {});

/// Ratio E(sqrt f, sqrt f) / Ent f; +inf when Ent f = 0.
double lsi_ratio(const Kernel& kern, std::span<const double> f);

// --- mixing ----------------------------------------------------------------

/// TV(delta_start P^t, pi) for t = 0..horizon.
std::vector<double> mixing_profile(const Kernel& kern, std::size_t start, std::size_t horizon);

struct MixingTime {
  std::size_t steps = 0;
  std::size_t worst_start = 0;
  bool reached = false;  ///< false when max_horizon ran out
};

/// max over starts of min { t : TV(t) <= eps }.
MixingTime mixing_time(const Kernel& kern, double eps, std::size_t max_horizon = 1000000);

/// (1 - gamma)^t sqrt(1 / min pi).
double mixing_envelope(double gap, double min_pi, std::size_t t);

// --- Poisson ---------------------------------------------------------------

bool irreducible(const Kernel& kern);

struct PoissonSolution {
  std::vector<double> h;
  double residual = 0;  ///< max |(I - P) h - (f - E f)|
};

/// Mean-zero h with (I - P) h = f - E f, via (I - P + 1 pi^T) h = f - E f.
/// Throws std::domain_error for reducible kernels and std::runtime_error when
/// the residual exceeds 1e-10.
PoissonSolution solve_poisson(const Kernel& kern, std::span<const double> f);

// --- induced chain and the decomposition checks ------------------------------

/// Symmetric cross-component swap chain on a subset of I_k(G): each unordered
/// pair {a, b} in different components is picked with probability 2 / n^2 and
/// the swap applies when exactly one is occupied and the result is in `states`.
Kernel build_swap_kernel(const Graph& g, std::vector<Mask> states);

struct InducedChain {
  Kernel kernel;  ///< labels are masks of I_G in the original vertex numbering
  std::vector<Vertex> component;
  std::vector<Rational> marginal;  ///< law of I intersect G under mu_k, by enumeration
  bool marginal_matches = false;
  std::size_t identity_checks = 0;
  bool identity_holds = false;  ///< P(I,J)/P(J,I) = a_{k-|J|}/a_{k-|I|} on G minus the component
};

/// Projection of the modified down-up walk onto one component. Throws
/// std::invalid_argument when `component` is not a component or is the whole
/// graph, std::domain_error when the slice is empty.
InducedChain induced_kernel(const Graph& g, std::span<const Vertex> component, int k);

struct InducedComparison {
  double alpha = 0;
  double stationary_min = 1, stationary_max = 1;  ///< mu_k(I_G) / mu_alpha(I_G)
  double transition_min = 1, transition_max = 1;  ///< P_G / heat-bath off-diagonals
  double max_deviation = 1;                       ///< largest max(r, 1/r)
};

/// Compares the induced chain with hard-core heat-bath dynamics on the
/// component at activity alpha = k / n.
InducedComparison induced_vs_hardcore(const Graph& g, std::span<const Vertex> component, int k);

struct DecompositionRatio {
  double lhs = 0;
  double rhs = 0;
  double ratio = 0;  ///< 0 when both sides vanish
  bool infinite = false;
};

/// (sqrt f_G(I_G) - sqrt f_G(I_G \ u))^2 against
/// E_v E_{I_-G | I_G} (sqrt f(I) - sqrt f(P_uv I))^2, f indexed by space states.
DecompositionRatio decomposition_ratio(const SliceSpace& space, std::span<const Vertex> component,
                                       Mask i_g, Vertex u, std::span<const double> f);

struct SteinCheck {
  double lhs = 0;  ///< E_nu f
  double rhs = 0;  ///< E_mu f + E_nu[(P_nu h - h) - (P_mu h - h)]
  double residual = 0;
  double poisson_residual = 0;
  std::size_t mu_states = 0;
  std::size_t nu_states = 0;
};

/// mu: slice law conditioned on I on G \ u agreeing with I_G; nu: agreement on
/// all of G. Throws std::domain_error when a conditioning event is empty or
/// the mu chain is reducible.
SteinCheck stein_difference_check(const SliceSpace& space, std::span<const Vertex> component,
                                  Mask i_g, Vertex u, std::span<const double> f);

}  // namespace kslice
