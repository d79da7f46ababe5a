#include "kslice/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "kslice/rng.hpp"

namespace kslice {

std::vector<Vertex> InfluenceMatrix::flagged_rows() const {
  std::vector<Vertex> out;
  for (int i = 0; i < n(); ++i) {
    if (flagged[i]) out.push_back(i);
  }
  return out;
}

InfluenceMatrix influence_matrix(const Graph& g, int k) {
  const auto space = enumerate_slice(g, k);
  if (space.empty()) throw std::domain_error("empty slice: no independent set of size " + std::to_string(k));
  const int n = g.n();
  const auto total = static_cast<long long>(space.size());
  std::vector<long long> single(n, 0);
  std::vector<long long> pair(static_cast<std::size_t>(n) * n, 0);
  for (Mask x : space.states()) {
    const auto members = mask_members(x);
    for (Vertex i : members) {
      ++single[i];
      for (Vertex j : members) pair[static_cast<std::size_t>(i) * n + j] += (i != j);
    }
  }
  InfluenceMatrix m;
  m.values = Eigen::MatrixXd::Zero(n, n);
  m.exact.assign(n, std::vector<Rational>(n, Rational(0)));
  m.flagged.assign(n, false);
  for (int i = 0; i < n; ++i) {
    m.marginal.emplace_back(single[i], total);
    m.flagged[i] = single[i] == 0 || single[i] == total;
  }
  for (int i = 0; i < n; ++i) {
    if (m.flagged[i]) continue;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const long long both = pair[static_cast<std::size_t>(i) * n + j];
      const Rational value = Rational(both, single[i]) - Rational(single[j] - both, total - single[i]);
      m.exact[i][j] = value;
      m.values(i, j) = to_double(value);
    }
  }
  return m;
}

IndependenceNorms independence_norms(const Eigen::MatrixXd& m) {
  IndependenceNorms out;
  if (m.rows() != m.cols()) throw std::invalid_argument("influence matrix must be square");
  if (m.rows() == 0) return out;
  out.linf = m.cwiseAbs().rowwise().sum().maxCoeff();
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, true);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolve failed");
  const auto& ev = es.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i) {
    if (ev[i].real() > ev[best].real()) best = i;
  }
  out.lambda_max = ev[best].real();
  const Eigen::VectorXcd x = es.eigenvectors().col(best);
  out.residual = (m.cast<std::complex<double>>() * x - ev[best] * x).cwiseAbs().maxCoeff();
  if (out.lambda_max > out.linf + 1e-8) {
    throw std::runtime_error("lambda_max " + decimal(out.lambda_max) + " exceeds row norm " +
                             decimal(out.linf) + " (residual " + decimal(out.residual) + ")");
  }
  return out;
}

IndependenceNorms independence_norms(const InfluenceMatrix& m) {
  std::vector<Eigen::Index> keep;
  for (int i = 0; i < m.n(); ++i) {
    if (!m.flagged[i]) keep.push_back(i);
  }
  const auto r = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd sub(r, r);
  for (Eigen::Index a = 0; a < r; ++a) {
    for (Eigen::Index b = 0; b < r; ++b) sub(a, b) = m.values(keep[a], keep[b]);
  }
  auto out = independence_norms(sub);
  out.flagged = static_cast<std::size_t>(m.n()) - keep.size();
  return out;
}

namespace {

void check_size(const Kernel& kern, std::span<const double> f) {
  if (f.size() != kern.size()) {
    throw std::invalid_argument("function has " + std::to_string(f.size()) + " values; kernel has " +
                                std::to_string(kern.size()) + " states");
  }
}

// (1 + d) log(1 + d) - d, series near d = 0
double entropy_series(double d) {
  double term = d * d, sum = 0;
  for (int j = 2; j < 12; ++j) {
    sum += term / (j * (j - 1.0)) * ((j % 2) ? -1.0 : 1.0);
    term *= d;
  }
  return sum;
}

// r log r - r + 1 without cancellation near r = 1
double entropy_density(double r) {
  if (r == 0) return 1.0;
  const double d = r - 1;
  if (std::abs(d) < 1e-3) return entropy_series(d);
  return r * std::log(r) - d;
}

// same quantity at r = exp(s)
double entropy_density_log(double s) {
  const double d = std::expm1(s);
  if (std::abs(d) < 1e-3) return entropy_series(d);
  return std::exp(s) * s - d;
}

}  // namespace

double expectation(const Kernel& kern, std::span<const double> f) {
  check_size(kern, f);
  double s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) s += kern.stationary()[i] * f[i];
  return s;
}

double variance(const Kernel& kern, std::span<const double> f) {
  const double m = expectation(kern, f);
  double s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) s += kern.stationary()[i] * (f[i] - m) * (f[i] - m);
  return s;
}

double entropy(const Kernel& kern, std::span<const double> f) {
  for (double v : f) {
    if (!(v >= 0) || !std::isfinite(v)) throw std::invalid_argument("entropy needs finite f >= 0");
  }
  const double m = expectation(kern, f);
  if (m == 0) return 0;
  double s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) s += kern.stationary()[i] * entropy_density(f[i] / m);
  return m * s;
}

double dirichlet_form(const Kernel& kern, std::span<const double> f, std::span<const double> g) {
  check_size(kern, f);
  check_size(kern, g);
  double s = 0;
  for (std::size_t x = 0; x < kern.size(); ++x) {
    const double px = kern.stationary()[x];
    for (const auto& e : kern.row(x)) s += px * e.p * (f[x] - f[e.col]) * (g[x] - g[e.col]);
  }
  return 0.5 * s;
}

Spectrum symmetrized_spectrum(const Kernel& kern) {
  const auto n = static_cast<Eigen::Index>(kern.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  const auto& pi = kern.stationary();
  for (std::size_t x = 0; x < kern.size(); ++x) {
    for (const auto& e : kern.row(x)) {
      s(static_cast<Eigen::Index>(x), e.col) = std::sqrt(pi[x] / pi[e.col]) * e.p;
    }
  }
  s = 0.5 * (s + s.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolve failed");
  Spectrum out;
  out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  out.eigenvectors = es.eigenvectors();
  return out;
}

double spectral_gap(const Kernel& kern) {
  if (kern.size() <= 1) return 1.0;
  const auto sp = symmetrized_spectrum(kern);
  const double gap = 1.0 - sp.eigenvalues[sp.eigenvalues.size() - 2];
  return std::clamp(gap, 0.0, 2.0);
}

namespace {

// E(sqrt f, sqrt f) / Ent f in log coordinates f = exp(s), with gradient.
class LsiObjective {
 public:
  explicit LsiObjective(const Kernel& kern) : pi_(kern.stationary()) {
    for (std::size_t x = 0; x < kern.size(); ++x) {
      for (const auto& e : kern.row(x)) {
        if (e.col <= x) continue;
        const double w = 0.5 * (pi_[x] * e.p + pi_[e.col] * kern.at(e.col, x));
        if (w > 0) edges_.push_back({static_cast<std::uint32_t>(x), e.col, w});
      }
    }
  }

  static constexpr double kMinSpread = 2e-4;

  // Shifts s so that E_pi exp(s) = 1 and returns the ratio (+inf if Ent = 0).
  double value(std::vector<double>& s, std::vector<double>* grad) const {
    normalize(s);
    // too flat: Ent and E are both O(spread^2) and round-off takes over
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    if (*hi - *lo < kMinSpread) return std::numeric_limits<double>::infinity();
    double num = 0;
    if (grad) grad->assign(s.size(), 0.0);
    for (const auto& e : edges_) {
      const double gx = std::exp(0.5 * s[e.x]);
      const double gy = std::exp(0.5 * s[e.y]);
      const double d = gy * std::expm1(0.5 * (s[e.x] - s[e.y]));
      num += e.w * d * d;
      if (grad) {
        (*grad)[e.x] += gx * e.w * d;
        (*grad)[e.y] -= gy * e.w * d;
      }
    }
    double den = 0;
    for (std::size_t i = 0; i < s.size(); ++i) den += pi_[i] * entropy_density_log(s[i]);
    if (!(den > 0) || !std::isfinite(den) || !std::isfinite(num)) {
      return std::numeric_limits<double>::infinity();
    }
    const double ratio = num / den;
    if (grad) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double dden = pi_[i] * std::exp(s[i]) * s[i];
        (*grad)[i] = ((*grad)[i] - ratio * dden) / den;
      }
    }
    return ratio;
  }

 private:
  struct Edge {
    std::uint32_t x, y;
    double w;
  };

  void normalize(std::vector<double>& s) const {
    const double top = *std::max_element(s.begin(), s.end());
    double m = 0;
    for (std::size_t i = 0; i < s.size(); ++i) m += pi_[i] * std::exp(s[i] - top);
    const double shift = top + std::log(m);
    for (auto& v : s) v -= shift;
  }

  const std::vector<double>& pi_;
  std::vector<Edge> edges_;
};

struct DescentResult {
  double ratio;
  std::vector<double> s;
};

DescentResult descend(const LsiObjective& obj, std::vector<double> s, const LsiOptions& opt) {
  std::vector<double> grad, trial_grad, trial;
  double r = obj.value(s, &grad);
  if (!std::isfinite(r)) return {r, s};
  double gmax = 0;
  for (double g : grad) gmax = std::max(gmax, std::abs(g));
  double step = gmax > 0 ? 0.1 / gmax : 1.0;
  std::vector<double> history{r};
  for (int it = 0; it < opt.max_iterations; ++it) {
    bool moved = false;
    while (step > 1e-300) {
      trial = s;
      for (std::size_t i = 0; i < s.size(); ++i) trial[i] -= step * grad[i];
      const double rt = obj.value(trial, &trial_grad);
      if (rt < r) {
        s.swap(trial);
        grad.swap(trial_grad);
        r = rt;
        step *= 1.5;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    history.push_back(r);
    const auto w = static_cast<std::size_t>(opt.stall_window);
    if (history.size() > w && history[history.size() - 1 - w] - r < opt.stall_improvement) break;
  }
  return {r, s};
}

}  // namespace

double lsi_ratio(const Kernel& kern, std::span<const double> f) {
  std::vector<double> sq(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) sq[i] = std::sqrt(f[i]);
  const double ent = entropy(kern, f);
  if (ent <= 0) return std::numeric_limits<double>::infinity();
  return dirichlet_form(kern, sq, sq) / ent;
}

SpectralReport lsi_constant(const Kernel& kern, const LsiOptions& opt) {
  const std::size_t n = kern.size();
  if (n < 2) throw std::invalid_argument("log-Sobolev constant needs at least two states");
  if (opt.restarts < 0) throw std::invalid_argument("restarts must be non-negative");
  SpectralReport rep;
  const auto sp = symmetrized_spectrum(kern);
  rep.gap = std::clamp(1.0 - sp.eigenvalues[n - 2], 0.0, 2.0);
  const LsiObjective obj(kern);

  std::vector<std::vector<double>> starts;
  {
    std::vector<double> phi(n);
    double top = 0;
    for (std::size_t i = 0; i < n; ++i) {
      phi[i] = sp.eigenvectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - 2)) /
               std::sqrt(kern.stationary()[i]);
      top = std::max(top, std::abs(phi[i]));
    }
    for (double sign : {1.0, -1.0}) {
      std::vector<double> s(n);
      for (std::size_t i = 0; i < n; ++i) s[i] = std::log1p(sign * 1e-3 * phi[i] / top);
      starts.push_back(std::move(s));
    }
  }
  Rng rng(opt.seed, 0x6c7369);  // "lsi"
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scales[] = {0.5, 1.0, 2.0, 4.0};
  for (int r = 0; r < opt.restarts; ++r) {
    std::vector<double> s(n);
    if (r % 5 == 4) {
      // near point mass on one state
      s.assign(n, 0.0);
      s[rng.below(n)] = 3.0 + 3.0 * rng.uniform();
    } else {
      const double scale = scales[r % 4];
      for (auto& v : s) v = scale * normal(rng);
    }
    starts.push_back(std::move(s));
  }

  rep.lsi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < starts.size(); ++i) {
    auto res = descend(obj, starts[i], opt);
    rep.trace.push_back(res.ratio);
    if (!std::isfinite(res.ratio)) {
      ++rep.degenerate_starts;
      continue;
    }
    if (res.ratio < rep.lsi) {
      rep.lsi = res.ratio;
      rep.best_start = static_cast<int>(i);
      rep.certificate.resize(n);
      for (std::size_t x = 0; x < n; ++x) rep.certificate[x] = std::exp(res.s[x]);
    }
  }
  if (rep.best_start < 0) throw std::runtime_error("every start collapsed to a constant function");
  // report the ratio of the certificate as stored, so callers can recheck it
  const double stored = lsi_ratio(kern, rep.certificate);
  if (std::isfinite(stored)) rep.lsi = stored;
  rep.lsi = std::max(rep.lsi, 0.0);
  return rep;
}

std::vector<double> mixing_profile(const Kernel& kern, std::size_t start, std::size_t horizon) {
  if (start >= kern.size()) throw std::out_of_range("start state out of range");
  const auto& pi = kern.stationary();
  std::vector<double> nu(kern.size(), 0.0);
  nu[start] = 1.0;
  std::vector<double> tv;
  tv.reserve(horizon + 1);
  for (std::size_t t = 0;; ++t) {
    double d = 0;
    for (std::size_t i = 0; i < nu.size(); ++i) d += std::abs(nu[i] - pi[i]);
    tv.push_back(0.5 * d);
    if (t == horizon) break;
    nu = kern.apply_left(nu);
  }
  return tv;
}

MixingTime mixing_time(const Kernel& kern, double eps, std::size_t max_horizon) {
  if (!(eps > 0)) throw std::invalid_argument("epsilon must be positive");
  MixingTime out;
  out.reached = true;
  if (!irreducible(kern)) {
    out.reached = false;
    out.steps = max_horizon;
    return out;
  }
  const auto& pi = kern.stationary();
  for (std::size_t start = 0; start < kern.size(); ++start) {
    std::vector<double> nu(kern.size(), 0.0);
    nu[start] = 1.0;
    std::size_t t = 0;
    for (;; ++t) {
      double d = 0;
      for (std::size_t i = 0; i < nu.size(); ++i) d += std::abs(nu[i] - pi[i]);
      if (0.5 * d <= eps) break;
      if (t == max_horizon) {
        out.reached = false;
        break;
      }
      nu = kern.apply_left(nu);
    }
    if (start == 0 || t > out.steps) {
      out.steps = t;
      out.worst_start = start;
    }
  }
  return out;
}

double mixing_envelope(double gap, double min_pi, std::size_t t) {
  return std::pow(std::abs(1.0 - gap), static_cast<double>(t)) * std::sqrt(1.0 / min_pi);
}

bool irreducible(const Kernel& kern) {
  const std::size_t n = kern.size();
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = 1;
  std::size_t count = 1;
  while (!q.empty()) {
    const auto x = q.front();
    q.pop();
    for (const auto& e : kern.row(x)) {
      if (e.p > 0 && !seen[e.col]) {
        seen[e.col] = 1;
        ++count;
        q.push(e.col);
      }
    }
  }
  return count == n;
}

PoissonSolution solve_poisson(const Kernel& kern, std::span<const double> f) {
  check_size(kern, f);
  if (!irreducible(kern)) throw std::domain_error("kernel is not irreducible; Poisson equation is singular");
  const auto n = static_cast<Eigen::Index>(kern.size());
  const auto& pi = kern.stationary();
  const double mean = expectation(kern, f);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) rhs[i] = f[i] - mean;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - kern.dense();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) += pi[j];
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd h = lu.solve(rhs);

  auto residual = [&](const Eigen::VectorXd& v) {
    std::vector<double> hv(v.data(), v.data() + n);
    const auto ph = kern.apply(hv);
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = rhs[i] - (hv[i] - ph[i]);
    return r;
  };
  Eigen::VectorXd r = residual(h);
  // one round of refinement
  h += lu.solve(r);
  double m = 0;
  for (Eigen::Index i = 0; i < n; ++i) m += pi[i] * h[i];
  h.array() -= m;
  r = residual(h);

  PoissonSolution out;
  out.h.assign(h.data(), h.data() + n);
  out.residual = n ? r.cwiseAbs().maxCoeff() : 0.0;
  if (out.residual > 1e-10) {
    throw std::runtime_error("Poisson residual " + decimal(out.residual) + " exceeds 1e-10");
  }
  return out;
}

}  // namespace kslice
