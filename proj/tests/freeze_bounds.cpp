// Oracle pre-run: computes the regression bounds the acceptance run checks
// against, using only the naive code in oracle.hpp (closed-form counts,
// dense kernels, enumeration) and writes them as JSON.
//
//   freeze_bounds [out.json]

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "acceptance_plan.hpp"
#include "oracle.hpp"

using json = nlohmann::ordered_json;
using F = boost::multiprecision::cpp_dec_float_50;

namespace {

// relative headroom on the frozen values
constexpr double kEdgeworthHeadroom = 0.05;
constexpr double kExactHeadroom = 1e-9;

F to_f(const oracle::BigInt& x) { return F(x.str()); }

struct Law {
  F mean, k2, k3, k4;
};

Law law(const std::vector<F>& a, const F& l) {
  std::vector<F> w(a.size());
  F z = 0, p = 1;
  for (std::size_t j = 0; j < a.size(); ++j) {
    w[j] = a[j] * p;
    z += w[j];
    p *= l;
  }
  F m = 0;
  for (std::size_t j = 0; j < a.size(); ++j) m += w[j] * j;
  m /= z;
  F c2 = 0, c3 = 0, c4 = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const F d = F(static_cast<int>(j)) - m;
    c2 += w[j] * d * d;
    c3 += w[j] * d * d * d;
    c4 += w[j] * d * d * d * d;
  }
  c2 /= z;
  c3 /= z;
  c4 /= z;
  return {m, c2, c3, c4 - 3 * c2 * c2};
}

double edgeworth_scaled_error(int n) {
  const int k = plan::cycle_k(n);
  std::vector<F> a;
  for (int j = 0; j <= n / 2; ++j) a.push_back(to_f(oracle::cycle_count(n, j)));
  F lo = F("1e-6"), hi = F(1000);
  for (int it = 0; it < 400; ++it) {
    const F mid = sqrt(lo * hi);
    (law(a, mid).mean < k ? lo : hi) = mid;
  }
  const F l = sqrt(lo * hi);
  const Law s = law(a, l);
  F z = 0, p = 1;
  for (auto& x : a) {
    z += x * p;
    p *= l;
  }
  const F exact = a[k] * pow(l, k) / z;
  const F sigma = sqrt(s.k2);
  const F x = (F(k) - s.mean) / sigma;
  const F b3 = s.k3 / (6 * pow(sigma, 3)), b4 = s.k4 / (24 * pow(sigma, 4));
  const F h3 = x * x * x - 3 * x, h4 = pow(x, 4) - 6 * x * x + 3, h6 = pow(x, 6) - 15 * pow(x, 4) + 45 * x * x - 15;
  const F pi = boost::math::constants::pi<F>();
  const F g = exp(-x * x / 2) / (sqrt(2 * pi) * sigma);
  const F est = g * (1 + b3 * h3 + b4 * h4 + b3 * b3 / 2 * h6);
  return static_cast<double>(abs(exact - est)) * std::pow(n, 1.5);
}

// max absolute row sum of the influence matrix, rows with a pinned vertex skipped
double linf(const kslice::Graph& g, int k) {
  const auto sl = oracle::slice(g.n(), g.edges(), k);
  double best = 0;
  for (int i = 0; i < g.n(); ++i) {
    long long in = 0;
    for (auto& s : sl) in += s.count(i);
    const long long out = static_cast<long long>(sl.size()) - in;
    if (in == 0 || out == 0) continue;
    double row = 0;
    for (int j = 0; j < g.n(); ++j) {
      if (j == i) continue;
      long long both = 0, only_j = 0;
      for (auto& s : sl) {
        both += s.count(i) && s.count(j);
        only_j += !s.count(i) && s.count(j);
      }
      row += std::abs(static_cast<double>(both) / in - static_cast<double>(only_j) / out);
    }
    best = std::max(best, row);
  }
  return best;
}

// worst-start first time with TV <= eps, by dense matrix powers
int tau(const Eigen::MatrixXd& P, double eps, int cap = 100000) {
  const auto N = P.rows();
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(N, N);
  for (int t = 0; t <= cap; ++t) {
    double worst = 0;
    for (Eigen::Index s = 0; s < N; ++s) {
      double tv = 0;
      for (Eigen::Index y = 0; y < N; ++y) tv += std::abs(M(s, y) - 1.0 / N);
      worst = std::max(worst, tv / 2);
    }
    if (worst <= eps) return t;
    M = M * P;
  }
  return -1;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_path = argc > 1 ? argv[1] : std::string(KSLICE_TEST_FIXTURES) + "/acceptance_bounds.json";

  json ew = json::array();
  double ew_max = 0;
  for (int n : plan::kCycleSizes) {
    const double e = edgeworth_scaled_error(n);
    ew_max = std::max(ew_max, e);
    ew.push_back({{"n", n}, {"k", plan::cycle_k(n)}, {"scaled_error", e}});
  }

  double linf_max = 0, gamma_k_min = 1e300, tau_c = 0;
  json rows = json::array();
  for (const auto& inst : plan::sweep()) {
    for (int k : inst.ks) {
      const auto sl = oracle::slice(inst.n, inst.graph.edges(), k);
      const auto P = oracle::to_dense(oracle::walk_kernel(inst.n, inst.graph.edges(), sl, oracle::Walk::hdx));
      const std::vector<double> pi(sl.size(), 1.0 / sl.size());
      const double gap = oracle::gap(P, pi), l = linf(inst.graph, k);
      const int t = tau(P, 0.25);
      const double c = t / (k * std::log(4.0 * inst.n));
      linf_max = std::max(linf_max, l);
      gamma_k_min = std::min(gamma_k_min, gap * k);
      tau_c = std::max(tau_c, c);
      rows.push_back({{"n", inst.n}, {"seed", inst.seed}, {"k", k}, {"states", sl.size()}, {"gamma", gap},
                      {"linf", l}, {"tau", t}});
    }
  }

  json doc = {
      {"note", "frozen from the naive oracle pre-run (tests/freeze_bounds.cpp); regenerate with that tool"},
      {"edgeworth",
       {{"order", 2}, {"headroom", kEdgeworthHeadroom}, {"oracle_max", ew_max},
        {"bound", ew_max * (1 + kEdgeworthHeadroom)}, {"growth_factor", 1.25}, {"per_n", ew}}},
      {"linf", {{"oracle_max", linf_max}, {"bound", linf_max * (1 + kExactHeadroom)}}},
      {"gamma_k", {{"oracle_min", gamma_k_min}, {"floor", gamma_k_min * (1 - kExactHeadroom)}}},
      {"tau_mix",
       {{"eps", 0.25}, {"oracle_max_ratio", tau_c}, {"constant", tau_c * (1 + kExactHeadroom)}}},
      {"sweep", rows},
  };
  std::ofstream(out_path) << doc.dump(2) << '\n';
  std::cout << "wrote " << out_path << ": edgeworth " << ew_max << ", linf " << linf_max << ", gamma*k "
            << gamma_k_min << ", tau C " << tau_c << '\n';
  return 0;
}
