// Acceptance gate: one PASS/FAIL line per criterion, exit 1 if any fails.
//
//   acceptance [--corpus DIR] [--bounds FILE] [--only N]

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "acceptance_plan.hpp"
#include "kslice/corpus.hpp"
#include "kslice/count.hpp"
#include "kslice/hardcore.hpp"
#include "kslice/spectral.hpp"
#include "kslice/walks.hpp"
#include "oracle.hpp"

using namespace kslice;
using json = nlohmann::json;

namespace {

// pinned tolerances
constexpr double kKernelTol = 1e-14;
constexpr double kLcltBand = 0.10;
constexpr double kCumulantGrowth = 1.25;
constexpr double kLsiSlack = 1e-6;
constexpr double kCertificateSlack = 1e-9;
constexpr double kPoissonTol = 1e-10;
constexpr double kSteinTol = 1e-9;
constexpr double kSigmas = 3.0;
constexpr double kEnvelopeSlack = 1e-12;
constexpr std::size_t kEnvelopeHorizon = 200;
constexpr std::size_t kRejectionTrials = 10000;
constexpr std::uint64_t kAcceptanceSteps = 20000;

constexpr WalkVariant kVariants[] = {WalkVariant::metropolis, WalkVariant::hdx, WalkVariant::modified};

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double x, int p = 6) {
  std::ostringstream s;
  s << std::setprecision(p) << x;
  return s.str();
}

struct Context {
  std::vector<CorpusEntry> corpus;
  json bounds;
};

// every (graph, k, variant) kernel on the corpus with at least one state
template <class F>
void for_each_corpus_kernel(const Context& cx, F&& f) {
  for (const auto& e : cx.corpus) {
    const auto counts = size_counts(e.graph);
    for (int k = 0; k <= e.graph.n(); ++k) {
      if (counts.at(k) == 0) continue;
      const auto space = enumerate_slice(e.graph, k);
      for (auto v : kVariants) f(e, k, v, space, build_kernel(space, v));
    }
  }
}

std::string label(const CorpusEntry& e, int k, WalkVariant v) {
  return e.name + " k=" + std::to_string(k) + " " + std::string(variant_name(v));
}

oracle::Walk as_oracle(WalkVariant v) {
  switch (v) {
    case WalkVariant::metropolis: return oracle::Walk::metropolis;
    case WalkVariant::hdx: return oracle::Walk::hdx;
    default: return oracle::Walk::modified;
  }
}

Outcome kernel_exactness(const Context& cx) {
  Outcome o;
  std::size_t kernels = 0;
  double row = 0, bal = 0;
  for_each_corpus_kernel(cx, [&](const CorpusEntry& e, int k, WalkVariant v, const SliceSpace& space,
                                 const Kernel& kern) {
    ++kernels;
    const auto c = check_kernel(kern);
    row = std::max(row, c.max_row_error);
    bal = std::max(bal, c.max_balance_error);
    bool ok = c.max_row_error <= kKernelTol && c.max_balance_error <= kKernelTol && c.exact_ok;
    const Rational uniform(1, static_cast<long long>(space.size()));
    for (const auto& p : kern.exact_stationary()) ok = ok && p == uniform;
    // entry by entry against the definition-level kernel
    const auto sl = oracle::slice(e.graph.n(), e.graph.edges(), k);
    const auto P = oracle::walk_kernel(e.graph.n(), e.graph.edges(), sl, as_oracle(v));
    for (std::size_t a = 0; a < sl.size() && ok; ++a) {
      const auto i = *space.index_of(oracle::mask(sl[a]));
      std::vector<Rational> dense(sl.size(), Rational(0));
      const auto r = kern.row(i);
      for (std::size_t t = 0; t < r.size(); ++t) dense[r[t].col] = kern.exact_row(i)[t];
      for (std::size_t b = 0; b < sl.size(); ++b) {
        if (dense[*space.index_of(oracle::mask(sl[b]))] != P[a][b]) ok = false;
      }
    }
    if (!ok && o.pass) {
      o.pass = false;
      o.detail = label(e, k, v) + " fails; ";
    }
  });
  o.detail += std::to_string(kernels) + " kernels, max row error " + fmt(row) + ", max balance error " + fmt(bal);
  return o;
}

Outcome counting_agreement(const Context&) {
  Outcome o;
  std::size_t graphs = 0;
  auto agree = [&](const Graph& g, const std::string& name) {
    ++graphs;
    const auto s = size_counts(g, {}, CountMethod::structured);
    const auto b = size_counts(g, {}, CountMethod::brute_force);
    bool ok = s == b && s.counts() == oracle::counts(g.n(), g.edges());
    for (Vertex u = 0; u < g.n() && ok; ++u) {
      const auto in = size_counts(g, {{u}, {}}), out = size_counts(g, {{}, {u}});
      for (std::size_t j = 0; j < s.size(); ++j) ok = ok && in[j] + out[j] == s[j];
    }
    if (!ok && o.pass) {
      o.pass = false;
      o.detail = name + " disagrees; ";
    }
  };
  for (int n = 1; n <= 22; ++n) {
    agree(path_graph(n), "P" + std::to_string(n));
    if (n >= 3) agree(cycle_graph(n), "C" + std::to_string(n));
  }
  for (int n : {8, 15, 22}) {
    for (std::uint64_t s = 0; s < 8; ++s) agree(random_forest(n, 3, s), "forest n=" + std::to_string(n));
  }
  o.detail += std::to_string(graphs) + " graphs, brute force = structured = enumeration, pins add up";
  return o;
}

Outcome lclt(const Context&) {
  Outcome o;
  std::map<int, double> scaled;
  for (int n : plan::kCycleSizes) {
    const int k = plan::cycle_k(n);
    const auto counts = size_counts(cycle_graph(n));
    if (counts.at(k) != oracle::cycle_count(n, k)) {
      o.pass = false;
      o.detail = "count mismatch at n=" + std::to_string(n) + "; ";
    }
    const HardCoreModel m(counts, solve_activity(counts, k, Real("1e-30")));
    scaled[n] = to_double(slice_probability(m, k)) * std::sqrt(static_cast<double>(n));
  }
  const double ref = scaled.at(plan::kCycleSizes.back());
  for (auto [n, v] : scaled) {
    o.detail += "n=" + std::to_string(n) + ": " + fmt(v) + " ";
    if (n >= 100 && std::abs(v / ref - 1) > kLcltBand) o.pass = false;
  }
  o.detail += "(band +-" + fmt(kLcltBand) + " of n=400)";
  return o;
}

Outcome edgeworth(const Context& cx) {
  Outcome o;
  const auto& b = cx.bounds.at("edgeworth");
  const double bound = b.at("bound").get<double>(), growth = b.at("growth_factor").get<double>();
  std::vector<double> scaled;
  for (int n : plan::kCycleSizes) {
    const int k = plan::cycle_k(n);
    const auto counts = size_counts(cycle_graph(n));
    const HardCoreModel m(counts, solve_activity(counts, k, Real("1e-30")));
    const auto rep = cumulants(m, edgeworth_required_order(2));
    const Real est = edgeworth_estimate(rep, Real(k) - rep.mean, 2);
    const double e = to_double(abs(slice_probability(m, k) - est)) * std::pow(n, 1.5);
    scaled.push_back(e);
    o.detail += "n=" + std::to_string(n) + ": " + fmt(e) + " ";
    if (e > bound) o.pass = false;
  }
  // no growth: later sizes stay within the factor of the smallest
  for (double e : scaled) {
    if (e > growth * scaled.front()) o.pass = false;
  }
  o.detail += "(bound " + fmt(bound) + ", growth <= " + fmt(growth) + "x)";
  return o;
}

Outcome cumulant_stability_check(const Context&) {
  Outcome o;
  std::map<int, double> diff;
  for (int n : {50, 100, 200, 300, 400}) {
    diff[n] = to_double(cumulant_stability(path_graph(n), n / 2, Real("0.5"), 4).max_difference());
    o.detail += "n=" + std::to_string(n) + ": " + fmt(diff[n]) + " ";
  }
  o.pass = diff.at(400) <= kCumulantGrowth * diff.at(50);
  o.detail += "(u = n/2, lambda = 0.5, allowed " + fmt(kCumulantGrowth) + "x)";
  return o;
}

struct SweepRow {
  int n, k;
  std::uint64_t seed;
  double gamma, linf, lambda_max;
  std::size_t tau;
  bool reached;
};

const std::vector<SweepRow>& sweep_rows() {
  static const std::vector<SweepRow> rows = [] {
    std::vector<SweepRow> out;
    for (const auto& inst : plan::sweep()) {
      for (int k : inst.ks) {
        const auto kern = build_kernel(enumerate_slice(inst.graph, k), WalkVariant::hdx);
        const auto norms = independence_norms(influence_matrix(inst.graph, k));
        const auto t = mixing_time(kern, 0.25);
        out.push_back({inst.n, k, inst.seed, spectral_gap(kern), norms.linf, norms.lambda_max, t.steps, t.reached});
      }
    }
    return out;
  }();
  return rows;
}

Outcome linf_sweep(const Context& cx) {
  Outcome o;
  const double bound = cx.bounds.at("linf").at("bound").get<double>();
  double worst = 0;
  std::size_t graphs = plan::sweep().size();
  for (const auto& r : sweep_rows()) {
    worst = std::max(worst, r.linf);
    if (r.linf > bound || r.lambda_max > r.linf + 1e-9) o.pass = false;
  }
  o.detail = std::to_string(graphs) + " graphs, " + std::to_string(sweep_rows().size()) + " (graph, k); max linf " +
             fmt(worst, 10) + " (bound " + fmt(bound, 10) + "), lambda_max <= linf everywhere";
  if (!o.pass) o.detail += " [violated]";
  return o;
}

Outcome gap_sweep(const Context& cx) {
  Outcome o;
  const double floor = cx.bounds.at("gamma_k").at("floor").get<double>();
  double worst = 1e300;
  for (const auto& r : sweep_rows()) worst = std::min(worst, r.gamma * r.k);
  o.pass = floor > 0 && worst >= floor;
  o.detail = "min gamma*k " + fmt(worst, 10) + " (floor " + fmt(floor, 10) + ")";
  return o;
}

Outcome lsi_consistency(const Context& cx) {
  Outcome o;
  std::size_t kernels = 0;
  double worst_excess = -1e300;
  for_each_corpus_kernel(cx, [&](const CorpusEntry& e, int k, WalkVariant v, const SliceSpace&, const Kernel& kern) {
    if (kern.size() < 2) return;
    ++kernels;
    const auto rep = lsi_constant(kern);
    std::vector<double> sq;
    for (double x : rep.certificate) sq.push_back(std::sqrt(x));
    const double energy = dirichlet_form(kern, sq, sq);
    const bool ok = rep.lsi <= rep.gap / 2 + kLsiSlack &&
                    rep.lsi * entropy(kern, rep.certificate) <= energy * (1 + kCertificateSlack);
    worst_excess = std::max(worst_excess, rep.lsi - rep.gap / 2);
    if (!ok && o.pass) {
      o.pass = false;
      o.detail = label(e, k, v) + ": lsi " + fmt(rep.lsi, 10) + " gap " + fmt(rep.gap, 10) + "; ";
    }
  });
  o.detail += std::to_string(kernels) + " kernels, max (lsi - gap/2) " + fmt(worst_excess);
  return o;
}

Outcome induced_exactness(const Context& cx) {
  Outcome o;
  std::size_t chains = 0, graphs = 0;
  for (const auto& e : cx.corpus) {
    const auto dec = components(e.graph);
    if (dec.count() < 2) continue;
    ++graphs;
    const auto counts = size_counts(e.graph);
    for (const auto& comp : dec.components) {
      const Mask gm = members_mask(comp);
      for (int k = 0; k <= e.graph.n(); ++k) {
        if (counts.at(k) == 0) continue;
        ++chains;
        const auto ch = induced_kernel(e.graph, comp, k);
        bool ok = ch.marginal_matches && ch.identity_holds && check_kernel(ch.kernel).exact_ok;
        const auto sl = oracle::slice(e.graph.n(), e.graph.edges(), k);
        for (std::size_t i = 0; i < ch.kernel.size(); ++i) {
          long long hits = 0;
          for (auto& x : sl) hits += (oracle::mask(x) & gm) == ch.kernel.labels()[i];
          ok = ok && ch.kernel.exact_stationary()[i] == Rational(hits, static_cast<long long>(sl.size()));
        }
        if (!ok && o.pass) {
          o.pass = false;
          o.detail = e.name + " component " + std::to_string(comp.front()) + " k=" + std::to_string(k) + "; ";
        }
      }
    }
  }
  o.detail += std::to_string(graphs) + " multi-component graphs, " + std::to_string(chains) + " induced chains";
  return o;
}

Outcome stein_poisson(const Context& cx) {
  Outcome o;
  Rng rng(20240601, 0x61636365);  // "acce"
  double worst_poisson = 0, worst_stein = 0;
  std::size_t solves = 0, steins = 0, skipped = 0;
  for_each_corpus_kernel(cx, [&](const CorpusEntry&, int, WalkVariant, const SliceSpace&, const Kernel& kern) {
    if (kern.size() < 2 || !irreducible(kern)) return;
    std::vector<double> f(kern.size());
    for (auto& x : f) x = rng.uniform();
    worst_poisson = std::max(worst_poisson, solve_poisson(kern, f).residual);
    ++solves;
  });
  for (const auto& e : cx.corpus) {
    const auto dec = components(e.graph);
    if (dec.count() < 2) continue;
    const auto counts = size_counts(e.graph);
    for (const auto& comp : dec.components) {
      const Mask gm = members_mask(comp);
      for (int k = 1; k <= e.graph.n(); ++k) {
        if (counts.at(k) == 0) continue;
        const auto space = enumerate_slice(e.graph, k);
        std::set<Mask> seen;
        for (Mask x : space.states()) {
          const Mask ig = x & gm;
          if (!ig || !seen.insert(ig).second) continue;
          std::vector<double> f(space.size());
          for (auto& v : f) v = rng.uniform();
          try {
            const auto s = stein_difference_check(space, comp, ig, std::countr_zero(ig), f);
            worst_stein = std::max(worst_stein, s.residual);
            worst_poisson = std::max(worst_poisson, s.poisson_residual);
            ++steins;
          } catch (const std::domain_error&) {
            ++skipped;  // conditioned chain not ergodic
          }
        }
      }
    }
  }
  o.pass = worst_poisson <= kPoissonTol && worst_stein <= kSteinTol && steins > 0;
  o.detail = std::to_string(solves) + " Poisson solves, max residual " + fmt(worst_poisson) + "; " +
             std::to_string(steins) + " Stein checks (" + std::to_string(skipped) +
             " not applicable), max residual " + fmt(worst_stein);
  return o;
}

Outcome sampler_statistics(const Context& cx) {
  Outcome o;
  struct Case {
    std::string name;
    Graph g;
    double lambda;
    int k;
  };
  std::vector<Case> cases{{"P3", path_graph(3), 1.0, 1},
                          {"random12 seed 1", random_bounded_degree(12, 3, 1), 1.0, 3},
                          {"random12 seed 2", random_bounded_degree(12, 3, 2), 0.5, 2}};
  for (const auto& c : cases) {
    // 1/P(|I| = k) by enumeration
    double z = 0, zk = 0;
    for (const auto& s : oracle::all_independent(c.g.n(), c.g.edges())) {
      const double w = std::pow(c.lambda, static_cast<double>(s.size()));
      z += w;
      if (static_cast<int>(s.size()) == c.k) zk += w;
    }
    const double p = zk / z, expect = 1 / p;
    const auto att = rejection_attempts(c.g, c.lambda, c.k, 99, kRejectionTrials);
    double mean = 0;
    for (auto a : att) mean += static_cast<double>(a);
    mean /= static_cast<double>(att.size());
    const double sigma = std::sqrt(1 - p) / p / std::sqrt(static_cast<double>(att.size()));
    const bool ok = std::abs(mean - expect) <= kSigmas * sigma;
    if (!ok) o.pass = false;
    o.detail += c.name + ": " + fmt(mean, 5) + " vs " + fmt(expect, 5) + " (sigma " + fmt(sigma, 3) + "); ";
  }
  // Metropolis acceptance wherever the size condition holds
  std::size_t checked = 0;
  double lowest = 1;
  auto accept = [&](const Graph& g) {
    for (int k = 1; 17 * (g.delta() + 1) * k <= 16 * g.n(); ++k) {
      if (size_counts(g).at(k) == 0) continue;
      ChainConfig cfg;
      cfg.steps = kAcceptanceSteps;
      cfg.seed = 7 + checked;
      const auto est = acceptance_rate(g, k, cfg);
      ++checked;
      lowest = std::min(lowest, est.rate);
      if (!est.precondition || !est.meets_bound) o.pass = false;
    }
  };
  for (const auto& e : cx.corpus) accept(e.graph);
  for (const auto& inst : plan::sweep()) accept(inst.graph);
  o.detail += std::to_string(checked) + " acceptance runs, lowest rate " + fmt(lowest, 4) + " (>= 1/17 - 3 sigma)";
  return o;
}

Outcome mixing_envelope_check(const Context& cx) {
  Outcome o;
  std::size_t kernels = 0;
  for_each_corpus_kernel(cx, [&](const CorpusEntry& e, int k, WalkVariant v, const SliceSpace&, const Kernel& kern) {
    ++kernels;
    const double gap = spectral_gap(kern);
    const double min_pi = *std::min_element(kern.stationary().begin(), kern.stationary().end());
    for (std::size_t s = 0; s < kern.size(); ++s) {
      const auto tv = mixing_profile(kern, s, kEnvelopeHorizon);
      for (std::size_t t = 0; t < tv.size(); ++t) {
        if (tv[t] > mixing_envelope(gap, min_pi, t) + kEnvelopeSlack && o.pass) {
          o.pass = false;
          o.detail = label(e, k, v) + " start " + std::to_string(s) + " t=" + std::to_string(t) + "; ";
        }
      }
    }
  });
  const double c = cx.bounds.at("tau_mix").at("constant").get<double>();
  double worst = 0;
  for (const auto& r : sweep_rows()) {
    const double ratio = r.tau / (r.k * std::log(4.0 * r.n));
    worst = std::max(worst, ratio);
    if (!r.reached || ratio > c) o.pass = false;
  }
  o.detail += std::to_string(kernels) + " kernels under the envelope for t <= " + std::to_string(kEnvelopeHorizon) +
              "; max tau/(k log 4n) " + fmt(worst, 10) + " (C " + fmt(c, 10) + ")";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::string corpus_dir = KSLICE_TEST_CORPUS;
  std::string bounds_path = std::string(KSLICE_TEST_FIXTURES) + "/acceptance_bounds.json";
  int only = 0;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string a = argv[i];
    if (a == "--corpus") corpus_dir = argv[i + 1];
    else if (a == "--bounds") bounds_path = argv[i + 1];
    else if (a == "--only") only = std::stoi(argv[i + 1]);
  }
  Context cx;
  try {
    cx.corpus = load_corpus(corpus_dir);
    std::ifstream in(bounds_path);
    if (!in) throw std::invalid_argument("cannot read " + bounds_path);
    cx.bounds = json::parse(in);
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 2;
  }

  const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria{
      {"kernel exactness", kernel_exactness},
      {"counting oracle agreement", counting_agreement},
      {"local CLT scaling on cycles", lclt},
      {"Edgeworth order-2 accuracy", edgeworth},
      {"cumulant stability on paths", cumulant_stability_check},
      {"l-infinity independence sweep", linf_sweep},
      {"spectral gap times k floor", gap_sweep},
      {"log-Sobolev consistency", lsi_consistency},
      {"induced chain exactness", induced_exactness},
      {"Poisson and Stein residuals", stein_poisson},
      {"sampler statistics", sampler_statistics},
      {"mixing envelope and tau_mix", mixing_envelope_check},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second(cx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << std::setw(2) << i + 1 << " " << criteria[i].first
              << " [" << fmt(secs, 3) << "s]: " << o.detail << std::endl;
  }
  std::cout << (failed ? "FAIL" : "PASS") << " acceptance: " << failed << " of "
            << (only ? 1 : criteria.size()) << " criteria failed" << std::endl;
  return failed ? 1 : 0;
}
