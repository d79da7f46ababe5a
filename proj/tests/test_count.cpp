#include <doctest.h>

#include <cmath>

#include "kslice/count.hpp"
#include "kslice/hardcore.hpp"
#include "oracle.hpp"

using namespace kslice;

namespace {

SizeCountVector vec(std::initializer_list<int> xs) {
  std::vector<BigInt> v;
  for (int x : xs) v.emplace_back(x);
  return SizeCountVector(v);
}

Graph two_triangles() {
  const std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
  return Graph(6, e);
}

}  // namespace

TEST_CASE("size_counts examples") {
  CHECK(size_counts(path_graph(3)) == vec({1, 3, 1, 0}));
  CHECK(size_counts(complete_graph(3)) == vec({1, 3, 0, 0}));
  CHECK(size_counts(cycle_graph(5)) == vec({1, 5, 5, 0, 0, 0}));
  CHECK(size_counts(empty_graph(4)) == vec({1, 4, 6, 4, 1}));
  CHECK(size_counts(empty_graph(0)) == vec({1}));
}

TEST_CASE("count vectors agree with subset enumeration") {
  std::vector<Graph> gs{two_triangles(), complete_graph(5), cycle_graph(9)};
  for (std::uint64_t s = 1; s <= 8; ++s) gs.push_back(random_bounded_degree(13, 4, s, 0.8));
  for (const auto& g : gs) {
    const auto want = oracle::counts(g.n(), g.edges());
    CHECK(size_counts(g).counts() == want);
    CHECK(size_counts(g, {}, CountMethod::brute_force).counts() == want);
    const auto c = size_counts(g);
    CHECK(c[0] == 1);
    CHECK(c[1] == g.n());
    BigInt total = 0;
    for (auto& x : want) total += x;
    CHECK(c.total() == total);
    for (std::size_t j = c.independence_number() + 1; j < c.size(); ++j) CHECK(c[j] == 0);
  }
}

TEST_CASE("structured DP against closed forms and brute force") {
  for (int n = 1; n <= 22; ++n) {
    const auto p = size_counts(path_graph(n), {}, CountMethod::structured);
    for (int k = 0; k <= n; ++k) CHECK(p.at(k) == oracle::path_count(n, k));
    CHECK(p == size_counts(path_graph(n), {}, CountMethod::brute_force));
    if (n >= 3) {
      const auto c = size_counts(cycle_graph(n), {}, CountMethod::structured);
      for (int k = 0; k <= n; ++k) CHECK(c.at(k) == oracle::cycle_count(n, k));
      CHECK(c == size_counts(cycle_graph(n), {}, CountMethod::brute_force));
    }
  }
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Graph f = random_forest(22, 3, s);
    CHECK(structured_countable(f));
    CHECK(size_counts(f, {}, CountMethod::structured) == size_counts(f, {}, CountMethod::brute_force));
  }
  // large cycle: closed form only
  const auto big = size_counts(cycle_graph(400));
  for (int k : {0, 1, 80, 150, 200}) CHECK(big.at(k) == oracle::cycle_count(400, k));
}

TEST_CASE("size_counts errors") {
  CHECK_THROWS_AS(size_counts(random_bounded_degree(31, 3, 1), {}, CountMethod::brute_force), std::invalid_argument);
  CHECK_THROWS_AS(size_counts(complete_graph(4), {}, CountMethod::structured), std::invalid_argument);
  // not a forest/cycle union and too big to enumerate
  auto chorded = cycle_graph(35).edges();
  chorded.emplace_back(0, 17);
  CHECK_THROWS_AS(size_counts(Graph(35, chorded)), std::invalid_argument);
  CHECK_THROWS_AS(size_counts(path_graph(3), {{0, 1}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(size_counts(path_graph(3), {{0}, {0}}), std::invalid_argument);
}

TEST_CASE("pinned counts add up and match enumeration") {
  std::vector<Graph> gs{two_triangles(), path_graph(40), cycle_graph(31)};
  for (std::uint64_t s = 1; s <= 4; ++s) gs.push_back(random_bounded_degree(12, 3, s));
  for (const auto& g : gs) {
    const auto all = size_counts(g);
    for (Vertex u = 0; u < g.n(); u += 3) {
      const auto in = size_counts(g, {{u}, {}});
      const auto out = size_counts(g, {{}, {u}});
      CHECK(in.size() == all.size());
      for (std::size_t j = 0; j < all.size(); ++j) CHECK(in[j] + out[j] == all[j]);
    }
  }
  // in-pins counted by hand on a small graph
  const Graph g = random_bounded_degree(11, 3, 9);
  const auto sets = oracle::all_independent(g.n(), g.edges());
  std::vector<BigInt> want(g.n() + 1, BigInt(0));
  for (auto& s : sets) {
    if (s.count(2) && !s.count(5)) want[s.size()] += 1;
  }
  CHECK(size_counts(g, {{2}, {5}}).counts() == want);
}

TEST_CASE("enumerate_slice examples") {
  const auto p = enumerate_slice(path_graph(3), 2);
  REQUIRE(p.size() == 1);
  CHECK(p.state(0) == 0b101);
  CHECK(enumerate_slice(empty_graph(3), 1).size() == 3);
  CHECK(enumerate_slice(complete_graph(3), 2).empty());
  CHECK_THROWS_AS(enumerate_slice(empty_graph(31), 1), std::invalid_argument);

  const Graph g = random_bounded_degree(12, 3, 4);
  for (int k = 0; k <= 5; ++k) {
    const auto s = enumerate_slice(g, k);
    const auto want = oracle::slice(g.n(), g.edges(), k);
    REQUIRE(s.size() == want.size());
    CHECK(std::is_sorted(s.states().begin(), s.states().end()));
    std::set<Mask> got(s.states().begin(), s.states().end());
    for (auto& w : want) CHECK(got.count(oracle::mask(w)));
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s.index_of(s.state(i)) == i);
  }
}

TEST_CASE("eval_Z examples") {
  const auto p3 = size_counts(path_graph(3));
  CHECK(eval_Z(p3, Real(1)) == 5);
  CHECK(eval_Z(p3, Real(-1)) == -1);
  CHECK(eval_Z(size_counts(cycle_graph(5)), Real(1)) == 11);
  const Complex z(Real("0.3"), Real("-0.7"));
  const auto c = size_counts(random_bounded_degree(12, 3, 5));
  CHECK(to_double(abs(eval_Z(c, z)) - abs(eval_Z(c, conj(z)))) == doctest::Approx(0).epsilon(1e-30));
}

TEST_CASE("occupancy ratio examples") {
  for (double l : {0.3, 1.0, 2.5}) {
    const Complex r = occupancy_ratio(empty_graph(1), 0, Real(l), Complex(0));
    CHECK(to_double(Real(r.real())) == doctest::Approx(l));
    const Complex k2 = occupancy_ratio(path_graph(2), 0, Real(l), Complex(0));
    CHECK(to_double(Real(k2.real())) == doctest::Approx(l / (1 + l)));
  }
  const Complex mid = occupancy_ratio(path_graph(3), 1, Real(1), Complex(0));
  CHECK(to_double(Real(mid.real())) == doctest::Approx(0.25));
  CHECK(to_double(Real(mid.imag())) == doctest::Approx(0.0));

  // against enumeration: R_u(lambda, 0) = P(u in I) / P(u not in I)
  const Graph g = random_bounded_degree(10, 3, 2);
  const auto sets = oracle::all_independent(g.n(), g.edges());
  const double lambda = 0.7;
  for (Vertex u = 0; u < g.n(); ++u) {
    double in = 0, out = 0;
    for (auto& s : sets) (s.count(u) ? in : out) += std::pow(lambda, static_cast<double>(s.size()));
    const Complex r = occupancy_ratio(g, u, Real(lambda), Complex(0));
    CHECK(to_double(Real(r.real())) == doctest::Approx(in / out).epsilon(1e-12));
  }
  CHECK_THROWS_AS(occupancy_ratio(path_graph(3), 3, Real(1), Complex(0)), std::out_of_range);
}

TEST_CASE("zero-free probe") {
  ZeroProbeConfig cfg;
  cfg.activity_grid = {0, 1, 2, 3.6};
  const auto k3 = zero_free_probe(complete_graph(3), cfg);
  CHECK(k3.min_modulus > 0);
  CHECK(k3.near_zero.empty());
  CHECK(k3.points == 4u * 64u);

  ZeroProbeConfig p3cfg;
  p3cfg.activity_grid = {0.25, 0.5, 1, 2};
  CHECK(zero_free_probe(path_graph(3), p3cfg).near_zero.empty());

  ZeroProbeConfig empty_grid;
  CHECK_THROWS_AS(zero_free_probe(path_graph(3), empty_grid), std::invalid_argument);
  ZeroProbeConfig above;
  above.activity_grid = {5.0};  // beyond lambda_c(3) = 4
  CHECK_THROWS_AS(zero_free_probe(random_bounded_degree(10, 3, 1).with_delta(3), above), std::invalid_argument);

  // K3: Z(z) = 1 + 3z; the smallest |Z(l e^t)/Z(l)| on |t| = r is at t = -r for real l
  ZeroProbeConfig one;
  one.activity_grid = {1.0};
  one.angular_samples = 4;
  const auto r = zero_free_probe(complete_graph(3), one);
  CHECK(r.min_modulus == doctest::Approx((1 + 3 * std::exp(-0.05)) / 4).epsilon(1e-12));
}

TEST_CASE("occupancy ratio stays bounded on the probe region") {
  ZeroProbeConfig cfg;
  const double lc = critical_activity(3);
  cfg.activity_grid = {0.1 * lc, 0.5 * lc, 0.9 * lc};
  cfg.angular_samples = 16;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const Graph g = random_bounded_degree(12, 3, s).with_delta(3);
    const auto scan = occupancy_ratio_scan(g, cfg);
    CHECK(std::isfinite(scan.max_modulus));
    CHECK(scan.max_modulus > 0);
    CHECK(scan.points == static_cast<std::size_t>(g.n()) * 3 * 16);
  }
}

TEST_CASE("count vector JSON round trip") {
  const auto c = size_counts(cycle_graph(60));
  CHECK(SizeCountVector::from_json(c.to_json()) == c);
  CHECK(size_counts(path_graph(3)).to_json() == "[\"1\",\"3\",\"1\",\"0\"]");
  CHECK_THROWS_AS(SizeCountVector::from_json("[1,2]"), std::invalid_argument);
  CHECK_THROWS_AS(SizeCountVector::from_json("[\"-1\"]"), std::invalid_argument);
}
