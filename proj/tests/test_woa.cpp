#include <catch2/catch_amalgamated.hpp>

#include "doa/woa.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace doa;
using Catch::Approx;

namespace {

double sphere(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

SearchSpace box(std::size_t dim, double lo, double hi) {
  return {std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
}

AgentDraws draws(double p, double l, std::vector<double> r1, std::vector<double> r2,
                 std::size_t rand_agent = 0) {
  return {p, l, rand_agent, std::move(r1), std::move(r2)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("a schedule", "[woa]") {
  CHECK(woa_a_schedule(0, 100) == 2.0);
  CHECK(woa_a_schedule(100, 100) == 0.0);
  CHECK(woa_a_schedule(50, 100) == 1.0);
}

TEST_CASE("agent update phases", "[woa]") {
  const SearchSpace s = box(1, -100, 100);
  const std::vector<std::vector<double>> pop{{3.0}, {-4.0}};
  const std::vector<double> best{5.0};
  const std::vector<double> x{3.0};

  // Spiral: |5 - 3| e^0 cos 0 + 5.
  CHECK(update_agent(x, pop, best, 1.0, 1.0, draws(0.7, 0.0, {0.3}, {0.3}), s)[0] == 7.0);
  // Spiral with X = X* stays put.
  CHECK(update_agent(best, pop, best, 1.0, 1.0, draws(0.9, 0.37, {0.3}, {0.3}), s)[0] == 5.0);
  // Encircle with A = 0 (r1 = 0.5) collapses onto X*.
  CHECK(woa_phase(1.0, draws(0.1, 0, {0.5}, {0.9})) == WoaPhase::encircle);
  CHECK(update_agent(x, pop, best, 1.0, 1.0, draws(0.1, 0.0, {0.5}, {0.9}), s)[0] == 5.0);
  // |A| >= 1 explores around the random whale: a = 2, r1 = 1 -> A = 2, C = 2 r2 = 1.
  const auto d = draws(0.2, 0.0, {1.0}, {0.5}, 1);
  CHECK(woa_phase(2.0, d) == WoaPhase::explore);
  const double D = std::abs(1.0 * -4.0 - 3.0);
  CHECK(update_agent(x, pop, best, 2.0, 1.0, d, s)[0] == Approx(-4.0 - 2.0 * D));
  // Result clamped into the box.
  const SearchSpace tight = box(1, 0, 6);
  CHECK(update_agent(x, pop, best, 1.0, 1.0, draws(0.7, 0.0, {0.3}, {0.3}), tight)[0] == 6.0);
}

TEST_CASE("population init", "[woa]") {
  const SearchSpace s{{1.0, -2.0}, {1.0 + 1e-9, 3.0}};
  WoaConfig cfg;
  cfg.agents = 12;
  cfg.seed = 99;
  WoaRng r1(cfg.seed), r2(cfg.seed);
  const auto a = init_population(s, cfg, r1, sphere);
  const auto b = init_population(s, cfg, r2, sphere);
  CHECK(a.positions == b.positions);
  for (const auto& x : a.positions)
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(x[i] >= s.lower[i]);
      CHECK(x[i] <= s.upper[i]);
    }
  CHECK(a.best_cost == *std::min_element(a.costs.begin(), a.costs.end()));

  // agents = 2, dim = 1, costs {3, 5}
  const SearchSpace line = box(1, 0, 1);
  WoaConfig two;
  two.agents = 2;
  WoaRng r3(1);
  int calls = 0;
  const auto st = init_population(line, two, r3, [&](std::span<const double>) {
    return calls++ == 0 ? 3.0 : 5.0;
  });
  CHECK(st.best_cost == 3.0);
  CHECK(st.best_position == st.positions[0]);
}

TEST_CASE("elitism, bounds and determinism", "[woa][property]") {
  for (std::uint64_t seed : {1u, 42u, 777u}) {
    const SearchSpace s = box(3, -5, 5);
    WoaConfig cfg;
    cfg.agents = 10;
    cfg.iterations = 50;
    cfg.seed = seed;
    WoaRng rng(seed);
    auto rastrigin = [](std::span<const double> x) {
      double v = 10.0 * x.size();
      for (double xi : x) v += xi * xi - 10.0 * std::cos(2 * M_PI * xi);
      return v;
    };
    auto st = init_population(s, cfg, rng, rastrigin);
    while (st.iteration < cfg.iterations) {
      const double before = st.best_cost;
      step(st, s, cfg, rng, rastrigin);
      REQUIRE(st.best_cost <= before);
      REQUIRE(st.a == woa_a_schedule(st.iteration, cfg.iterations));
      for (const auto& x : st.positions)
        for (std::size_t i = 0; i < x.size(); ++i) {
          REQUIRE(x[i] >= s.lower[i]);
          REQUIRE(x[i] <= s.upper[i]);
        }
    }
    CHECK(st.a == 0.0);
    CHECK(st.cost_history.size() == cfg.iterations + 1);
    CHECK(std::is_sorted(st.cost_history.rbegin(), st.cost_history.rend()));

    const auto r1 = optimize(s, cfg, rastrigin);
    const auto r2 = optimize(s, cfg, rastrigin);
    CHECK(r1.best == r2.best);
    CHECK(r1.history == r2.history);
    CHECK(r1.best == st.best_position);

    WoaConfig threaded = cfg;
    threaded.threads = 4;
    CHECK(optimize(s, threaded, rastrigin).best == r1.best);
  }
}

TEST_CASE("constant objective and penalties", "[woa]") {
  const SearchSpace s = box(2, -1, 1);
  WoaConfig cfg;
  cfg.agents = 5;
  cfg.iterations = 10;
  const auto flat = optimize(s, cfg, [](std::span<const double>) { return 4.0; });
  for (double c : flat.history) CHECK(c == 4.0);

  const auto nan_obj = optimize(s, cfg, [](std::span<const double> x) {
    return x[0] > 0 ? std::nan("") : x[0] * x[0];
  });
  CHECK(std::isfinite(nan_obj.best_cost));
  CHECK(nan_obj.best[0] <= 0.0);

  WoaConfig one;
  one.agents = 2;
  one.iterations = 1;
  CHECK(optimize(s, one, sphere).history.size() == 2);
}

TEST_CASE("1-D sphere history is non-increasing", "[woa]") {
  WoaConfig cfg;
  cfg.agents = 10;
  cfg.iterations = 50;
  cfg.seed = 42;
  const auto r = optimize(box(1, -10, 10), cfg, sphere);
  CHECK(std::is_sorted(r.history.rbegin(), r.history.rend()));
}

TEST_CASE("finds a known interior optimum", "[woa]") {
  const std::vector<double> target{1.5, -2.25, 0.75};
  auto dist = [&](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - target[i]) * (x[i] - target[i]);
    return std::sqrt(s);
  };
  std::vector<double> finals;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    WoaConfig cfg;
    cfg.iterations = 200;
    cfg.seed = seed;
    finals.push_back(optimize(box(3, -5, 5), cfg, dist).best_cost);
  }
  CHECK(median(finals) < 0.1);
}
