#pragma once

// Whale Optimization Algorithm over a box. Exploration around a random
// whale, encircling the incumbent, and logarithmic-spiral bubble-net moves,
// dispatched per agent on p and |A|.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace doa {

struct SearchSpace {
  std::vector<double> lower, upper;

  std::size_t dim() const { return lower.size(); }

  void validate() const {
    if (lower.empty() || lower.size() != upper.size())
      throw std::invalid_argument("SearchSpace: bounds must be nonempty and of equal length");
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (!(lower[i] < upper[i]))
        throw std::invalid_argument("SearchSpace: lower < upper violated at coordinate " +
                                    std::to_string(i));
  }

  double clamp(std::size_t i, double v) const { return std::clamp(v, lower[i], upper[i]); }
};

struct WoaConfig {
  std::size_t agents = 30;
  std::size_t iterations = 100;
  double spiral_b = 1.0;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // objective evaluation workers; 0 = hardware concurrency

  void validate() const {
    if (agents < 2) throw std::invalid_argument("WoaConfig: agents must be >= 2");
    if (iterations < 1) throw std::invalid_argument("WoaConfig: iterations must be >= 1");
  }
};

struct WoaRunState {
  std::vector<std::vector<double>> positions;
  std::vector<double> costs;
  std::vector<double> best_position;
  double best_cost = std::numeric_limits<double>::infinity();
  double a = 2.0;
  std::size_t iteration = 0;
  std::vector<double> cost_history;
};

struct WoaResult {
  std::vector<double> best;
  double best_cost;
  std::vector<double> history;
};

/// Single seeded source for every random draw in a run.
class WoaRng {
 public:
  explicit WoaRng(std::uint64_t seed) : engine_(seed) {}
  // 53-bit uniform in [0, 1); independent of the standard library's
  // distribution implementations so runs are portable.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) {
    return std::min(static_cast<std::size_t>(uniform() * static_cast<double>(n)), n - 1);
  }

 private:
  std::mt19937_64 engine_;
};

/// a(t) = 2 (1 - t/T): 2 at the first iteration, 0 after the last.
inline double woa_a_schedule(std::size_t t, std::size_t total) {
  return 2.0 * (1.0 - static_cast<double>(t) / static_cast<double>(total));
}

/// Random draws consumed by one agent update.
struct AgentDraws {
  double p = 0.0;
  double l = 0.0;
  std::size_t rand_agent = 0;
  std::vector<double> r1;  // feeds A = 2 a r1 - a
  std::vector<double> r2;  // feeds C = 2 r2
};

inline AgentDraws draw_agent(WoaRng& rng, std::size_t agents, std::size_t dim) {
  AgentDraws d;
  d.p = rng.uniform();
  d.l = rng.uniform(-1.0, 1.0);
  d.rand_agent = rng.index(agents);
  d.r1.resize(dim);
  d.r2.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    d.r1[i] = rng.uniform();
    d.r2[i] = rng.uniform();
  }
  return d;
}

enum class WoaPhase { spiral, explore, encircle };

inline WoaPhase woa_phase(double a, const AgentDraws& d) {
  if (d.p >= 0.5) return WoaPhase::spiral;
  const double a0 = 2.0 * a * d.r1[0] - a;
  return std::abs(a0) >= 1.0 ? WoaPhase::explore : WoaPhase::encircle;
}

/// New position for `x` given the current population snapshot, incumbent
/// and draws. Result is clamped into the box.
inline std::vector<double> update_agent(std::span<const double> x,
                                        std::span<const std::vector<double>> population,
                                        std::span<const double> best, double a, double spiral_b,
                                        const AgentDraws& d, const SearchSpace& space) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  const WoaPhase phase = woa_phase(a, d);
  if (phase == WoaPhase::spiral) {
    const double shape = std::exp(spiral_b * d.l) * std::cos(2.0 * std::numbers::pi * d.l);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::abs(best[i] - x[i]) * shape + best[i];
  } else {
    const std::span<const double> target =
        phase == WoaPhase::explore ? std::span<const double>(population[d.rand_agent]) : best;
    for (std::size_t i = 0; i < n; ++i) {
      const double A = 2.0 * a * d.r1[i] - a;
      const double C = 2.0 * d.r2[i];
      const double D = std::abs(C * target[i] - x[i]);
      out[i] = target[i] - A * D;
    }
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = space.clamp(i, out[i]);
  return out;
}

namespace detail {

template <class Objective>
void evaluate_all(const std::vector<std::vector<double>>& xs, std::vector<double>& costs,
                  Objective& objective, unsigned threads) {
  costs.resize(xs.size());
  auto eval = [&](std::size_t k) {
    const double c = objective(std::span<const double>(xs[k]));
    costs[k] = std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
  };
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, xs.size()));
  if (workers <= 1) {
    for (std::size_t k = 0; k < xs.size(); ++k) eval(k);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < xs.size(); k += workers) eval(k);
    });
}

inline void absorb_best(WoaRunState& s) {
  for (std::size_t k = 0; k < s.costs.size(); ++k) {
    if (s.costs[k] < s.best_cost) {
      s.best_cost = s.costs[k];
      s.best_position = s.positions[k];
    }
  }
}

}  // namespace detail

template <class Objective>
WoaRunState init_population(const SearchSpace& space, const WoaConfig& cfg, WoaRng& rng,
                            Objective&& objective) {
  space.validate();
  cfg.validate();
  WoaRunState s;
  s.positions.assign(cfg.agents, std::vector<double>(space.dim()));
  for (auto& x : s.positions)
    for (std::size_t i = 0; i < space.dim(); ++i)
      x[i] = space.clamp(i, rng.uniform(space.lower[i], space.upper[i]));
  detail::evaluate_all(s.positions, s.costs, objective, cfg.threads);
  s.best_position = s.positions.front();
  detail::absorb_best(s);
  s.a = woa_a_schedule(0, cfg.iterations);
  s.cost_history.push_back(s.best_cost);
  return s;
}

/// One iteration: every agent moves against the population snapshot taken
/// at the start of the iteration, then all are evaluated. The incumbent is
/// replaced only on strict improvement.
template <class Objective>
void step(WoaRunState& s, const SearchSpace& space, const WoaConfig& cfg, WoaRng& rng,
          Objective&& objective) {
  if (s.iteration >= cfg.iterations) throw std::logic_error("WOA: iteration budget exhausted");
  s.a = woa_a_schedule(s.iteration, cfg.iterations);
  const auto snapshot = s.positions;
  for (std::size_t k = 0; k < snapshot.size(); ++k) {
    const AgentDraws d = draw_agent(rng, snapshot.size(), space.dim());
    s.positions[k] = update_agent(snapshot[k], snapshot, s.best_position, s.a, cfg.spiral_b, d,
                                  space);
  }
  detail::evaluate_all(s.positions, s.costs, objective, cfg.threads);
  detail::absorb_best(s);
  ++s.iteration;
  s.a = woa_a_schedule(s.iteration, cfg.iterations);
  s.cost_history.push_back(s.best_cost);
}

/// Full run: initial population plus `iterations` steps. History holds the
/// incumbent cost after init and after each step.
template <class Objective>
WoaResult optimize(const SearchSpace& space, const WoaConfig& cfg, Objective&& objective) {
  WoaRng rng(cfg.seed);
  WoaRunState s = init_population(space, cfg, rng, objective);
  while (s.iteration < cfg.iterations) step(s, space, cfg, rng, objective);
  return {s.best_position, s.best_cost, s.cost_history};
}

}  // namespace doa
