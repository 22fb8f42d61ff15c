#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "soclearn/choice.hpp"
#include "soclearn/rng.hpp"

namespace soclearn {

struct PopulationMember {
  AgentParams params;
  std::array<double, 2> nu{0.0, 0.0};
  int current_choice = 0;
};

enum class BeliefRule { PerPeriodReset };

struct SimConfig {
  int periods = 50;
  int sample_size = 5;
  std::uint64_t seed = 0;
  int target = 0;
  BeliefRule belief_rule = BeliefRule::PerPeriodReset;

  void validate(std::size_t population_size) const {
    if (periods < 1) throw std::invalid_argument("SimConfig: periods >= 1 required");
    if (sample_size < 1 || static_cast<std::size_t>(sample_size) >= population_size)
      throw std::invalid_argument("SimConfig: need 1 <= sample_size < population size");
    if (target != 0 && target != 1)
      throw std::invalid_argument("SimConfig: target must be 0 or 1");
  }
};

struct Trajectory {
  std::vector<double> shares;  // share choosing the target, one per period
};

// Probability of choosing alternative 0 ("the preferred one" when nu[0] > 0)
// at each expected share s of that alternative.
inline std::vector<double> response_curve(const AgentParams& params,
                                          std::array<double, 2> nu,
                                          std::span<const double> s_grid) {
  std::vector<double> out;
  out.reserve(s_grid.size());
  for (double s : s_grid) {
    const std::array<double, 2> shares{s, 1.0 - s};
    out.push_back(choice_probabilities(params, nu, shares)[0]);
  }
  return out;
}

struct FixedPoint {
  double location;
  bool attracting;
};

namespace detail {

inline double response_at(const AgentParams& params, std::array<double, 2> nu, double s) {
  const std::array<double, 2> shares{s, 1.0 - s};
  return choice_probabilities(params, nu, shares)[0];
}

}  // namespace detail

// All solutions of P(s) = s on [0, 1], located by sign-change bisection on a
// 1e-3 mesh and refined to `tol`. Stability is judged by |dP/ds| < 1 via a
// central difference.
inline std::vector<FixedPoint> fixed_points(const AgentParams& params,
                                            std::array<double, 2> nu, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("fixed_points: tol must be > 0");
  const auto g = [&](double s) { return detail::response_at(params, nu, s) - s; };
  if (params.f == 1.0 && params.lambda * (nu[0] - nu[1]) == 0.0)
    throw std::domain_error("fixed_points: degenerate continuum (every share is fixed)");
  // For f < 0 the response is undefined at the endpoints; clip the mesh.
  const double lo = params.f < 0.0 ? 1e-9 : 0.0;
  const double hi = params.f < 0.0 ? 1.0 - 1e-9 : 1.0;

  std::vector<FixedPoint> points;
  const auto add_point = [&](double s) {
    for (const auto& p : points)
      if (std::abs(p.location - s) < 10.0 * tol) return;
    const double h = 1e-5;
    const double a = std::max(lo, s - h);
    const double b = std::min(hi, s + h);
    const double slope = (detail::response_at(params, nu, b) -
                          detail::response_at(params, nu, a)) / (b - a);
    points.push_back({s, std::abs(slope) < 1.0});
  };

  const int mesh = 1000;
  double prev_s = lo;
  double prev_g = g(prev_s);
  if (std::abs(prev_g) < tol) add_point(prev_s);
  for (int k = 1; k <= mesh; ++k) {
    const double s = lo + (hi - lo) * static_cast<double>(k) / mesh;
    const double gs = g(s);
    if (std::abs(gs) < 1e-15) {
      add_point(s);
    } else if (prev_g * gs < 0.0) {
      double a = prev_s, b = s, ga = prev_g;
      while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        const double gm = g(mid);
        if (ga * gm <= 0.0) {
          b = mid;
        } else {
          a = mid;
          ga = gm;
        }
      }
      add_point(0.5 * (a + b));
    }
    prev_s = s;
    prev_g = gs;
  }
  return points;
}

// Simulate repeated socially informed choice. Period 0 uses the prior
// expected shares only; each later period every member observes the
// previous-period choices of `sample_size` distinct others (self excluded),
// rebuilds beliefs from the prior plus that sample, and chooses
// stochastically. Memory travels through choices, not beliefs.
inline Trajectory simulate(std::span<const PopulationMember> population,
                           const SimConfig& config) {
  config.validate(population.size());
  const std::size_t n = population.size();
  const int k = config.sample_size;
  Rng rng(derive_seed(config.seed, /*stream=*/0x510ad));
  std::vector<int> choices(n), prev(n);
  Trajectory traj;
  traj.shares.reserve(static_cast<std::size_t>(config.periods));

  for (int period = 0; period < config.periods; ++period) {
    for (std::size_t m = 0; m < n; ++m) {
      const auto& member = population[m];
      std::vector<double> shares;
      if (period == 0) {
        shares = expected_shares(prior_alpha(member.params, member.nu));
      } else {
        std::array<int, 2> counts{0, 0};
        // Floyd's algorithm: k distinct indices out of n-1 (self excluded).
        std::vector<std::size_t> picked;
        picked.reserve(static_cast<std::size_t>(k));
        for (std::size_t j = n - 1 - static_cast<std::size_t>(k); j < n - 1; ++j) {
          std::size_t t = rng.below(j + 1);
          for (std::size_t p : picked)
            if (p == t) { t = j; break; }
          picked.push_back(t);
        }
        for (std::size_t p : picked) {
          const std::size_t other = p >= m ? p + 1 : p;  // skip self
          ++counts[static_cast<std::size_t>(prev[other])];
        }
        shares = posterior_shares(member.params, member.nu, counts);
      }
      const auto probs = choice_probabilities(member.params, member.nu, shares);
      choices[m] = rng.bernoulli(probs[0]) ? 0 : 1;
    }
    int hits = 0;
    for (int c : choices)
      if (c == config.target) ++hits;
    traj.shares.push_back(static_cast<double>(hits) / static_cast<double>(n));
    prev = choices;
  }
  return traj;
}

struct GridConfig {
  std::vector<double> mean_grid;   // mean intrinsic preference
  std::vector<double> f_grid;      // social-learning exponent
  std::vector<double> phi_values{1.0, 5.0, 20.0};
  std::vector<double> delta_values{0.0, 0.5, 1.0};
  int population = 50;
  int periods = 50;
  int replications = 50;
  bool minority_variant = false;
  std::uint64_t seed = 0;

  static std::vector<double> steps(double lo, double hi, double step) {
    std::vector<double> out;
    for (int i = 0;; ++i) {
      const double v = lo + step * i;
      if (v > hi + 1e-9) break;
      out.push_back(v);
    }
    return out;
  }

  static GridConfig paper_defaults(std::uint64_t seed, bool minority) {
    GridConfig g;
    g.mean_grid = steps(0.0, 4.0, 0.1);
    g.f_grid = steps(-2.0, 2.0, 0.1);
    g.seed = seed;
    g.minority_variant = minority;
    return g;
  }
};

struct GridCell {
  double mean_pref;
  double f;
  double phi;
  double delta;
  bool minority;
  double avg_final_share;
};

struct GridResult {
  std::vector<GridCell> cells;
};

namespace detail {

inline double grid_cell_average(const GridConfig& grid, double mean_pref, double f,
                                double phi, double delta, std::uint64_t cell_index) {
  double sum = 0.0;
  for (int rep = 0; rep < grid.replications; ++rep) {
    Rng prefs(derive_seed(grid.seed, cell_index, static_cast<std::uint64_t>(rep), 0xd4aa));
    std::vector<PopulationMember> pop(static_cast<std::size_t>(grid.population));
    for (std::size_t m = 0; m < pop.size(); ++m) {
      double pref = prefs.normal(mean_pref, 1.0);
      if (grid.minority_variant && m % 5 == 4) pref = -4.0;  // replaces the draw
      pop[m].params = AgentParams{1.0, f, phi, delta};
      pop[m].nu = {pref / 2.0, -pref / 2.0};
    }
    SimConfig cfg;
    cfg.periods = grid.periods;
    cfg.sample_size = 5;
    cfg.target = 0;
    cfg.seed = derive_seed(grid.seed, cell_index, static_cast<std::uint64_t>(rep), 0x51f);
    const auto traj = simulate(pop, cfg);
    sum += traj.shares.back();
  }
  return sum / static_cast<double>(grid.replications);
}

// Run fn(i) for i in [0, count) on `workers` threads. Outputs are written by
// index, so the result does not depend on the thread count.
inline void parallel_for(std::size_t count, int workers,
                         const std::function<void(std::size_t)>& fn) {
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

// Average final-period target share per (mean preference, f, phi, delta)
// cell. Every replication owns a seed derived from (master seed, cell index,
// replication index), so the result is identical for any worker count.
inline GridResult grid_run(const GridConfig& grid, int workers = 1) {
  if (grid.mean_grid.empty() || grid.f_grid.empty())
    throw std::invalid_argument("grid_run: empty grid");
  std::vector<GridCell> cells;
  for (double phi : grid.phi_values)
    for (double delta : grid.delta_values)
      for (double mean : grid.mean_grid)
        for (double f : grid.f_grid)
          cells.push_back({mean, f, phi, delta, grid.minority_variant, 0.0});

  detail::parallel_for(cells.size(), workers, [&](std::size_t i) {
    auto& c = cells[i];
    c.avg_final_share = detail::grid_cell_average(
        grid, c.mean_pref, c.f, c.phi, c.delta, static_cast<std::uint64_t>(i));
  });
  return GridResult{std::move(cells)};
}

}  // namespace soclearn
