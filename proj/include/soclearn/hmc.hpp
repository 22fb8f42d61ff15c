#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "soclearn/rng.hpp"

namespace soclearn {

struct HmcConfig {
  int chains = 4;
  int warmup = 500;
  int draws = 500;
  std::uint64_t seed = 0;
  double target_accept = 0.8;
  double trajectory_time = 4.0;  // epsilon * steps tuned towards this
  int max_steps = 512;
  int workers = 1;

  void validate() const {
    if (chains < 2) throw std::invalid_argument("HmcConfig: chains >= 2 required for R-hat");
    if (warmup < 100 || draws < 100)
      throw std::invalid_argument("HmcConfig: warmup and draws must be >= 100");
  }
};

struct ChainResult {
  std::vector<std::vector<double>> draws;  // draws x dim, unconstrained
  int divergences = 0;
  double step_size = 0.0;
  int base_steps = 0;
};

struct SampleDiagnostics {
  std::vector<double> rhat;  // per unconstrained parameter
  std::vector<double> ess;
  int divergences = 0;
  bool reliable = true;
};

// Posterior draws on the unconstrained scale, all chains concatenated in
// chain order, plus sampler diagnostics.
struct RawPosterior {
  int dim = 0;
  int chains = 0;
  int draws_per_chain = 0;
  std::vector<std::vector<double>> draws;
  SampleDiagnostics diagnostics;

  std::span<const double> draw(int s) const { return draws[static_cast<std::size_t>(s)]; }
  int total_draws() const { return chains * draws_per_chain; }
};

namespace detail {

// Nesterov dual averaging of the log step size (Hoffman & Gelman 2014).
class DualAveraging {
 public:
  explicit DualAveraging(double initial_step, double target)
      : mu_(std::log(10.0 * initial_step)), target_(target),
        log_eps_(std::log(initial_step)), log_eps_bar_(std::log(initial_step)) {}

  void update(double accept_prob) {
    ++count_;
    const double eta = 1.0 / (count_ + t0_);
    h_bar_ = (1.0 - eta) * h_bar_ + eta * (target_ - accept_prob);
    log_eps_ = mu_ - std::sqrt(static_cast<double>(count_)) / gamma_ * h_bar_;
    const double w = std::pow(static_cast<double>(count_), -kappa_);
    log_eps_bar_ = w * log_eps_ + (1.0 - w) * log_eps_bar_;
  }

  double current() const { return std::exp(log_eps_); }
  double averaged() const { return std::exp(log_eps_bar_); }
  void restart(double initial_step) {
    mu_ = std::log(10.0 * initial_step);
    log_eps_ = std::log(initial_step);
    log_eps_bar_ = std::log(initial_step);
    h_bar_ = 0.0;
    count_ = 0;
  }

 private:
  double mu_;
  double target_;
  double log_eps_;
  double log_eps_bar_;
  double h_bar_ = 0.0;
  int count_ = 0;
  static constexpr double gamma_ = 0.05;
  static constexpr double t0_ = 10.0;
  static constexpr double kappa_ = 0.75;
};

// Running mean/variance per coordinate.
class Welford {
 public:
  explicit Welford(int dim) : mean_(static_cast<std::size_t>(dim), 0.0),
                              m2_(static_cast<std::size_t>(dim), 0.0) {}
  void add(std::span<const double> x) {
    ++n_;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - mean_[i];
      mean_[i] += d / n_;
      m2_[i] += d * (x[i] - mean_[i]);
    }
  }
  long count() const { return n_; }
  std::vector<double> variance() const {
    std::vector<double> out(mean_.size(), 1.0);
    if (n_ < 2) return out;
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = m2_[i] / static_cast<double>(n_ - 1);
    return out;
  }

 private:
  long n_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

}  // namespace detail

using LogDensityFn =
    std::function<double(std::span<const double>, std::vector<double>*)>;

// One chain of adaptive leapfrog HMC with a diagonal metric. Warmup runs in
// three phases: step-size adaptation on a unit metric, a variance-estimation
// window, then step-size re-adaptation on the estimated metric. The number
// of leapfrog steps is jittered uniformly over [L/2, 3L/2] around the base
// length implied by the trajectory time.
inline ChainResult hmc_chain(const LogDensityFn& target, int dim,
                             const HmcConfig& config, std::uint64_t chain_seed) {
  Rng rng(chain_seed);
  std::vector<double> position(static_cast<std::size_t>(dim));
  for (double& p : position) p = rng.normal(0.0, 0.1);

  std::vector<double> grad;
  double logp = target(position, &grad);
  if (!std::isfinite(logp))
    throw std::runtime_error("hmc_chain: non-finite log density at the initial point");

  std::vector<double> inv_metric(static_cast<std::size_t>(dim), 1.0);
  double step = 0.1;
  detail::DualAveraging adapt(step, config.target_accept);
  detail::Welford welford(dim);

  const int phase1 = std::max(1, config.warmup * 15 / 100);
  const int phase2 = std::max(1, config.warmup * 75 / 100);

  ChainResult result;
  result.draws.reserve(static_cast<std::size_t>(config.draws));

  std::vector<double> momentum(static_cast<std::size_t>(dim));
  std::vector<double> q(static_cast<std::size_t>(dim));
  std::vector<double> g(static_cast<std::size_t>(dim));

  const int total = config.warmup + config.draws;
  for (int iter = 0; iter < total; ++iter) {
    const bool warming = iter < config.warmup;
    const double eps = warming ? adapt.current() : step;
    const int base = std::clamp(
        static_cast<int>(std::lround(config.trajectory_time / eps)), 1,
        config.max_steps);
    const int lo = std::max(1, base / 2);
    const int hi = std::max(lo, base + base / 2);
    const int steps = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));

    // Momentum ~ N(0, M) with M = diag(1 / inv_metric).
    double kinetic0 = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double sd = 1.0 / std::sqrt(inv_metric[static_cast<std::size_t>(i)]);
      momentum[static_cast<std::size_t>(i)] = rng.normal(0.0, sd);
      kinetic0 += 0.5 * momentum[static_cast<std::size_t>(i)] *
                  momentum[static_cast<std::size_t>(i)] *
                  inv_metric[static_cast<std::size_t>(i)];
    }
    const double h0 = -logp + kinetic0;

    q = position;
    g = grad;
    double logp_new = logp;
    bool divergent = false;
    for (int stepi = 0; stepi < steps; ++stepi) {
      for (int i = 0; i < dim; ++i)
        momentum[static_cast<std::size_t>(i)] += 0.5 * eps * g[static_cast<std::size_t>(i)];
      for (int i = 0; i < dim; ++i)
        q[static_cast<std::size_t>(i)] += eps * inv_metric[static_cast<std::size_t>(i)] *
                                          momentum[static_cast<std::size_t>(i)];
      logp_new = target(q, &g);
      if (!std::isfinite(logp_new)) {
        divergent = true;
        break;
      }
      for (int i = 0; i < dim; ++i)
        momentum[static_cast<std::size_t>(i)] += 0.5 * eps * g[static_cast<std::size_t>(i)];
    }

    double accept_prob = 0.0;
    if (!divergent) {
      double kinetic1 = 0.0;
      for (int i = 0; i < dim; ++i)
        kinetic1 += 0.5 * momentum[static_cast<std::size_t>(i)] *
                    momentum[static_cast<std::size_t>(i)] *
                    inv_metric[static_cast<std::size_t>(i)];
      const double h1 = -logp_new + kinetic1;
      if (h1 - h0 > 1000.0) {
        divergent = true;
      } else {
        accept_prob = std::min(1.0, std::exp(h0 - h1));
      }
    }
    if (divergent && !warming) ++result.divergences;

    if (!divergent && rng.uniform() < accept_prob) {
      position = q;
      grad = g;
      logp = logp_new;
    }

    if (warming) {
      adapt.update(accept_prob);
      if (iter >= phase1 && iter < phase2) welford.add(position);
      if (iter + 1 == phase2 && welford.count() >= 10) {
        auto var = welford.variance();
        for (std::size_t i = 0; i < var.size(); ++i)
          inv_metric[i] = std::max(var[i], 1e-8);
        adapt.restart(adapt.averaged());
      }
      if (iter + 1 == config.warmup) {
        step = adapt.averaged();
        result.step_size = step;
        result.base_steps = std::clamp(
            static_cast<int>(std::lround(config.trajectory_time / step)), 1,
            config.max_steps);
      }
    } else {
      result.draws.push_back(position);
    }
  }
  return result;
}

namespace detail {

// Split R-hat over the chains for one coordinate.
inline double split_rhat(const std::vector<const std::vector<std::vector<double>>*>& chains,
                         int coord) {
  std::vector<double> means, vars;
  std::size_t half_len = 0;
  for (const auto* chain : chains) {
    const std::size_t n = chain->size() / 2;
    half_len = n;
    for (int half = 0; half < 2; ++half) {
      double mean = 0.0;
      for (std::size_t s = 0; s < n; ++s)
        mean += (*chain)[half * n + s][static_cast<std::size_t>(coord)];
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        const double d = (*chain)[half * n + s][static_cast<std::size_t>(coord)] - mean;
        var += d * d;
      }
      var /= static_cast<double>(n - 1);
      means.push_back(mean);
      vars.push_back(var);
    }
  }
  const double m = static_cast<double>(means.size());
  const double n = static_cast<double>(half_len);
  double grand = 0.0;
  for (double v : means) grand += v;
  grand /= m;
  double b = 0.0;
  for (double v : means) b += (v - grand) * (v - grand);
  b *= n / (m - 1.0);
  double w = 0.0;
  for (double v : vars) w += v;
  w /= m;
  if (w <= 0.0) return 1.0;
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

// Effective sample size via Geyer's initial positive sequence, pooled over
// chains.
inline double effective_sample_size(
    const std::vector<const std::vector<std::vector<double>>*>& chains, int coord) {
  const std::size_t n = chains[0]->size();
  const std::size_t m = chains.size();
  std::vector<std::vector<double>> series(m);
  double grand = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    series[c].reserve(n);
    for (const auto& draw : *chains[c]) series[c].push_back(draw[static_cast<std::size_t>(coord)]);
    for (double v : series[c]) grand += v;
  }
  grand /= static_cast<double>(n * m);
  double var = 0.0;
  for (const auto& s : series)
    for (double v : s) var += (v - grand) * (v - grand);
  var /= static_cast<double>(n * m - 1);
  if (var <= 0.0) return static_cast<double>(n * m);

  double tau = 1.0;
  for (std::size_t lag = 1; lag + 1 < n; lag += 2) {
    double rho1 = 0.0, rho2 = 0.0;
    for (const auto& s : series) {
      for (std::size_t t = 0; t + lag < n; ++t)
        rho1 += (s[t] - grand) * (s[t + lag] - grand);
      for (std::size_t t = 0; t + lag + 1 < n; ++t)
        rho2 += (s[t] - grand) * (s[t + lag + 1] - grand);
    }
    rho1 /= static_cast<double>(n * m) * var;
    rho2 /= static_cast<double>(n * m) * var;
    if (rho1 + rho2 <= 0.0) break;
    tau += 2.0 * (rho1 + rho2);
  }
  return static_cast<double>(n * m) / tau;
}

}  // namespace detail

// Run all chains (with per-chain derived seeds, so chain c's draws do not
// depend on how many chains run or on the worker count) and assemble
// diagnostics.
inline RawPosterior hmc_sample(const LogDensityFn& target, int dim,
                               const HmcConfig& config) {
  config.validate();
  std::vector<ChainResult> chains(static_cast<std::size_t>(config.chains));
  {
    std::vector<std::thread> pool;
    const int workers = std::max(1, std::min(config.workers, config.chains));
    std::atomic<int> next{0};
    auto body = [&] {
      for (int c = next.fetch_add(1); c < config.chains; c = next.fetch_add(1))
        chains[static_cast<std::size_t>(c)] = hmc_chain(
            target, dim, config, derive_seed(config.seed, 0xc4a1, static_cast<std::uint64_t>(c)));
    };
    if (workers == 1) {
      body();
    } else {
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) pool.emplace_back(body);
      for (auto& t : pool) t.join();
    }
  }

  RawPosterior post;
  post.dim = dim;
  post.chains = config.chains;
  post.draws_per_chain = config.draws;
  for (const auto& chain : chains) {
    post.diagnostics.divergences += chain.divergences;
    for (const auto& d : chain.draws) post.draws.push_back(d);
  }

  std::vector<const std::vector<std::vector<double>>*> views;
  for (const auto& chain : chains) views.push_back(&chain.draws);
  post.diagnostics.rhat.resize(static_cast<std::size_t>(dim));
  post.diagnostics.ess.resize(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    post.diagnostics.rhat[static_cast<std::size_t>(i)] = detail::split_rhat(views, i);
    post.diagnostics.ess[static_cast<std::size_t>(i)] =
        detail::effective_sample_size(views, i);
  }
  const double div_rate = static_cast<double>(post.diagnostics.divergences) /
                          static_cast<double>(post.total_draws());
  post.diagnostics.reliable = div_rate <= 0.10;
  return post;
}

}  // namespace soclearn
