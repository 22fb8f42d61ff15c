#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "soclearn/special.hpp"

namespace soclearn {

// Behavioral parameters of one decision-maker in one task/treatment cell:
// marginal intrinsic utility, social-learning exponent, prior strength
// (pseudo-observations per alternative), and preference bias of the prior.
struct AgentParams {
  double lambda = 0.0;
  double f = 0.0;
  double phi = 1.0;
  double delta = 0.0;

  void validate() const {
    if (!(std::isfinite(lambda) && std::isfinite(f) && std::isfinite(phi) &&
          std::isfinite(delta)))
      throw std::invalid_argument("AgentParams: non-finite field");
    if (phi < 0.0) throw std::invalid_argument("AgentParams: phi must be >= 0");
  }
};

// Intrinsic-utility scores and observed peer counts for one decision.
struct ChoiceSituation {
  std::vector<double> nu;
  std::vector<int> counts;

  int num_alternatives() const { return static_cast<int>(nu.size()); }
  int sample_size() const {
    int n = 0;
    for (int c : counts) n += c;
    return n;
  }

  void validate() const {
    if (nu.size() < 2) throw std::invalid_argument("ChoiceSituation: J >= 2 required");
    if (nu.size() != counts.size())
      throw std::invalid_argument("ChoiceSituation: nu/counts length mismatch");
    for (double v : nu)
      if (!std::isfinite(v)) throw std::invalid_argument("ChoiceSituation: non-finite nu");
    for (int c : counts)
      if (c < 0) throw std::invalid_argument("ChoiceSituation: negative count");
  }
};

// Dirichlet parameters over alternative shares.
struct BeliefState {
  std::vector<double> alpha;

  void validate() const {
    for (double a : alpha)
      if (!(a > 0.0)) throw std::invalid_argument("BeliefState: alpha must be > 0");
  }
};

enum class StrategyClass { Anticonformist, Independent, Nonconformist, Linear, Conformist };

inline const char* to_string(StrategyClass c) {
  switch (c) {
    case StrategyClass::Anticonformist: return "anticonformist";
    case StrategyClass::Independent: return "independent";
    case StrategyClass::Nonconformist: return "nonconformist";
    case StrategyClass::Linear: return "linear";
    case StrategyClass::Conformist: return "conformist";
  }
  return "?";
}

enum class Task : int { Quest = 0, Paint = 1 };
enum class Treatment : int { Control = 0, Reward = 1, Punish = 2 };

// One socially informed binary decision: the measured preference, the peer
// counts shown, and the choice made.
struct Observation {
  int individual_id = 0;
  Task task = Task::Quest;
  Treatment treatment = Treatment::Control;
  ChoiceSituation situation;
  int chosen = 0;
  double delta_measured = 0.0;
  int preferred = 0;

  void validate() const {
    situation.validate();
    const int j = situation.num_alternatives();
    if (chosen < 0 || chosen >= j)
      throw std::invalid_argument("Observation: chosen index out of range");
    if (preferred < 0 || preferred >= j)
      throw std::invalid_argument("Observation: preferred index out of range");
    if (delta_measured < 0.0 || delta_measured > 1.0)
      throw std::invalid_argument("Observation: delta outside [0,1]");
  }
};

// Preference-biased Dirichlet prior: alpha_j = phi * J * softmax(delta * nu)_j.
inline BeliefState prior_alpha(const AgentParams& params, std::span<const double> nu) {
  if (!(params.phi > 0.0))
    throw std::domain_error("prior_alpha: degenerate prior (phi = 0); use raw-count evaluation for the phi->0 limit");
  std::vector<double> scaled(nu.size());
  for (std::size_t j = 0; j < nu.size(); ++j) scaled[j] = params.delta * nu[j];
  BeliefState out{softmax(scaled)};
  const double total = params.phi * static_cast<double>(nu.size());
  for (double& a : out.alpha) a *= total;
  return out;
}

// Conjugate update: alpha'_j = alpha_j + n_j.
inline BeliefState update_belief(const BeliefState& prior, std::span<const int> counts) {
  if (prior.alpha.size() != counts.size())
    throw std::invalid_argument("update_belief: alpha/counts length mismatch");
  BeliefState out = prior;
  for (std::size_t j = 0; j < counts.size(); ++j)
    out.alpha[j] += static_cast<double>(counts[j]);
  return out;
}

inline std::vector<double> expected_shares(const BeliefState& belief) {
  double total = 0.0;
  for (double a : belief.alpha) total += a;
  std::vector<double> shares(belief.alpha.size());
  for (std::size_t j = 0; j < shares.size(); ++j) shares[j] = belief.alpha[j] / total;
  return shares;
}

// Logit choice probabilities P_j = exp(lambda nu_j) s_j^f / sum_k ...
// Computed in log space; invariant to rescaling the shares and to
// translating nu by a constant.
inline std::vector<double> choice_probabilities(const AgentParams& params,
                                                std::span<const double> nu,
                                                std::span<const double> shares) {
  if (nu.size() != shares.size())
    throw std::invalid_argument("choice_probabilities: nu/shares length mismatch");
  std::vector<double> logits(nu.size());
  for (std::size_t j = 0; j < nu.size(); ++j) {
    if (shares[j] < 0.0)
      throw std::invalid_argument("choice_probabilities: negative share");
    if (shares[j] == 0.0) {
      if (params.f < 0.0)
        throw std::domain_error("choice_probabilities: unbounded anticonformist utility (zero share with f < 0)");
      logits[j] = params.f == 0.0 ? params.lambda * nu[j]
                                  : -std::numeric_limits<double>::infinity();
      continue;
    }
    logits[j] = params.lambda * nu[j] + params.f * std::log(shares[j]);
  }
  const double lse = log_sum_exp(logits);
  std::vector<double> probs(nu.size());
  for (std::size_t j = 0; j < nu.size(); ++j) probs[j] = std::exp(logits[j] - lse);
  return probs;
}

// Expected shares after prior + sample, in the closed form
// s_j = (J phi softmax(delta nu)_j + n_j) / (J phi + N).
inline std::vector<double> posterior_shares(const AgentParams& params,
                                            std::span<const double> nu,
                                            std::span<const int> counts) {
  return expected_shares(update_belief(prior_alpha(params, nu), counts));
}

// Choice probabilities of one observation under its agent parameters.
inline std::vector<double> observation_probabilities(const AgentParams& params,
                                                     const Observation& obs) {
  const auto shares = posterior_shares(params, obs.situation.nu, obs.situation.counts);
  return choice_probabilities(params, obs.situation.nu, shares);
}

using ParamsKey = std::tuple<int, Task, Treatment>;

// Sum of log choice probabilities of the observed choices. A probability of
// exactly zero yields -infinity.
inline double log_likelihood(const std::map<ParamsKey, AgentParams>& params_lookup,
                             std::span<const Observation> observations) {
  double total = 0.0;
  for (const auto& obs : observations) {
    obs.validate();
    const auto it = params_lookup.find({obs.individual_id, obs.task, obs.treatment});
    if (it == params_lookup.end())
      throw std::invalid_argument("log_likelihood: no parameters for individual " +
                                  std::to_string(obs.individual_id));
    const auto probs = observation_probabilities(it->second, obs);
    if (probs[obs.chosen] <= 0.0) return -std::numeric_limits<double>::infinity();
    total += std::log(probs[obs.chosen]);
  }
  return total;
}

inline StrategyClass classify(double f, double tol = 1e-9) {
  if (tol < 0.0) throw std::invalid_argument("classify: negative tolerance");
  if (f < -tol) return StrategyClass::Anticonformist;
  if (std::abs(f) <= tol) return StrategyClass::Independent;
  if (std::abs(f - 1.0) <= tol) return StrategyClass::Linear;
  if (f < 1.0) return StrategyClass::Nonconformist;
  return StrategyClass::Conformist;
}

struct LogShareExpectation {
  double exact;
  double approx;
};

// E[log share_j] under a Dirichlet belief: exactly psi(alpha_j) - psi(sum),
// and the logistic approximation log((alpha_j - 1/2)/(sum - 1/2)).
inline LogShareExpectation log_share_expectation(const BeliefState& belief, int j) {
  belief.validate();
  double total = 0.0;
  for (double a : belief.alpha) total += a;
  const double aj = belief.alpha.at(static_cast<std::size_t>(j));
  if (aj <= 0.5 || total <= 0.5)
    throw std::domain_error("log_share_expectation: outside approximation domain (alpha <= 1/2)");
  return {digamma(aj) - digamma(total),
          std::log((aj - 0.5) / (total - 0.5))};
}

}  // namespace soclearn
