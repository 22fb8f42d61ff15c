#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "soclearn/hmc.hpp"
#include "soclearn/posterior.hpp"
#include "soclearn/waic.hpp"

namespace soclearn {

// Fitted posterior: named population samples on the constrained scale, the
// raw unconstrained draws, and the pointwise log-likelihood matrix.
struct Posterior {
  ParamLayout layout;
  std::vector<std::string> names;                 // population parameters
  std::vector<std::vector<double>> samples;       // draws x population params
  RawPosterior raw;
  std::vector<std::vector<double>> loglik;        // draws x observations
};

// Map one unconstrained draw to the named constrained population values:
// phi fixed effects and sigmas through exp, correlation inputs to the
// below-diagonal entries of the correlation matrix, everything else as is.
inline std::vector<double> constrain_population(const ParamLayout& layout,
                                                std::span<const double> x) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(layout.population_size()));
  const int phi_slot = layout.slot_of(kPhi);
  for (int idx = 0; idx < layout.sigma_offset(); ++idx) {
    double val = x[static_cast<std::size_t>(idx)];
    if (phi_slot >= 0 && idx >= layout.fixed_index(phi_slot, 0) &&
        idx <= layout.fixed_index(phi_slot, layout.num_tasks - 1))
      val = std::exp(val);
    out.push_back(val);
  }
  const int k = layout.effect_dim();
  for (int a = 0; a < k; ++a)
    out.push_back(std::exp(x[static_cast<std::size_t>(layout.sigma_offset() + a)]));
  if (layout.num_corr() > 0) {
    const auto corr = detail::corr_block(
        x.subspan(static_cast<std::size_t>(layout.corr_offset()),
                  static_cast<std::size_t>(layout.num_corr())),
        k, false);
    for (int i = 1; i < k; ++i)
      for (int j = 0; j < i; ++j) {
        double omega = 0.0;
        for (int b = 0; b <= j; ++b)
          omega += corr.factor[static_cast<std::size_t>(i * k + b)] *
                   corr.factor[static_cast<std::size_t>(j * k + b)];
        out.push_back(omega);
      }
  }
  return out;
}

// Fit a model variant by HMC and assemble the posterior.
inline Posterior hmc_fit(const ModelSpec& spec, std::span<const Observation> observations,
                         const HmcConfig& config) {
  Posterior post;
  const InferenceData data = InferenceData::from_observations(observations);
  post.layout = ParamLayout{spec, 2, data.num_individuals()};
  post.names = post.layout.population_names();

  const ParamLayout& layout = post.layout;
  const LogDensityFn target = [&layout, &data](std::span<const double> x,
                                               std::vector<double>* grad) {
    return log_posterior(layout, data, x, grad);
  };
  post.raw = hmc_sample(target, layout.size(), config);

  post.samples.reserve(post.raw.draws.size());
  post.loglik.reserve(post.raw.draws.size());
  for (const auto& draw : post.raw.draws) {
    post.samples.push_back(constrain_population(layout, draw));
    post.loglik.push_back(pointwise_loglik(layout, data, draw));
  }
  return post;
}

// Quantile by linear interpolation between order statistics: the p-quantile
// of n sorted values is the value at rank (n - 1) p, interpolated.
inline double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double rank = (static_cast<double>(values.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = rank - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double p_lo = 0.0;
  double p_hi = 0.0;
};

// Posterior mean and percentile interval per population parameter.
inline std::vector<SummaryRow> summarize(const Posterior& post, double lo = 0.05,
                                         double hi = 0.95) {
  if (post.samples.empty()) throw std::invalid_argument("summarize: no samples");
  std::vector<SummaryRow> table;
  for (std::size_t c = 0; c < post.names.size(); ++c) {
    std::vector<double> column;
    column.reserve(post.samples.size());
    double mean = 0.0;
    for (const auto& row : post.samples) {
      column.push_back(row[c]);
      mean += row[c];
    }
    mean /= static_cast<double>(column.size());
    table.push_back({post.names[c], mean, quantile(column, lo), quantile(column, hi)});
  }
  return table;
}

struct IndividualFit {
  int individual_id = 0;
  Task task = Task::Quest;
  double mean_probability = 0.0;
  int num_choices = 0;
};

// Mean posterior probability of each individual's observed choices per task
// (Fig. 5 lower row style: 0.5 is the random-prediction benchmark).
inline std::vector<IndividualFit> individual_fit(const Posterior& post,
                                                 std::span<const Observation> observations) {
  const InferenceData data = InferenceData::from_observations(observations);
  std::map<std::pair<int, int>, std::pair<double, int>> acc;  // (ind, task) -> (sum, count)
  for (const auto& draw : post.raw.draws) {
    const auto probs = pointwise_prob(post.layout, data, draw);
    for (std::size_t m = 0; m < data.rows.size(); ++m) {
      const auto& row = data.rows[m];
      auto& slot = acc[{row.individual, row.task}];
      slot.first += probs[m];
      if (&draw == &post.raw.draws.front()) ++slot.second;
    }
  }
  std::vector<IndividualFit> out;
  const double draws = static_cast<double>(post.raw.draws.size());
  for (const auto& [key, val] : acc) {
    IndividualFit fit;
    fit.individual_id = data.individual_ids[static_cast<std::size_t>(key.first)];
    fit.task = static_cast<Task>(key.second);
    fit.num_choices = val.second;
    fit.mean_probability = val.first / (draws * static_cast<double>(val.second));
    out.push_back(fit);
  }
  return out;
}

struct AggregateFitCell {
  Task task = Task::Quest;
  Treatment treatment = Treatment::Control;
  int n_preferred = 0;  // peers choosing the predicted-preferred alternative
  double observed = 0.0;
  double predicted = 0.0;
  int count = 0;
};

// Observed vs posterior-predictive frequency of choosing the predicted
// alternative, per task x treatment x peer-count cell (Fig. 5 upper row
// style). Cells with no observations are absent from the result.
inline std::vector<AggregateFitCell> aggregate_fit(const Posterior& post,
                                                   std::span<const Observation> observations) {
  const InferenceData data = InferenceData::from_observations(observations);
  struct Acc {
    double observed = 0.0;
    double predicted = 0.0;
    int count = 0;
  };
  std::map<std::tuple<int, int, int>, Acc> cells;
  for (std::size_t m = 0; m < data.rows.size(); ++m) {
    const auto& row = data.rows[m];
    const int n_pref = row.preferred == 0 ? row.n0 : row.n1;
    auto& cell = cells[{row.task, row.treatment, n_pref}];
    cell.observed += row.chosen == row.preferred ? 1.0 : 0.0;
    ++cell.count;
  }
  for (const auto& draw : post.raw.draws) {
    const auto probs = pointwise_prob(post.layout, data, draw);
    for (std::size_t m = 0; m < data.rows.size(); ++m) {
      const auto& row = data.rows[m];
      const int n_pref = row.preferred == 0 ? row.n0 : row.n1;
      const double p_pref = row.chosen == row.preferred ? probs[m] : 1.0 - probs[m];
      cells[{row.task, row.treatment, n_pref}].predicted += p_pref;
    }
  }
  std::vector<AggregateFitCell> out;
  const double draws = static_cast<double>(post.raw.draws.size());
  for (const auto& [key, acc] : cells) {
    AggregateFitCell cell;
    cell.task = static_cast<Task>(std::get<0>(key));
    cell.treatment = static_cast<Treatment>(std::get<1>(key));
    cell.n_preferred = std::get<2>(key);
    cell.count = acc.count;
    cell.observed = acc.observed / acc.count;
    cell.predicted = acc.predicted / (draws * acc.count);
    out.push_back(cell);
  }
  return out;
}

}  // namespace soclearn
