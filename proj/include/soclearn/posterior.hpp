#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "soclearn/choice.hpp"
#include "soclearn/model.hpp"

namespace soclearn {

// One observation flattened for the likelihood inner loop.
struct ObsRow {
  int individual = 0;  // dense index
  int task = 0;
  int treatment = 0;
  double nu0 = 0.0, nu1 = 0.0;
  int n0 = 0, n1 = 0;  // peer counts
  int chosen = 0;
  int preferred = 0;
};

// Observations with individual ids remapped to dense indices.
struct InferenceData {
  std::vector<ObsRow> rows;
  std::vector<int> individual_ids;  // dense index -> original id

  int num_individuals() const { return static_cast<int>(individual_ids.size()); }

  static InferenceData from_observations(std::span<const Observation> observations) {
    InferenceData data;
    std::map<int, int> dense;
    for (const auto& obs : observations) {
      obs.validate();
      if (obs.situation.num_alternatives() != 2)
        throw std::invalid_argument("InferenceData: binary observations required");
      auto [it, inserted] = dense.emplace(obs.individual_id,
                                          static_cast<int>(dense.size()));
      if (inserted) data.individual_ids.push_back(obs.individual_id);
      ObsRow row;
      row.individual = it->second;
      row.task = static_cast<int>(obs.task);
      row.treatment = static_cast<int>(obs.treatment);
      row.nu0 = obs.situation.nu[0];
      row.nu1 = obs.situation.nu[1];
      row.n0 = obs.situation.counts[0];
      row.n1 = obs.situation.counts[1];
      row.chosen = obs.chosen;
      row.preferred = obs.preferred;
      data.rows.push_back(row);
    }
    return data;
  }
};

namespace detail {

// Behavioral parameters and their unconstrained-scale gradient slots for one
// observation row.
struct RowParams {
  double lambda = 0.0, f = 0.0, phi = 0.0, delta = 0.0;
};

// Log probability of the chosen alternative plus the gradient with respect
// to (lambda, f, Phi, delta) where Phi is the log of phi. J = 2 throughout.
struct RowGrad {
  double loglik = 0.0;
  double g_lambda = 0.0, g_f = 0.0, g_phi_log = 0.0, g_delta = 0.0;
};

inline RowGrad row_loglik(const ObsRow& row, const RowParams& p, const ModelSpec& spec,
                          bool want_grad) {
  RowGrad out;
  const double nu[2] = {row.nu0, row.nu1};
  const int n[2] = {row.n0, row.n1};
  const int y = row.chosen;

  if (!spec.active[kF]) {
    // Pure preference model: shares drop out entirely.
    const double l0 = p.lambda * nu[0], l1 = p.lambda * nu[1];
    const double m = std::max(l0, l1);
    const double lse = m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
    out.loglik = (y == 0 ? l0 : l1) - lse;
    if (want_grad) {
      const double prob0 = std::exp(l0 - lse);
      const double mean_nu = prob0 * nu[0] + (1.0 - prob0) * nu[1];
      out.g_lambda = nu[y] - mean_nu;
    }
    return out;
  }

  // Prior shares from the (possibly pinned) preference bias.
  double prior[2];
  if (spec.active[kDelta]) {
    const double e0 = std::exp(p.delta * (nu[0] - nu[1]));
    prior[0] = e0 / (e0 + 1.0);
    prior[1] = 1.0 - prior[0];
  } else {
    prior[0] = prior[1] = 0.5;
  }
  const double total_n = static_cast<double>(n[0] + n[1]);
  const double strength = 2.0 * p.phi;  // J * phi pseudo-observations
  const double denom = strength + total_n;
  double s[2], logit[2];
  for (int j = 0; j < 2; ++j) {
    s[j] = (strength * prior[j] + static_cast<double>(n[j])) / denom;
    logit[j] = p.lambda * nu[j] + p.f * std::log(s[j]);
  }
  const double m = std::max(logit[0], logit[1]);
  const double lse = m + std::log(std::exp(logit[0] - m) + std::exp(logit[1] - m));
  out.loglik = logit[y] - lse;
  if (!want_grad) return out;

  double prob[2] = {std::exp(logit[0] - lse), std::exp(logit[1] - lse)};
  out.g_lambda = spec.active[kLambda] ? nu[y] - (prob[0] * nu[0] + prob[1] * nu[1]) : 0.0;
  out.g_f = std::log(s[y]) - (prob[0] * std::log(s[0]) + prob[1] * std::log(s[1]));
  double g_phi = 0.0, g_delta = 0.0;
  const double mean_prior_nu = prior[0] * nu[0] + prior[1] * nu[1];
  for (int j = 0; j < 2; ++j) {
    const double dll_ds = p.f * ((j == y ? 1.0 : 0.0) - prob[j]) / s[j];
    g_phi += dll_ds * 2.0 * (prior[j] * total_n - static_cast<double>(n[j])) / (denom * denom);
    g_delta += dll_ds * strength * prior[j] * (nu[j] - mean_prior_nu) / denom;
  }
  out.g_phi_log = g_phi * p.phi;
  out.g_delta = spec.active[kDelta] ? g_delta : 0.0;
  return out;
}

// Correlation factor and, when requested, the derivative of every factor
// entry with respect to every unconstrained input, via forward-mode duals.
struct CorrBlock {
  int k = 0;
  std::vector<double> factor;       // k*k row-major
  double log_prior = 0.0;
  std::vector<double> grad_prior;   // d log_prior / d y, length m
  std::vector<double> dfactor;      // [entry * m + input], length k*k*m
};

template <int M>
CorrBlock corr_block_impl(std::span<const double> y, int k, bool want_grad) {
  CorrBlock block;
  block.k = k;
  const int m = k * (k - 1) / 2;
  if (!want_grad) {
    std::vector<double> yv(y.begin(), y.end());
    double lp = 0.0;
    block.factor = corr_cholesky(yv, k, &lp);
    block.log_prior = lp;
    return block;
  }
  std::vector<Dual<M>> yd(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) yd[static_cast<std::size_t>(i)] = Dual<M>::seed(y[i], i);
  Dual<M> lp(0.0);
  const auto fd = corr_cholesky(yd, k, &lp);
  block.factor.resize(static_cast<std::size_t>(k * k));
  block.dfactor.assign(static_cast<std::size_t>(k * k * m), 0.0);
  for (int e = 0; e < k * k; ++e) {
    block.factor[static_cast<std::size_t>(e)] = fd[static_cast<std::size_t>(e)].v;
    for (int i = 0; i < m; ++i)
      block.dfactor[static_cast<std::size_t>(e * m + i)] =
          fd[static_cast<std::size_t>(e)].d[static_cast<std::size_t>(i)];
  }
  block.log_prior = lp.v;
  block.grad_prior.assign(lp.d.begin(), lp.d.end());
  return block;
}

inline CorrBlock corr_block(std::span<const double> y, int k, bool want_grad) {
  switch (k) {
    case 1: {
      CorrBlock block;
      block.k = 1;
      block.factor = {1.0};
      return block;
    }
    case 2: return corr_block_impl<1>(y, k, want_grad);
    case 3: return corr_block_impl<3>(y, k, want_grad);
    case 4: return corr_block_impl<6>(y, k, want_grad);
    default: throw std::invalid_argument("corr_block: unsupported dimension");
  }
}

}  // namespace detail

// Behavioral parameters of individual i in task t / treatment c implied by
// an unconstrained parameter vector.
inline AgentParams individual_params(const ParamLayout& layout,
                                     std::span<const double> x, int individual,
                                     int task, int treatment) {
  const auto& spec = layout.spec;
  const int k = layout.effect_dim();
  const auto corr = detail::corr_block(
      x.subspan(static_cast<std::size_t>(layout.corr_offset()),
                static_cast<std::size_t>(layout.num_corr())),
      k, false);
  std::vector<double> u(static_cast<std::size_t>(k), 0.0);
  for (int a = 0; a < k; ++a) {
    double lz = 0.0;
    for (int b = 0; b <= a; ++b)
      lz += corr.factor[static_cast<std::size_t>(a * k + b)] *
            x[static_cast<std::size_t>(layout.z_index(individual, b))];
    u[static_cast<std::size_t>(a)] =
        std::exp(x[static_cast<std::size_t>(layout.sigma_offset() + a)]) * lz;
  }
  AgentParams params{0.0, 0.0, 0.0, 0.0};
  const auto value_of = [&](int dim, double fallback) {
    const int slot = layout.slot_of(dim);
    if (slot < 0) return fallback;
    return x[static_cast<std::size_t>(layout.fixed_index(slot, task))] +
           u[static_cast<std::size_t>(slot)];
  };
  params.lambda = value_of(kLambda, 0.0);
  params.f = value_of(kF, 0.0);
  if (spec.has_treatment_effects() && treatment != 0)
    params.f += x[static_cast<std::size_t>(layout.treatment_offset() + treatment - 1)];
  const int phi_slot = layout.slot_of(kPhi);
  params.phi = phi_slot < 0 ? 0.0 : std::exp(value_of(kPhi, 0.0));
  params.delta = value_of(kDelta, 0.0);
  return params;
}

// Hierarchical log posterior on the unconstrained scale; fills *grad with
// the exact gradient when non-null. Constant terms of the priors are
// dropped.
inline double log_posterior(const ParamLayout& layout, const InferenceData& data,
                            std::span<const double> x, std::vector<double>* grad) {
  const auto& spec = layout.spec;
  const int k = layout.effect_dim();
  const int n_ind = layout.num_individuals;
  if (static_cast<int>(x.size()) != layout.size())
    throw std::invalid_argument("log_posterior: parameter vector size mismatch");
  if (grad) grad->assign(x.size(), 0.0);
  const bool want_grad = grad != nullptr;

  const auto corr = detail::corr_block(
      x.subspan(static_cast<std::size_t>(layout.corr_offset()),
                static_cast<std::size_t>(layout.num_corr())),
      k, want_grad);

  std::vector<double> sigma(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a)
    sigma[static_cast<std::size_t>(a)] =
        std::exp(x[static_cast<std::size_t>(layout.sigma_offset() + a)]);

  // Individual effects u = diag(sigma) L z and the intermediate L z.
  std::vector<double> lz(static_cast<std::size_t>(n_ind * k), 0.0);
  std::vector<double> u(static_cast<std::size_t>(n_ind * k), 0.0);
  for (int i = 0; i < n_ind; ++i)
    for (int a = 0; a < k; ++a) {
      double acc = 0.0;
      for (int b = 0; b <= a; ++b)
        acc += corr.factor[static_cast<std::size_t>(a * k + b)] *
               x[static_cast<std::size_t>(layout.z_index(i, b))];
      lz[static_cast<std::size_t>(i * k + a)] = acc;
      u[static_cast<std::size_t>(i * k + a)] = sigma[static_cast<std::size_t>(a)] * acc;
    }

  const int slot_lambda = layout.slot_of(kLambda);
  const int slot_f = layout.slot_of(kF);
  const int slot_phi = layout.slot_of(kPhi);
  const int slot_delta = layout.slot_of(kDelta);

  double lp = 0.0;
  // dll/du accumulated per individual and slot (phi slot on log scale).
  std::vector<double> v(static_cast<std::size_t>(n_ind * k), 0.0);

  for (const auto& row : data.rows) {
    detail::RowParams p;
    const double* ui = &u[static_cast<std::size_t>(row.individual * k)];
    if (slot_lambda >= 0)
      p.lambda = x[static_cast<std::size_t>(layout.fixed_index(slot_lambda, row.task))] +
                 ui[slot_lambda];
    if (slot_f >= 0) {
      p.f = x[static_cast<std::size_t>(layout.fixed_index(slot_f, row.task))] + ui[slot_f];
      if (row.treatment != 0)
        p.f += x[static_cast<std::size_t>(layout.treatment_offset() + row.treatment - 1)];
    }
    if (slot_phi >= 0)
      p.phi = std::exp(
          x[static_cast<std::size_t>(layout.fixed_index(slot_phi, row.task))] +
          ui[slot_phi]);
    if (slot_delta >= 0)
      p.delta = x[static_cast<std::size_t>(layout.fixed_index(slot_delta, row.task))] +
                ui[slot_delta];

    const auto rg = detail::row_loglik(row, p, spec, want_grad);
    lp += rg.loglik;
    if (!want_grad) continue;
    double* vi = &v[static_cast<std::size_t>(row.individual * k)];
    if (slot_lambda >= 0) {
      (*grad)[static_cast<std::size_t>(layout.fixed_index(slot_lambda, row.task))] +=
          rg.g_lambda;
      vi[slot_lambda] += rg.g_lambda;
    }
    if (slot_f >= 0) {
      (*grad)[static_cast<std::size_t>(layout.fixed_index(slot_f, row.task))] += rg.g_f;
      if (row.treatment != 0)
        (*grad)[static_cast<std::size_t>(layout.treatment_offset() + row.treatment - 1)] +=
            rg.g_f;
      vi[slot_f] += rg.g_f;
    }
    if (slot_phi >= 0) {
      (*grad)[static_cast<std::size_t>(layout.fixed_index(slot_phi, row.task))] +=
          rg.g_phi_log;
      vi[slot_phi] += rg.g_phi_log;
    }
    if (slot_delta >= 0) {
      (*grad)[static_cast<std::size_t>(layout.fixed_index(slot_delta, row.task))] +=
          rg.g_delta;
      vi[slot_delta] += rg.g_delta;
    }
  }

  // Chain the pooled individual-effect gradients into z, log-sigma, and the
  // correlation factor inputs.
  if (want_grad) {
    std::vector<double> g_factor(static_cast<std::size_t>(k * k), 0.0);
    for (int i = 0; i < n_ind; ++i) {
      const double* vi = &v[static_cast<std::size_t>(i * k)];
      for (int a = 0; a < k; ++a) {
        (*grad)[static_cast<std::size_t>(layout.sigma_offset() + a)] +=
            vi[a] * u[static_cast<std::size_t>(i * k + a)];
        for (int b = 0; b <= a; ++b) {
          const double zb = x[static_cast<std::size_t>(layout.z_index(i, b))];
          (*grad)[static_cast<std::size_t>(layout.z_index(i, b))] +=
              vi[a] * sigma[static_cast<std::size_t>(a)] *
              corr.factor[static_cast<std::size_t>(a * k + b)];
          g_factor[static_cast<std::size_t>(a * k + b)] +=
              vi[a] * sigma[static_cast<std::size_t>(a)] * zb;
        }
      }
    }
    const int m = layout.num_corr();
    for (int e = 0; e < k * k; ++e)
      if (g_factor[static_cast<std::size_t>(e)] != 0.0)
        for (int q = 0; q < m; ++q)
          (*grad)[static_cast<std::size_t>(layout.corr_offset() + q)] +=
              g_factor[static_cast<std::size_t>(e)] *
              corr.dfactor[static_cast<std::size_t>(e * m + q)];
  }

  // Priors. Fixed and treatment effects: zero-mean normal with per-dimension
  // scales from the model spec (phi's fixed effect lives on the log scale,
  // implementing exp(N(0, sd))); treatment effects share f's scale. sigma:
  // Exponential(1) with the log-scale Jacobian. z: standard normal.
  // Correlation: LKJ(2) with its transform Jacobian, computed above.
  const auto active_dims = layout.spec.active_dims();
  for (int idx = 0; idx < layout.sigma_offset(); ++idx) {
    const int dim = idx < layout.treatment_offset()
                        ? active_dims[static_cast<std::size_t>(idx / layout.num_tasks)]
                        : kF;
    const double sd = layout.spec.prior_sd[static_cast<std::size_t>(dim)];
    const double prec = 1.0 / (sd * sd);
    const double val = x[static_cast<std::size_t>(idx)];
    lp += -0.5 * val * val * prec;
    if (want_grad) (*grad)[static_cast<std::size_t>(idx)] += -val * prec;
  }
  for (int a = 0; a < k; ++a) {
    const int idx = layout.sigma_offset() + a;
    lp += -sigma[static_cast<std::size_t>(a)] + x[static_cast<std::size_t>(idx)];
    if (want_grad)
      (*grad)[static_cast<std::size_t>(idx)] += -sigma[static_cast<std::size_t>(a)] + 1.0;
  }
  lp += corr.log_prior;
  if (want_grad)
    for (int q = 0; q < layout.num_corr(); ++q)
      (*grad)[static_cast<std::size_t>(layout.corr_offset() + q)] +=
          corr.grad_prior[static_cast<std::size_t>(q)];
  for (int idx = layout.z_offset(); idx < layout.size(); ++idx) {
    const double val = x[static_cast<std::size_t>(idx)];
    lp += -0.5 * val * val;
    if (want_grad) (*grad)[static_cast<std::size_t>(idx)] += -val;
  }
  return lp;
}

inline std::vector<double> grad_log_posterior(const ParamLayout& layout,
                                              const InferenceData& data,
                                              std::span<const double> x) {
  std::vector<double> grad;
  log_posterior(layout, data, x, &grad);
  return grad;
}

// Per-observation log likelihood of the observed choices at one draw.
inline std::vector<double> pointwise_loglik(const ParamLayout& layout,
                                            const InferenceData& data,
                                            std::span<const double> x) {
  const auto& spec = layout.spec;
  const int k = layout.effect_dim();
  const auto corr = detail::corr_block(
      x.subspan(static_cast<std::size_t>(layout.corr_offset()),
                static_cast<std::size_t>(layout.num_corr())),
      k, false);
  std::vector<double> u(static_cast<std::size_t>(layout.num_individuals * k), 0.0);
  for (int i = 0; i < layout.num_individuals; ++i)
    for (int a = 0; a < k; ++a) {
      double acc = 0.0;
      for (int b = 0; b <= a; ++b)
        acc += corr.factor[static_cast<std::size_t>(a * k + b)] *
               x[static_cast<std::size_t>(layout.z_index(i, b))];
      u[static_cast<std::size_t>(i * k + a)] =
          std::exp(x[static_cast<std::size_t>(layout.sigma_offset() + a)]) * acc;
    }
  const int slot_lambda = layout.slot_of(kLambda);
  const int slot_f = layout.slot_of(kF);
  const int slot_phi = layout.slot_of(kPhi);
  const int slot_delta = layout.slot_of(kDelta);
  std::vector<double> out;
  out.reserve(data.rows.size());
  for (const auto& row : data.rows) {
    detail::RowParams p;
    const double* ui = &u[static_cast<std::size_t>(row.individual * k)];
    if (slot_lambda >= 0)
      p.lambda = x[static_cast<std::size_t>(layout.fixed_index(slot_lambda, row.task))] +
                 ui[slot_lambda];
    if (slot_f >= 0) {
      p.f = x[static_cast<std::size_t>(layout.fixed_index(slot_f, row.task))] + ui[slot_f];
      if (row.treatment != 0)
        p.f += x[static_cast<std::size_t>(layout.treatment_offset() + row.treatment - 1)];
    }
    if (slot_phi >= 0)
      p.phi = std::exp(
          x[static_cast<std::size_t>(layout.fixed_index(slot_phi, row.task))] +
          ui[slot_phi]);
    if (slot_delta >= 0)
      p.delta = x[static_cast<std::size_t>(layout.fixed_index(slot_delta, row.task))] +
                ui[slot_delta];
    out.push_back(detail::row_loglik(row, p, spec, false).loglik);
  }
  return out;
}

// Probability of choosing alternative `chosen` per observation at one draw.
inline std::vector<double> pointwise_prob(const ParamLayout& layout,
                                          const InferenceData& data,
                                          std::span<const double> x) {
  auto ll = pointwise_loglik(layout, data, x);
  for (double& v : ll) v = std::exp(v);
  return ll;
}

}  // namespace soclearn
