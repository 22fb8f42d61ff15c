#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace soclearn {

struct WaicResult {
  double waic = 0.0;
  double lppd = 0.0;
  double penalty = 0.0;
  std::vector<double> pointwise;  // -2 (lppd_m - penalty_m) per observation
};

// WAIC = -2 (lppd - penalty) from a draws x observations matrix of log
// likelihoods. lppd_m uses log-sum-exp over draws; the penalty is the
// unbiased sample variance of the log likelihoods per observation.
inline WaicResult waic(const std::vector<std::vector<double>>& pointwise_loglik) {
  const std::size_t draws = pointwise_loglik.size();
  if (draws < 2) throw std::invalid_argument("waic: at least 2 draws required");
  const std::size_t num_obs = pointwise_loglik[0].size();
  for (const auto& row : pointwise_loglik)
    if (row.size() != num_obs) throw std::invalid_argument("waic: ragged matrix");

  WaicResult out;
  out.pointwise.resize(num_obs);
  for (std::size_t m = 0; m < num_obs; ++m) {
    double max_ll = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < draws; ++s)
      max_ll = std::max(max_ll, pointwise_loglik[s][m]);
    double sum_exp = 0.0, mean = 0.0;
    for (std::size_t s = 0; s < draws; ++s) {
      sum_exp += std::exp(pointwise_loglik[s][m] - max_ll);
      mean += pointwise_loglik[s][m];
    }
    mean /= static_cast<double>(draws);
    double var = 0.0;
    for (std::size_t s = 0; s < draws; ++s) {
      const double d = pointwise_loglik[s][m] - mean;
      var += d * d;
    }
    var /= static_cast<double>(draws - 1);
    const double lppd_m = max_ll + std::log(sum_exp / static_cast<double>(draws));
    out.lppd += lppd_m;
    out.penalty += var;
    out.pointwise[m] = -2.0 * (lppd_m - var);
  }
  out.waic = -2.0 * (out.lppd - out.penalty);
  return out;
}

}  // namespace soclearn
