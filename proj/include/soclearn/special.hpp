#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace soclearn {

// Digamma via upward recurrence to x >= 10 followed by the asymptotic series
// psi(x) ~ log(x) - 1/(2x) - sum B_{2n} / (2n x^{2n}).
inline double digamma(double x) {
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv;
  // Bernoulli-number coefficients B_2/2, B_4/4, ... of the series.
  result -= inv2 * (1.0 / 12.0 -
                    inv2 * (1.0 / 120.0 -
                            inv2 * (1.0 / 252.0 -
                                    inv2 * (1.0 / 240.0 - inv2 / 132.0))));
  return result;
}

inline double log_sum_exp(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

inline std::vector<double> softmax(std::span<const double> x) {
  std::vector<double> out(x.size());
  double m = x[0];
  for (double v : x) m = std::max(m, v);
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = std::exp(x[j] - m);
    s += out[j];
  }
  for (double& v : out) v /= s;
  return out;
}

}  // namespace soclearn
