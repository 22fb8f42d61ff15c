#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace soclearn {

enum class ModelVariant { PBSI, PSI, P, SI };

inline const char* to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::PBSI: return "pbsi";
    case ModelVariant::PSI: return "psi";
    case ModelVariant::P: return "p";
    case ModelVariant::SI: return "si";
  }
  return "?";
}

inline ModelVariant variant_from_string(const std::string& s) {
  if (s == "pbsi") return ModelVariant::PBSI;
  if (s == "psi") return ModelVariant::PSI;
  if (s == "p") return ModelVariant::P;
  if (s == "si") return ModelVariant::SI;
  throw std::invalid_argument("unknown model variant '" + s + "'");
}

// Behavioral dimensions in canonical order.
enum Dim : int { kLambda = 0, kF = 1, kPhi = 2, kDelta = 3 };
inline constexpr std::array<const char*, 4> kDimNames{"lambda", "f", "phi", "delta"};
inline constexpr std::array<const char*, 2> kTaskNames{"quest", "paint"};

// Which behavioral parameters a model variant estimates. Pinned parameters
// are fixed at zero and carry no fixed effects, no individual effects and no
// priors, so the restricted posterior equals the full posterior with those
// blocks removed.
struct ModelSpec {
  ModelVariant variant = ModelVariant::PBSI;
  std::array<bool, 4> active{true, true, true, true};
  // Prior scales for the fixed effects of (lambda, f, phi-on-log-scale,
  // delta); treatment effects share f's scale. The reference analysis uses
  // unit scale everywhere, but the likelihood is nearly flat along the ridge
  // where lambda trades off against f*delta, so unit priors shrink population
  // means far below their generating values at desk-scale designs. Scale 2.5
  // keeps those priors weakly informative; the log-phi prior stays at unit
  // scale because the ridge is unbounded in the large-phi direction. See the
  // README section on priors.
  std::array<double, 4> prior_sd{2.5, 2.5, 1.0, 2.5};

  static ModelSpec make(ModelVariant v) {
    ModelSpec spec;
    spec.variant = v;
    switch (v) {
      case ModelVariant::PBSI:
        break;
      case ModelVariant::PSI:
        spec.active = {true, true, true, false};   // delta := 0
        break;
      case ModelVariant::P:
        spec.active = {true, false, false, false}; // f := 0; shares drop out
        break;
      case ModelVariant::SI:
        spec.active = {false, true, true, false};  // lambda := 0, delta := 0
        break;
    }
    return spec;
  }

  // Number of active behavioral dimensions (size of the individual effect).
  int effect_dim() const {
    int k = 0;
    for (bool a : active) k += a;
    return k;
  }

  bool has_treatment_effects() const { return active[kF]; }

  // Active dims in canonical order.
  std::vector<int> active_dims() const {
    std::vector<int> out;
    for (int d = 0; d < 4; ++d)
      if (active[static_cast<std::size_t>(d)]) out.push_back(d);
    return out;
  }
};

// Unconstrained parameter layout:
//   [fixed effects: per active dim x task]  (phi on log scale)
//   [treatment effects on f: reward, punish]  (if f active)
//   [log sigma: one per active dim]
//   [correlation factor: K(K-1)/2 canonical partial correlations]
//   [z: K per individual]
struct ParamLayout {
  ModelSpec spec;
  int num_tasks = 2;
  int num_individuals = 0;

  int effect_dim() const { return spec.effect_dim(); }
  int num_corr() const {
    const int k = effect_dim();
    return k * (k - 1) / 2;
  }
  int fixed_offset() const { return 0; }
  int treatment_offset() const { return num_tasks * effect_dim(); }
  int sigma_offset() const {
    return treatment_offset() + (spec.has_treatment_effects() ? 2 : 0);
  }
  int corr_offset() const { return sigma_offset() + effect_dim(); }
  int z_offset() const { return corr_offset() + num_corr(); }
  int size() const { return z_offset() + num_individuals * effect_dim(); }
  int population_size() const { return z_offset(); }

  // Index of the fixed effect for active-dim slot `slot` and task `t`.
  int fixed_index(int slot, int task) const { return slot * num_tasks + task; }
  int z_index(int individual, int slot) const {
    return z_offset() + individual * effect_dim() + slot;
  }

  // Slot of a behavioral dim among the active ones, or -1 if pinned.
  int slot_of(int dim) const {
    int slot = 0;
    for (int d = 0; d < 4; ++d) {
      if (d == dim) return spec.active[static_cast<std::size_t>(d)] ? slot : -1;
      if (spec.active[static_cast<std::size_t>(d)]) ++slot;
    }
    return -1;
  }

  // Human-readable names of the population parameters, constrained scale.
  std::vector<std::string> population_names() const {
    std::vector<std::string> names;
    const auto dims = spec.active_dims();
    for (std::size_t s = 0; s < dims.size(); ++s)
      for (int t = 0; t < num_tasks; ++t)
        names.push_back(std::string(kDimNames[static_cast<std::size_t>(dims[s])]) +
                        "_" + kTaskNames[static_cast<std::size_t>(t)]);
    if (spec.has_treatment_effects()) {
      names.emplace_back("f_effect_reward");
      names.emplace_back("f_effect_punish");
    }
    for (int d : dims)
      names.push_back(std::string("sigma_") + kDimNames[static_cast<std::size_t>(d)]);
    const int k = effect_dim();
    for (int i = 1; i < k; ++i)
      for (int j = 0; j < i; ++j)
        names.push_back("omega_" + std::to_string(i + 1) + std::to_string(j + 1));
    return names;
  }
};

// Forward-mode dual number carrying N partial derivatives; used to push
// exact gradients through the correlation-factor transform.
template <int N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit from constants
  static Dual seed(double value, int index) {
    Dual out(value);
    out.d[static_cast<std::size_t>(index)] = 1.0;
    return out;
  }

  Dual operator-() const {
    Dual out(-v);
    for (int i = 0; i < N; ++i) out.d[i] = -d[i];
    return out;
  }
  friend Dual operator+(const Dual& a, const Dual& b) {
    Dual out(a.v + b.v);
    for (int i = 0; i < N; ++i) out.d[i] = a.d[i] + b.d[i];
    return out;
  }
  friend Dual operator-(const Dual& a, const Dual& b) { return a + (-b); }
  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual out(a.v * b.v);
    for (int i = 0; i < N; ++i) out.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return out;
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    Dual out(a.v / b.v);
    for (int i = 0; i < N; ++i)
      out.d[i] = (a.d[i] * b.v - a.v * b.d[i]) / (b.v * b.v);
    return out;
  }
  Dual& operator+=(const Dual& o) { return *this = *this + o; }

  friend Dual sqrt(const Dual& a) {
    Dual out(std::sqrt(a.v));
    const double g = 0.5 / out.v;
    for (int i = 0; i < N; ++i) out.d[i] = g * a.d[i];
    return out;
  }
  friend Dual log(const Dual& a) {
    Dual out(std::log(a.v));
    for (int i = 0; i < N; ++i) out.d[i] = a.d[i] / a.v;
    return out;
  }
  friend Dual tanh(const Dual& a) {
    Dual out(std::tanh(a.v));
    const double g = 1.0 - out.v * out.v;
    for (int i = 0; i < N; ++i) out.d[i] = g * a.d[i];
    return out;
  }
};

namespace detail {
inline double value_of(double x) { return x; }
template <int N>
double value_of(const Dual<N>& x) { return x.v; }
using std::log;
using std::sqrt;
using std::tanh;
}  // namespace detail

// Cholesky factor of a correlation matrix from canonical partial
// correlations r = tanh(y), built row by row. Returns the K*K factor
// (row-major) and adds the log density of the LKJ(2) prior on the induced
// correlation matrix plus the log Jacobian of the full transform to
// *log_prior, so that the unconstrained y carries the intended prior.
template <typename Scalar>
std::vector<Scalar> corr_cholesky(const std::vector<Scalar>& y, int k,
                                  Scalar* log_prior) {
  using detail::log;
  using detail::sqrt;
  using detail::tanh;
  std::vector<Scalar> factor(static_cast<std::size_t>(k * k), Scalar(0.0));
  Scalar lp(0.0);
  factor[0] = Scalar(1.0);
  std::size_t idx = 0;
  for (int i = 1; i < k; ++i) {
    Scalar sum_sq(0.0);
    for (int j = 0; j < i; ++j) {
      const Scalar r = tanh(y[idx++]);
      // d r / d y = 1 - r^2
      lp += log(Scalar(1.0) - r * r);
      const Scalar scale = sqrt(Scalar(1.0) - sum_sq);
      // d L_ij / d r_ij = scale (the transform is triangular in (i,j) order)
      lp += log(scale);
      const Scalar lij = r * scale;
      factor[static_cast<std::size_t>(i * k + j)] = lij;
      sum_sq += lij * lij;
    }
    const Scalar diag = sqrt(Scalar(1.0) - sum_sq);
    factor[static_cast<std::size_t>(i * k + i)] = diag;
    // LKJ(eta = 2) density on the Cholesky factor: sum (K - i + 2eta - 3) log L_ii
    // with rows 1-indexed; for eta = 2 the exponent of row i+1 is K - i + 1.
    lp += Scalar(static_cast<double>(k - i + 1)) * log(diag);
  }
  if (log_prior) *log_prior += lp;
  return factor;
}

}  // namespace soclearn
