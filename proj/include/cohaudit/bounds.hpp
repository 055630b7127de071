#pragma once

#include "cohaudit/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cohaudit {

/// Sparsity thresholds implied by a coherence profile.
///
/// worst_case_k      ½(1 + 1/μ)               deterministic bound
/// heuristic_k       ½(1 + 1/(2σ))            single-coefficient Gaussian heuristic
/// bernstein_k       ½(1 + 1/(4σ²))           scalar Bernstein RIP width
/// operator_k        1/(4σ)                   operator-Bernstein RIP width
/// bpdn_stable_k     1 + σ⁻²/9                stable ℓ1 (BPDN) recovery
///
/// The *_floor fields are the largest admissible integer sparsities.
template <typename Scalar>
struct BoundReport {
  Scalar mu{};
  Scalar sigma_mu{};
  Scalar worst_case_k{};
  Scalar heuristic_k{};
  Scalar bernstein_k{};
  Scalar operator_k{};
  Scalar bpdn_stable_k{};
  long long worst_case_floor = 0;
  long long heuristic_floor = 0;
  long long bernstein_floor = 0;
  long long operator_floor = 0;
  long long bpdn_stable_floor = 0;
};

enum class RipVariant { bernstein, operator_bernstein };

template <typename Scalar>
struct RipWidth {
  Index k = 1;
  RipVariant variant = RipVariant::bernstein;
  Scalar g{};
};

template <typename Scalar>
struct SeparationCondition {
  Scalar g_x{};
  Scalar g_e{};
  Scalar g_joint{};  // max(g_x, g_e) + σ_μm
  Index w = 0;       // n_x + n_e
  Scalar margin{};   // 1 − g_joint − σ_μm·√w
  bool ok = false;
  // Variant that keeps the √(n_x n_e) factor of the deterministic
  // cross-term chain: g = max(g_x, g_e) + σ_μm·√(n_x n_e).
  Scalar g_joint_scaled{};
  Scalar margin_scaled{};
  bool ok_scaled = false;
};

/// Floor that tolerates a few ulp of rounding error accumulated in the
/// threshold arithmetic, so that e.g. σ = 1/√n reproduces ⌊1 + n/9⌋.
template <typename Scalar>
long long threshold_floor(Scalar x) {
  const Scalar slack = Scalar(64) * std::numeric_limits<Scalar>::epsilon() * std::abs(x);
  return static_cast<long long>(std::floor(x + slack));
}

template <typename Scalar>
BoundReport<Scalar> sparsity_bounds(Scalar mu, Scalar sigma_mu) {
  if (!(mu > Scalar(0) && mu <= Scalar(1))) {
    throw DomainError("sparsity_bounds: mutual coherence must lie in (0, 1], got " +
                      std::to_string(static_cast<double>(mu)));
  }
  if (!(sigma_mu > Scalar(0) && sigma_mu <= Scalar(1))) {
    throw DomainError("sparsity_bounds: coherence std must lie in (0, 1], got " +
                      std::to_string(static_cast<double>(sigma_mu)));
  }
  BoundReport<Scalar> r;
  r.mu = mu;
  r.sigma_mu = sigma_mu;
  r.worst_case_k = Scalar(0.5) * (Scalar(1) + Scalar(1) / mu);
  r.heuristic_k = Scalar(0.5) * (Scalar(1) + Scalar(1) / (Scalar(2) * sigma_mu));
  r.bernstein_k = Scalar(0.5) * (Scalar(1) + Scalar(1) / (Scalar(4) * sigma_mu * sigma_mu));
  r.operator_k = Scalar(1) / (Scalar(4) * sigma_mu);
  r.bpdn_stable_k = Scalar(1) + Scalar(1) / (Scalar(9) * sigma_mu * sigma_mu);
  r.worst_case_floor = threshold_floor(r.worst_case_k);
  r.heuristic_floor = threshold_floor(r.heuristic_k);
  r.bernstein_floor = threshold_floor(r.bernstein_k);
  r.operator_floor = threshold_floor(r.operator_k);
  r.bpdn_stable_floor = threshold_floor(r.bpdn_stable_k);
  return r;
}

/// Lower bound on Pr(|μ_r (k−1)| < 1) for μ_r ~ N(0, σ²):
/// 1 − exp(−1/(2(k−1)²σ²)). Returns 1 for k = 1 (the event is certain).
template <typename Scalar>
Scalar pairwise_tail_bound(Index k, Scalar sigma_mu) {
  if (k < 1) throw DomainError("pairwise_tail_bound: k must be >= 1");
  if (!(sigma_mu > Scalar(0))) throw DomainError("pairwise_tail_bound: sigma must be positive");
  if (k == 1) return Scalar(1);
  const Scalar km1 = static_cast<Scalar>(k - 1);
  const Scalar p = Scalar(1) - std::exp(-Scalar(1) / (Scalar(2) * km1 * km1 * sigma_mu * sigma_mu));
  return std::clamp(p, Scalar(0), Scalar(1));
}

/// Bernstein tail for the off-diagonal quadratic form:
/// Pr(|Σ_{i≠j} μ_ij x_i x_j| > t) ≤ min(1, 2 exp(−t²/(2σ²(k−1)‖x‖⁴))).
template <typename Scalar>
Scalar quadratic_form_tail_bound(Scalar t, Index k, Scalar sigma_mu, Scalar x_norm) {
  if (!(t > Scalar(0)) || k < 2 || !(sigma_mu > Scalar(0)) || !(x_norm > Scalar(0))) {
    throw DomainError("quadratic_form_tail_bound: need t > 0, k >= 2, sigma > 0, |x| > 0");
  }
  const Scalar x4 = x_norm * x_norm * x_norm * x_norm;
  const Scalar expo =
      -(t * t) / (Scalar(2) * sigma_mu * sigma_mu * static_cast<Scalar>(k - 1) * x4);
  return std::min(Scalar(1), Scalar(2) * std::exp(expo));
}

/// Operator-Bernstein tail for the k-column Gram deviation:
/// Pr(‖D_kᵀD_k − I‖ > t) ≤ min(1, (k(k−1)/2) exp(−t²/(2k(k−1)σ²))).
template <typename Scalar>
Scalar operator_tail_bound(Scalar t, Index k, Scalar sigma_mu) {
  if (!(t > Scalar(0)) || k < 2 || !(sigma_mu > Scalar(0))) {
    throw DomainError("operator_tail_bound: need t > 0, k >= 2, sigma > 0");
  }
  const Scalar pairs = static_cast<Scalar>(k) * static_cast<Scalar>(k - 1);
  const Scalar expo = -(t * t) / (Scalar(2) * pairs * sigma_mu * sigma_mu);
  return std::min(Scalar(1), Scalar(0.5) * pairs * std::exp(expo));
}

/// Half-width g of the statistical RIP band [1 − g, 1 + g] for k-sparse vectors.
template <typename Scalar>
RipWidth<Scalar> rip_width(Index k, Scalar sigma_mu, RipVariant variant) {
  if (k < 1) throw DomainError("rip_width: k must be >= 1");
  if (sigma_mu < Scalar(0)) throw DomainError("rip_width: sigma must be non-negative");
  const Scalar km1 = static_cast<Scalar>(k - 1);
  const Scalar spread = variant == RipVariant::bernstein ? km1 : static_cast<Scalar>(k) * km1;
  return {k, variant, Scalar(2) * sigma_mu * std::sqrt(spread)};
}

/// Stability condition of ℓ1 recovery: 1 − 2σ√(k−1) − σ√k ≥ 0.
template <typename Scalar>
bool stable_recovery_feasible(Index k, Scalar sigma_mu) {
  if (k < 1) throw DomainError("stable_recovery_feasible: k must be >= 1");
  return Scalar(1) - Scalar(2) * sigma_mu * std::sqrt(static_cast<Scalar>(k - 1)) -
             sigma_mu * std::sqrt(static_cast<Scalar>(k)) >=
         Scalar(0);
}

/// Admissibility of two-dictionary separation with sparsities n_x and n_e.
template <typename Scalar>
SeparationCondition<Scalar> separation_condition(Scalar sigma_d, Scalar sigma_b,
                                                 Scalar sigma_mu_m, Index n_x, Index n_e) {
  if (sigma_d < Scalar(0) || sigma_b < Scalar(0) || sigma_mu_m < Scalar(0)) {
    throw DomainError("separation_condition: standard deviations must be non-negative");
  }
  if (n_x < 1 || n_e < 1) throw DomainError("separation_condition: sparsities must be >= 1");
  SeparationCondition<Scalar> c;
  c.g_x = Scalar(2) * sigma_d * std::sqrt(static_cast<Scalar>(n_x - 1));
  c.g_e = Scalar(2) * sigma_b * std::sqrt(static_cast<Scalar>(n_e - 1));
  c.w = n_x + n_e;
  const Scalar sqrt_w = std::sqrt(static_cast<Scalar>(c.w));
  c.g_joint = std::max(c.g_x, c.g_e) + sigma_mu_m;
  c.margin = Scalar(1) - c.g_joint - sigma_mu_m * sqrt_w;
  c.ok = c.margin > Scalar(0);
  c.g_joint_scaled = std::max(c.g_x, c.g_e) +
                     sigma_mu_m * std::sqrt(static_cast<Scalar>(n_x) * static_cast<Scalar>(n_e));
  c.margin_scaled = Scalar(1) - c.g_joint_scaled - sigma_mu_m * sqrt_w;
  c.ok_scaled = c.margin_scaled > Scalar(0);
  return c;
}

}  // namespace cohaudit
