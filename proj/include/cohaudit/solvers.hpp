#pragma once

#include "cohaudit/core.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

namespace cohaudit {

/// Sparse vector of dimension `dim`: sorted support with the matching values.
template <typename Scalar>
struct SparseSignal {
  Index dim = 0;
  IndexList support;
  std::vector<Scalar> values;

  /// Entries with |v| > threshold.
  static SparseSignal from_dense(const Vector<Scalar>& v, Scalar threshold = Scalar(0)) {
    SparseSignal s;
    s.dim = v.size();
    for (Index i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) > threshold) {
        s.support.push_back(i);
        s.values.push_back(v(i));
      }
    }
    return s;
  }

  Vector<Scalar> to_dense() const {
    Vector<Scalar> v = Vector<Scalar>::Zero(dim);
    for (std::size_t t = 0; t < support.size(); ++t) v(support[t]) = values[t];
    return v;
  }
};

template <typename Scalar>
struct SolveResult {
  Vector<Scalar> estimate;  // dense, length N
  Index iterations = 0;
  Scalar residual_norm{};
  bool converged = false;
  bool rank_deficient = false;      // a least-squares step needed ridge regularization
  bool diverged = false;            // iht only
  bool infeasible_epsilon = false;  // bpdn only: no λ reached the residual target
  bool discrepancy_matched = false; // bpdn only: residual within the match tolerance
  Scalar lambda{};                  // bpdn / lasso only
  /// omp: residual norm after each step (first entry ‖y‖);
  /// lasso/bpdn: objective after each accepted iteration, when requested.
  std::vector<Scalar> trace;
};

/// OMP stopping rule: a fixed number of atoms or a residual tolerance.
struct OmpStop {
  Index atoms = -1;
  double residual_tol = 0.0;

  static OmpStop sparsity(Index k) { return {k, 0.0}; }
  static OmpStop residual(double tol) { return {-1, tol}; }
};

struct IhtOptions {
  std::optional<double> step;  // default 1/‖M‖₂²
  Index max_iter = 500;
  double tol = 1e-12;  // relative iterate change
};

struct CosampOptions {
  Index max_iter = 100;
  double tol = 1e-10;  // relative residual
};

struct LassoOptions {
  Index max_iter = 20000;
  double tol = 1e-10;  // relative iterate change
  std::optional<double> lipschitz;  // default 1.001·‖M‖₂²
  bool record_trace = false;
};

struct BpdnOptions {
  LassoOptions inner;
  Index bisection_iters = 20;
  double match_rel = 0.02;
  /// ε = 0 is treated as a residual target of basis_pursuit_tol·‖y‖.
  double basis_pursuit_tol = 1e-9;
};

// ---------------------------------------------------------------------------
// Building blocks

/// Indices of the k largest |v_i|, ties broken toward the lower index;
/// returned in ascending index order.
template <typename Derived>
IndexList top_k_indices(const Eigen::MatrixBase<Derived>& expr, Index k) {
  // Evaluate once: coefficient access on a product expression recomputes it.
  const Vector<typename Derived::Scalar> v = expr;
  k = std::clamp<Index>(k, 0, v.size());
  IndexList idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  auto before = [&](Index a, Index b) {
    const auto fa = std::abs(v(a));
    const auto fb = std::abs(v(b));
    return fa > fb || (fa == fb && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + k, idx.end(), before);
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// H_k: keep the k largest-magnitude entries, zero the rest.
template <typename Derived>
Vector<typename Derived::Scalar> hard_threshold(const Eigen::MatrixBase<Derived>& expr, Index k) {
  const Vector<typename Derived::Scalar> v = expr;
  Vector<typename Derived::Scalar> out = Vector<typename Derived::Scalar>::Zero(v.size());
  for (Index i : top_k_indices(v, k)) out(i) = v(i);
  return out;
}

template <typename Derived>
Vector<typename Derived::Scalar> soft_threshold(const Eigen::MatrixBase<Derived>& v,
                                                typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  return v.unaryExpr([tau](Scalar x) {
    return x > tau ? x - tau : (x < -tau ? x + tau : Scalar(0));
  });
}

/// Power-iteration estimate of ‖M‖₂² (largest eigenvalue of MᵀM), computed as
/// a Rayleigh quotient so that orthonormal M gives exactly 1.
template <typename Derived>
typename Derived::Scalar operator_norm_squared(const Eigen::MatrixBase<Derived>& m,
                                               Index max_iter = 1000,
                                               typename Derived::Scalar tol = 1e-12) {
  using Scalar = typename Derived::Scalar;
  if (m.cols() == 0) return Scalar(0);
  Vector<Scalar> v = Vector<Scalar>::Ones(m.cols());
  Scalar estimate(0);
  for (Index it = 0; it < max_iter; ++it) {
    const Vector<Scalar> mv = m * v;
    const Scalar next = mv.squaredNorm() / v.squaredNorm();
    Vector<Scalar> w = m.transpose() * mv;
    const Scalar wn = w.norm();
    if (wn == Scalar(0)) return next;
    v = w / wn;
    if (std::abs(next - estimate) <= tol * next) return next;
    estimate = next;
  }
  return estimate;
}

/// argmin_z ‖y − M_S z‖₂. Falls back to ridge (1e-12) when M_S is rank deficient.
template <typename DerivedM, typename DerivedY>
Vector<typename DerivedM::Scalar> least_squares_on_support(const Eigen::MatrixBase<DerivedM>& m,
                                                           const IndexList& support,
                                                           const Eigen::MatrixBase<DerivedY>& y,
                                                           bool& rank_deficient) {
  using Scalar = typename DerivedM::Scalar;
  const auto k = static_cast<Index>(support.size());
  Matrix<Scalar> sub(m.rows(), k);
  for (Index t = 0; t < k; ++t) sub.col(t) = m.col(support[static_cast<std::size_t>(t)]);
  Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(sub);
  if (qr.rank() == k) return qr.solve(y);
  rank_deficient = true;
  Matrix<Scalar> normal = sub.transpose() * sub;
  normal.diagonal().array() += Scalar(1e-12);
  return normal.ldlt().solve(sub.transpose() * y);
}

namespace detail {

template <typename DerivedM, typename DerivedY>
void check_system(const Eigen::MatrixBase<DerivedM>& m, const Eigen::MatrixBase<DerivedY>& y,
                  const char* who) {
  if (y.size() != m.rows()) {
    throw DimensionError(std::string(who) + ": y has length " + std::to_string(y.size()) +
                         " but M has " + std::to_string(m.rows()) + " rows");
  }
}

template <typename DerivedM, typename Scalar>
bool best_exhausted(const Eigen::MatrixBase<DerivedM>& m, const Vector<Scalar>& r) {
  return (m.transpose() * r).template lpNorm<Eigen::Infinity>() == Scalar(0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Solvers

/// Orthogonal matching pursuit with a least-squares refit after every atom.
template <typename DerivedM, typename DerivedY>
SolveResult<typename DerivedM::Scalar> omp(const Eigen::MatrixBase<DerivedM>& m,
                                           const Eigen::MatrixBase<DerivedY>& y, OmpStop stop) {
  using Scalar = typename DerivedM::Scalar;
  detail::check_system(m, y, "omp");
  if (stop.atoms > m.rows()) throw DomainError("omp: k must not exceed the number of rows");
  const Index max_atoms =
      stop.atoms >= 0 ? stop.atoms : std::min<Index>(m.rows(), m.cols());
  SolveResult<Scalar> res;
  res.estimate = Vector<Scalar>::Zero(m.cols());
  Vector<Scalar> r = y;
  IndexList support;
  std::vector<char> used(static_cast<std::size_t>(m.cols()), 0);
  Vector<Scalar> coef;
  res.trace.push_back(r.norm());
  auto done = [&] {
    return r.norm() <= Scalar(stop.residual_tol) ||
           static_cast<Index>(support.size()) >= max_atoms;
  };
  while (!done()) {
    const Vector<Scalar> corr = m.transpose() * r;
    Index best = -1;
    Scalar best_val(0);
    for (Index j = 0; j < corr.size(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const Scalar a = std::abs(corr(j));
      if (a > best_val) {
        best_val = a;
        best = j;
      }
    }
    if (best < 0) break;  // residual orthogonal to every unused column
    used[static_cast<std::size_t>(best)] = 1;
    support.insert(std::upper_bound(support.begin(), support.end(), best), best);
    coef = least_squares_on_support(m, support, y, res.rank_deficient);
    r = y;
    for (std::size_t t = 0; t < support.size(); ++t) r -= coef(static_cast<Index>(t)) * m.col(support[t]);
    ++res.iterations;
    res.trace.push_back(r.norm());
  }
  for (std::size_t t = 0; t < support.size(); ++t) res.estimate(support[t]) = coef(static_cast<Index>(t));
  res.residual_norm = r.norm();
  res.converged = static_cast<Index>(support.size()) >= max_atoms ||
                  res.residual_norm <= Scalar(stop.residual_tol) || detail::best_exhausted(m, r);
  return res;
}

/// Iterative hard thresholding x ← H_k(x + step·Mᵀ(y − Mx)).
///
/// step = 0 returns the zero vector with converged = false. The run is
/// flagged as diverged when the residual grows 10× over 50 iterations.
template <typename DerivedM, typename DerivedY>
SolveResult<typename DerivedM::Scalar> iht(const Eigen::MatrixBase<DerivedM>& m,
                                           const Eigen::MatrixBase<DerivedY>& y, Index k,
                                           const IhtOptions& opts = {}) {
  using Scalar = typename DerivedM::Scalar;
  detail::check_system(m, y, "iht");
  if (k < 0 || k > m.cols()) throw DomainError("iht: need 0 <= k <= N");
  SolveResult<Scalar> res;
  res.estimate = Vector<Scalar>::Zero(m.cols());
  Scalar step;
  if (opts.step) {
    step = Scalar(*opts.step);
  } else {
    const Scalar l = operator_norm_squared(m);
    step = l > Scalar(0) ? Scalar(1) / l : Scalar(0);
  }
  if (step < Scalar(0)) throw DomainError("iht: step must be non-negative");
  if (step == Scalar(0)) {
    res.residual_norm = y.norm();
    res.converged = false;
    return res;
  }
  Vector<Scalar>& x = res.estimate;
  Vector<Scalar> r = y;
  std::vector<Scalar> history{r.norm()};
  const Scalar tiny = std::numeric_limits<Scalar>::min();
  for (Index it = 0; it < opts.max_iter; ++it) {
    Vector<Scalar> candidate = hard_threshold(x + step * (m.transpose() * r), k);
    const Scalar change = (candidate - x).norm();
    if (change <= Scalar(opts.tol) * std::max(candidate.norm(), tiny)) {
      res.converged = true;
      break;
    }
    x = std::move(candidate);
    r = y - m * x;
    ++res.iterations;
    history.push_back(r.norm());
    const auto h = static_cast<Index>(history.size());
    if (h > 50 && history.back() >= Scalar(10) * history[static_cast<std::size_t>(h - 51)]) {
      res.diverged = true;
      break;
    }
  }
  res.residual_norm = r.norm();
  return res;
}

/// Compressive sampling matching pursuit (Needell & Tropp).
template <typename DerivedM, typename DerivedY>
SolveResult<typename DerivedM::Scalar> cosamp(const Eigen::MatrixBase<DerivedM>& m,
                                              const Eigen::MatrixBase<DerivedY>& y, Index k,
                                              const CosampOptions& opts = {}) {
  using Scalar = typename DerivedM::Scalar;
  detail::check_system(m, y, "cosamp");
  if (k < 0 || k > m.cols()) throw DomainError("cosamp: need 0 <= k <= N");
  SolveResult<Scalar> res;
  res.estimate = Vector<Scalar>::Zero(m.cols());
  const Scalar y_norm = y.norm();
  Vector<Scalar> r = y;
  Scalar r_norm = y_norm;
  if (y_norm == Scalar(0) || k == 0) {
    res.residual_norm = y_norm;
    res.converged = y_norm == Scalar(0);
    return res;
  }
  const Scalar target = Scalar(opts.tol) * y_norm;
  for (Index it = 0; it < opts.max_iter; ++it) {
    const Vector<Scalar> proxy = m.transpose() * r;
    IndexList merged = top_k_indices(proxy, 2 * k);
    for (Index i = 0; i < res.estimate.size(); ++i)
      if (res.estimate(i) != Scalar(0)) merged.push_back(i);
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    const Vector<Scalar> b = least_squares_on_support(m, merged, y, res.rank_deficient);
    Vector<Scalar> next = Vector<Scalar>::Zero(m.cols());
    for (Index t : top_k_indices(b, k)) next(merged[static_cast<std::size_t>(t)]) = b(t);
    Vector<Scalar> next_r = y - m * next;
    const Scalar next_norm = next_r.norm();
    ++res.iterations;
    const bool stagnated = next_norm >= r_norm - target;
    if (next_norm <= r_norm) {
      res.estimate = std::move(next);
      r = std::move(next_r);
      r_norm = next_norm;
    }
    if (r_norm <= target || stagnated) {
      res.converged = true;
      break;
    }
  }
  res.residual_norm = r_norm;
  return res;
}

/// min ½‖y − Mx‖² + λ‖x‖₁ by FISTA with function-value restart.
///
/// A momentum step that would increase the objective is replaced by a plain
/// proximal-gradient step from the current iterate, so the objective sequence
/// of accepted iterates is nonincreasing.
template <typename DerivedM, typename DerivedY>
SolveResult<typename DerivedM::Scalar> lasso(const Eigen::MatrixBase<DerivedM>& m,
                                             const Eigen::MatrixBase<DerivedY>& y,
                                             typename DerivedM::Scalar lambda,
                                             const LassoOptions& opts = {},
                                             const Vector<typename DerivedM::Scalar>* warm = nullptr) {
  using Scalar = typename DerivedM::Scalar;
  using Vec = Vector<Scalar>;
  detail::check_system(m, y, "lasso");
  if (lambda < Scalar(0)) throw DomainError("lasso: lambda must be non-negative");
  SolveResult<Scalar> res;
  res.lambda = lambda;
  const Scalar lip = opts.lipschitz ? Scalar(*opts.lipschitz)
                                    : Scalar(1.001) * operator_norm_squared(m);
  if (!(lip > Scalar(0))) {
    res.estimate = Vec::Zero(m.cols());
    res.residual_norm = y.norm();
    res.converged = true;
    return res;
  }
  const Scalar inv_l = Scalar(1) / lip;
  const Scalar tau = lambda * inv_l;
  const Scalar tiny = std::numeric_limits<Scalar>::min();

  Vec x = warm ? *warm : Vec::Zero(m.cols());
  Vec mx = m * x;
  Vec z = x;
  Vec mz = mx;
  auto objective = [&](const Vec& mv, const Vec& v) {
    return Scalar(0.5) * (mv - y).squaredNorm() + lambda * v.template lpNorm<1>();
  };
  Scalar f_x = objective(mx, x);
  if (opts.record_trace) res.trace.push_back(f_x);
  Scalar t(1);
  for (Index it = 0; it < opts.max_iter; ++it) {
    Vec u = soft_threshold(z - inv_l * (m.transpose() * (mz - y)), tau);
    Vec mu = m * u;
    Scalar f_u = objective(mu, u);
    if (f_u > f_x) {
      t = Scalar(1);
      u = soft_threshold(x - inv_l * (m.transpose() * (mx - y)), tau);
      mu = m * u;
      f_u = objective(mu, u);
      if (f_u > f_x) {  // no descent left at working precision
        res.converged = true;
        break;
      }
    }
    const Scalar t_next = (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * t * t)) / Scalar(2);
    const Scalar beta = (t - Scalar(1)) / t_next;
    const Scalar change = (u - x).norm();
    z = u + beta * (u - x);
    mz = mu + beta * (mu - mx);
    x = std::move(u);
    mx = std::move(mu);
    f_x = f_u;
    t = t_next;
    ++res.iterations;
    if (opts.record_trace) res.trace.push_back(f_x);
    if (change <= Scalar(opts.tol) * std::max(x.norm(), tiny)) {
      res.converged = true;
      break;
    }
  }
  res.residual_norm = (mx - y).norm();
  res.estimate = std::move(x);
  return res;
}

/// Basis pursuit denoising: min ‖x‖₁ s.t. ‖y − Mx‖₂ ≤ ε.
///
/// Solved through the Lagrangian form; λ is found by log-scale bisection on
/// [1e-10·‖Mᵀy‖∞, ‖Mᵀy‖∞] until the residual is within match_rel of ε.
/// ε ≥ ‖y‖ returns x = 0. When no λ in the bracket reaches ε the
/// smallest-residual solution is returned with infeasible_epsilon set.
template <typename DerivedM, typename DerivedY>
SolveResult<typename DerivedM::Scalar> bpdn(const Eigen::MatrixBase<DerivedM>& m,
                                            const Eigen::MatrixBase<DerivedY>& y,
                                            typename DerivedM::Scalar epsilon,
                                            const BpdnOptions& opts = {}) {
  using Scalar = typename DerivedM::Scalar;
  using Vec = Vector<Scalar>;
  detail::check_system(m, y, "bpdn");
  if (epsilon < Scalar(0)) throw DomainError("bpdn: epsilon must be non-negative");
  const Scalar y_norm = y.norm();
  if (epsilon >= y_norm) {
    SolveResult<Scalar> zero;
    zero.estimate = Vec::Zero(m.cols());
    zero.residual_norm = y_norm;
    zero.converged = true;
    zero.discrepancy_matched = epsilon == y_norm;
    return zero;
  }
  const Scalar target = std::max(epsilon, Scalar(opts.basis_pursuit_tol) * y_norm);
  const Scalar lambda_max = (m.transpose() * y).template lpNorm<Eigen::Infinity>();

  LassoOptions inner = opts.inner;
  if (!inner.lipschitz) inner.lipschitz = 1.001 * static_cast<double>(operator_norm_squared(m));

  Scalar log_lo = std::log(Scalar(1e-10) * lambda_max);
  Scalar log_hi = std::log(lambda_max);
  std::optional<SolveResult<Scalar>> feasible;  // largest λ with residual ≤ target (1 + match)
  std::optional<SolveResult<Scalar>> closest;   // smallest residual seen
  Vec warm = Vec::Zero(m.cols());
  Index total_iterations = 0;
  const Scalar upper = target * (Scalar(1) + Scalar(opts.match_rel));
  const Scalar lower = target * (Scalar(1) - Scalar(opts.match_rel));
  for (Index b = 0; b < opts.bisection_iters; ++b) {
    const Scalar lambda = std::exp(Scalar(0.5) * (log_lo + log_hi));
    SolveResult<Scalar> trial = lasso(m, y, lambda, inner, &warm);
    total_iterations += trial.iterations;
    warm = trial.estimate;
    const Scalar res_norm = trial.residual_norm;
    if (!closest || res_norm < closest->residual_norm) closest = trial;
    if (res_norm <= upper && (!feasible || trial.lambda > feasible->lambda)) feasible = trial;
    if (res_norm <= upper && (res_norm >= lower || epsilon == Scalar(0))) {
      feasible = std::move(trial);
      feasible->discrepancy_matched = true;
      break;
    }
    if (res_norm > target) {
      log_hi = std::log(lambda);
    } else {
      log_lo = std::log(lambda);
    }
  }
  SolveResult<Scalar> out = feasible ? *feasible : *closest;
  out.infeasible_epsilon = !feasible.has_value();
  out.iterations = total_iterations;
  out.trace.clear();
  return out;
}

}  // namespace cohaudit
