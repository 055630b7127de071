#include "cohaudit/trials.hpp"

#include "cohaudit/parallel.hpp"
#include "cohaudit/rng.hpp"

#include <cmath>

namespace cohaudit {

std::string_view to_string(SolverKind s) {
  switch (s) {
    case SolverKind::omp: return "omp";
    case SolverKind::iht: return "iht";
    case SolverKind::cosamp: return "cosamp";
    case SolverKind::bpdn: return "bpdn";
  }
  return "omp";
}

SolverKind solver_from_string(std::string_view name) {
  if (name == "omp") return SolverKind::omp;
  if (name == "iht") return SolverKind::iht;
  if (name == "cosamp") return SolverKind::cosamp;
  if (name == "bpdn") return SolverKind::bpdn;
  throw DomainError("unknown solver '" + std::string(name) + "'");
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  return Rng::stream(seed, tag, index).next_u64();
}

SolveResult<double> run_solver(const MeasurementMatrix& m, const VectorXd& y, Index k,
                               const SolverSpec& solver, double noise_sigma) {
  const MatrixXd& d = m.data();
  switch (solver.kind) {
    case SolverKind::omp: return omp(d, y, OmpStop::sparsity(k));
    case SolverKind::iht: return iht(d, y, k, solver.iht);
    case SolverKind::cosamp: return cosamp(d, y, k, solver.cosamp);
    case SolverKind::bpdn: {
      const double eps =
          noise_sigma > 0.0
              ? solver.epsilon_factor * noise_sigma * std::sqrt(static_cast<double>(m.rows()))
              : solver.noiseless_epsilon * y.norm();
      return bpdn(d, y, eps, solver.bpdn);
    }
  }
  throw UnsupportedError("unknown solver");
}

void score_trial(TrialResult& result, const VectorXd& truth, const VectorXd& estimate) {
  const double noise = result.noise_sigma;
  const double threshold = noise > 0.0 ? kNoisySupportFactor * noise : 0.0;
  result.estimate = SparseSignal<double>::from_dense(estimate, threshold);
  result.truth = SparseSignal<double>::from_dense(truth);
  const double truth_norm = truth.norm();
  const double err = (estimate - truth).norm();
  result.relative_error = truth_norm > 0.0 ? err / truth_norm : err;

  const auto& est = result.estimate.support;
  const auto& tru = result.truth.support;
  Index hits = 0;
  for (Index i : est) hits += std::binary_search(tru.begin(), tru.end(), i) ? 1 : 0;
  result.precision = est.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(est.size());
  result.recall = tru.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(tru.size());
  result.success = noise > 0.0 ? est == tru : result.relative_error <= kNoiselessSuccessTol;
}

TrialResult recovery_trial(const MeasurementMatrix& m, Index k, const SolverSpec& solver,
                           double noise_sigma, std::uint64_t seed) {
  if (k < 0 || k > m.cols()) throw DomainError("recovery_trial: need 0 <= k <= N");
  if (noise_sigma < 0.0) throw DomainError("recovery_trial: noise sigma must be non-negative");
  TrialResult result;
  result.k = k;
  result.seed = seed;
  result.noise_sigma = noise_sigma;

  Rng truth_rng = Rng::stream(seed, "trial:truth");
  IndexList support;
  VectorXd values;
  draw_sparse(truth_rng, m.cols(), k, CoefficientModel::gaussian, support, values);
  VectorXd x = VectorXd::Zero(m.cols());
  for (Index t = 0; t < k; ++t) x(support[static_cast<std::size_t>(t)]) = values(t);
  result.truth = SparseSignal<double>::from_dense(x);

  VectorXd y = m.data() * x;
  if (noise_sigma > 0.0) {
    Rng noise_rng = Rng::stream(seed, "trial:noise");
    for (Index i = 0; i < y.size(); ++i) y(i) += noise_sigma * noise_rng.normal();
  }

  const SolveResult<double> solved = run_solver(m, y, k, solver, noise_sigma);
  result.iterations = solved.iterations;
  result.converged = solved.converged;
  result.rank_deficient = solved.rank_deficient;
  result.diverged = solved.diverged;
  result.infeasible_epsilon = solved.infeasible_epsilon;
  score_trial(result, x, solved.estimate);
  return result;
}

WilsonInterval wilson_interval(Index successes, Index trials) {
  if (trials <= 0) throw DomainError("wilson_interval: trials must be positive");
  if (successes < 0 || successes > trials) {
    throw DomainError("wilson_interval: successes must lie in [0, trials]");
  }
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  // The interval touches 0 or 1 exactly at the extremes; rounding would miss it.
  const double low = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double high = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {low, high};
}

std::vector<PhasePoint> phase_curve(const MatrixSource& source, const std::vector<Index>& k_list,
                                    const SolverSpec& solver, Index trials, double noise_sigma,
                                    std::uint64_t seed, unsigned threads) {
  if (k_list.empty()) throw DomainError("phase_curve: k list must be nonempty");
  if (!std::is_sorted(k_list.begin(), k_list.end())) {
    throw DomainError("phase_curve: k list must be ascending");
  }
  if (trials < 1) throw DomainError("phase_curve: trials must be positive");
  const auto nk = static_cast<Index>(k_list.size());
  std::vector<char> success(static_cast<std::size_t>(nk * trials), 0);
  parallel_for(nk * trials, threads, [&](Index job) {
    const Index ki = job / trials;
    const auto index = static_cast<std::uint64_t>(job);
    const std::uint64_t trial_seed = derive_seed(seed, "phase:trial", index);
    const Index k = k_list[static_cast<std::size_t>(ki)];
    TrialResult r;
    if (const auto* fixed = std::get_if<MeasurementMatrix>(&source)) {
      r = recovery_trial(*fixed, k, solver, noise_sigma, trial_seed);
    } else {
      EnsembleSpec spec = std::get<EnsembleSpec>(source);
      spec.seed = derive_seed(seed, "phase:matrix", index);
      r = recovery_trial(generate(spec), k, solver, noise_sigma, trial_seed);
    }
    success[static_cast<std::size_t>(job)] = r.success ? 1 : 0;
  });
  std::vector<PhasePoint> curve;
  for (Index ki = 0; ki < nk; ++ki) {
    PhasePoint p;
    p.k = k_list[static_cast<std::size_t>(ki)];
    p.trials = trials;
    for (Index t = 0; t < trials; ++t) p.successes += success[static_cast<std::size_t>(ki * trials + t)];
    p.rate = static_cast<double>(p.successes) / static_cast<double>(trials);
    const WilsonInterval ci = wilson_interval(p.successes, trials);
    p.ci_low = ci.low;
    p.ci_high = ci.high;
    curve.push_back(p);
  }
  return curve;
}

}  // namespace cohaudit
