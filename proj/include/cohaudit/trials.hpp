#pragma once

#include "cohaudit/ensembles.hpp"
#include "cohaudit/rip.hpp"
#include "cohaudit/solvers.hpp"

#include <string_view>
#include <variant>

namespace cohaudit {

enum class SolverKind { omp, iht, cosamp, bpdn };

std::string_view to_string(SolverKind s);
SolverKind solver_from_string(std::string_view name);

struct SolverSpec {
  SolverKind kind = SolverKind::omp;
  IhtOptions iht;
  CosampOptions cosamp;
  BpdnOptions bpdn;
  /// bpdn residual budget ε = epsilon_factor·σ·√n for noisy trials;
  /// noiseless trials use ε = noiseless_epsilon·‖y‖.
  double epsilon_factor = 1.1;
  double noiseless_epsilon = 1e-6;
};

/// Success conventions: noiseless trials succeed when the relative ℓ2 error
/// is at most kNoiselessSuccessTol; noisy trials succeed on exact support
/// recovery, where the estimated support is {i : |x̂_i| > 10σ}.
inline constexpr double kNoiselessSuccessTol = 1e-4;
inline constexpr double kNoisySupportFactor = 10.0;

struct TrialResult {
  Index k = 0;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  SparseSignal<double> truth;
  SparseSignal<double> estimate;
  double relative_error = 0.0;  // ‖x̂ − x‖/‖x‖ (absolute ‖x̂‖ when x = 0)
  double precision = 1.0;
  double recall = 1.0;
  bool success = false;
  Index iterations = 0;
  bool converged = false;
  bool rank_deficient = false;
  bool diverged = false;
  bool infeasible_epsilon = false;
};

/// Ground-truth k-sparse x (Gaussian values, uniform support), y = Mx + noise,
/// then the configured solver. Pure function of its arguments.
TrialResult recovery_trial(const MeasurementMatrix& m, Index k, const SolverSpec& solver,
                           double noise_sigma, std::uint64_t seed);

/// Runs `solver` on (m, y) with sparsity hint k.
SolveResult<double> run_solver(const MeasurementMatrix& m, const VectorXd& y, Index k,
                               const SolverSpec& solver, double noise_sigma);

/// Scores an estimate against the truth with the conventions above.
void score_trial(TrialResult& result, const VectorXd& truth, const VectorXd& estimate);

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval at 95% (z = 1.959964).
WilsonInterval wilson_interval(Index successes, Index trials);

struct PhasePoint {
  Index k = 0;
  Index trials = 0;
  Index successes = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Either one fixed matrix for every trial, or a fresh draw from the ensemble
/// for every (k, trial).
using MatrixSource = std::variant<MeasurementMatrix, EnsembleSpec>;

std::vector<PhasePoint> phase_curve(const MatrixSource& source, const std::vector<Index>& k_list,
                                    const SolverSpec& solver, Index trials, double noise_sigma,
                                    std::uint64_t seed, unsigned threads = 1);

/// Deterministic child seed for (seed, tag, index).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index);

}  // namespace cohaudit
