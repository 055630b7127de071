#pragma once

#include "cohaudit/bounds.hpp"
#include "cohaudit/coherence.hpp"
#include "cohaudit/trials.hpp"

namespace cohaudit {

/// y ≈ D x + B e with x sparse in D and e sparse in B.
struct SeparationProblem {
  MeasurementMatrix d;
  MeasurementMatrix b;
  VectorXd y;
  double epsilon = 0.0;
  Index n_x = 0;
  Index n_e = 0;
};

/// Measured coherence statistics that feed the admissibility condition.
/// Dictionaries with fewer than two columns contribute σ = 0, and an empty
/// B contributes σ_μm = 0.
struct SeparationStats {
  double sigma_d = 0.0;
  double sigma_b = 0.0;
  double sigma_mu_m = 0.0;
  double mu_m = 0.0;
};

struct SeparationResult {
  SparseSignal<double> x_hat;
  SparseSignal<double> e_hat;
  VectorXd feature_d;  // D x̂
  VectorXd feature_b;  // B ê
  SeparationStats stats;
  SeparationCondition<double> condition;
  SolveResult<double> solve;
};

/// [D, B]: D's columns first, then B's.
MeasurementMatrix joint_dictionary(const MeasurementMatrix& d, const MeasurementMatrix& b);

SeparationStats separation_statistics(const MeasurementMatrix& d, const MeasurementMatrix& b);

/// BPDN on the joint dictionary, split at column N_x. Pass precomputed
/// `stats` to skip recomputing the coherence statistics.
SeparationResult separate(const SeparationProblem& problem, const BpdnOptions& options = {},
                          const SeparationStats* stats = nullptr);

/// The spikes (identity) and real Fourier sinusoid dictionaries of size n.
std::pair<MeasurementMatrix, MeasurementMatrix> spikes_fourier_preset(Index n);

struct SeparationTrial {
  std::uint64_t seed = 0;
  double x_relative_error = 0.0;
  double e_relative_error = 0.0;
  bool success = false;  // both errors ≤ 1e-3 noiseless, supports exact when noisy
  SeparationResult result;
};

/// Random n_x-sparse x in D and n_e-sparse e in B (Gaussian values),
/// y = Dx + Be + noise, then separate(). ε = 1.1σ√n when noisy,
/// 1e-6·‖y‖ otherwise. `coefficient_scale_e` multiplies e's values.
SeparationTrial separation_trial(const MeasurementMatrix& d, const MeasurementMatrix& b, Index n_x,
                                 Index n_e, double noise_sigma, std::uint64_t seed,
                                 const SeparationStats& stats, double coefficient_scale_e = 1.0,
                                 const BpdnOptions& options = {});

inline constexpr double kSeparationSuccessTol = 1e-3;

/// Sparse-corruption robust recovery: B = I_n, corruption values are
/// `corruption_scale` times standard normals on n_e random coordinates.
TrialResult robust_recovery_trial(const MeasurementMatrix& d, Index k, Index n_e_corruptions,
                                  double noise_sigma, std::uint64_t seed,
                                  double corruption_scale = 10.0, const BpdnOptions& options = {});

struct JointRipReport {
  SeparationStats stats;
  double g_x = 0.0;
  double g_e = 0.0;
  double g = 0.0;  // max(g_x, g_e) + σ_μm
  double in_band_frequency = 0.0;
  double max_energy_identity_gap = 0.0;  // |‖D̃x̃‖² − (‖Dx‖² + ‖Be‖² + 2⟨Dx,Be⟩)|
  std::vector<double> ratios;
};

/// Samples (n_x, n_e)-sparse pairs and measures ‖D̃x̃‖²/‖x̃‖² against
/// [1 − g, 1 + g]. With an empty B (n_e must be 0) g is the single-dictionary
/// Bernstein width.
JointRipReport joint_rip_check(const MeasurementMatrix& d, const MeasurementMatrix& b, Index n_x,
                               Index n_e, Index trials, std::uint64_t seed, unsigned threads = 1);

}  // namespace cohaudit
