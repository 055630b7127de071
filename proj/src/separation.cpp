#include "cohaudit/separation.hpp"

#include "cohaudit/parallel.hpp"
#include "cohaudit/rng.hpp"

#include <cmath>

namespace cohaudit {

namespace {

double dictionary_sigma(const MeasurementMatrix& m) {
  if (m.cols() < 2) return 0.0;
  return profile_matrix(m).std;
}

VectorXd sparse_vector(Rng& rng, Index dim, Index k, double scale) {
  IndexList support;
  VectorXd values;
  draw_sparse(rng, dim, k, CoefficientModel::gaussian, support, values);
  VectorXd v = VectorXd::Zero(dim);
  for (Index t = 0; t < k; ++t) v(support[static_cast<std::size_t>(t)]) = scale * values(t);
  return v;
}

double relative_error(const VectorXd& estimate, const VectorXd& truth) {
  const double tn = truth.norm();
  const double err = (estimate - truth).norm();
  return tn > 0.0 ? err / tn : err;
}

}  // namespace

MeasurementMatrix joint_dictionary(const MeasurementMatrix& d, const MeasurementMatrix& b) {
  if (d.rows() != b.rows()) {
    throw DimensionError("joint_dictionary: row mismatch " + std::to_string(d.rows()) + " vs " +
                         std::to_string(b.rows()));
  }
  MatrixXd joint(d.rows(), d.cols() + b.cols());
  joint << d.data(), b.data();
  return MeasurementMatrix(std::move(joint));
}

SeparationStats separation_statistics(const MeasurementMatrix& d, const MeasurementMatrix& b) {
  if (d.rows() != b.rows()) {
    throw DimensionError("separation: row mismatch " + std::to_string(d.rows()) + " vs " +
                         std::to_string(b.rows()));
  }
  SeparationStats s;
  s.sigma_d = dictionary_sigma(d);
  s.sigma_b = dictionary_sigma(b);
  if (d.cols() > 0 && b.cols() > 0) {
    const CrossCoherenceProfile cross = cross_coherence(d, b);
    s.sigma_mu_m = cross.sigma_mu_m;
    s.mu_m = cross.mu_m;
  }
  return s;
}

SeparationResult separate(const SeparationProblem& p, const BpdnOptions& options,
                          const SeparationStats* stats) {
  if (p.d.cols() == 0) throw DimensionError("separate: D must have columns");
  if (p.d.rows() != p.b.rows() || p.y.size() != p.d.rows()) {
    throw DimensionError("separate: D, B and y must share the row count");
  }
  if (p.n_x < 0 || p.n_e < 0) throw DomainError("separate: sparsities must be non-negative");
  SeparationResult out;
  out.stats = stats ? *stats : separation_statistics(p.d, p.b);
  out.condition = separation_condition(out.stats.sigma_d, out.stats.sigma_b,
                                       out.stats.sigma_mu_m, std::max<Index>(p.n_x, 1),
                                       std::max<Index>(p.n_e, 1));

  const MeasurementMatrix joint = joint_dictionary(p.d, p.b);
  out.solve = bpdn(joint.data(), p.y, p.epsilon, options);
  const VectorXd x = out.solve.estimate.head(p.d.cols());
  const VectorXd e = out.solve.estimate.tail(p.b.cols());
  out.x_hat = SparseSignal<double>::from_dense(x);
  out.e_hat = SparseSignal<double>::from_dense(e);
  out.feature_d = p.d.data() * x;
  out.feature_b = p.b.cols() > 0 ? VectorXd(p.b.data() * e) : VectorXd::Zero(p.d.rows());
  return out;
}

std::pair<MeasurementMatrix, MeasurementMatrix> spikes_fourier_preset(Index n) {
  return {identity_dictionary(n), fourier_dictionary(n)};
}

SeparationTrial separation_trial(const MeasurementMatrix& d, const MeasurementMatrix& b, Index n_x,
                                 Index n_e, double noise_sigma, std::uint64_t seed,
                                 const SeparationStats& stats, double coefficient_scale_e,
                                 const BpdnOptions& options) {
  if (n_x < 0 || n_x > d.cols() || n_e < 0 || n_e > b.cols()) {
    throw DomainError("separation_trial: sparsities exceed dictionary sizes");
  }
  SeparationTrial trial;
  trial.seed = seed;
  Rng rng = Rng::stream(seed, "separation:truth");
  const VectorXd x = sparse_vector(rng, d.cols(), n_x, 1.0);
  const VectorXd e = sparse_vector(rng, b.cols(), n_e, coefficient_scale_e);
  VectorXd y = d.data() * x;
  if (b.cols() > 0) y += b.data() * e;
  if (noise_sigma > 0.0) {
    Rng noise = Rng::stream(seed, "separation:noise");
    for (Index i = 0; i < y.size(); ++i) y(i) += noise_sigma * noise.normal();
  }
  const double eps = noise_sigma > 0.0
                         ? 1.1 * noise_sigma * std::sqrt(static_cast<double>(y.size()))
                         : 1e-6 * y.norm();
  SeparationProblem problem{d, b, y, eps, n_x, n_e};
  trial.result = separate(problem, options, &stats);
  trial.x_relative_error = relative_error(trial.result.x_hat.to_dense(), x);
  trial.e_relative_error = relative_error(trial.result.e_hat.to_dense(), e);
  if (noise_sigma > 0.0) {
    const double thr = kNoisySupportFactor * noise_sigma;
    trial.success =
        SparseSignal<double>::from_dense(trial.result.x_hat.to_dense(), thr).support ==
            SparseSignal<double>::from_dense(x).support &&
        SparseSignal<double>::from_dense(trial.result.e_hat.to_dense(), thr).support ==
            SparseSignal<double>::from_dense(e).support;
  } else {
    trial.success = trial.x_relative_error <= kSeparationSuccessTol &&
                    trial.e_relative_error <= kSeparationSuccessTol;
  }
  return trial;
}

TrialResult robust_recovery_trial(const MeasurementMatrix& d, Index k, Index n_e_corruptions,
                                  double noise_sigma, std::uint64_t seed, double corruption_scale,
                                  const BpdnOptions& options) {
  const Index n = d.rows();
  if (n_e_corruptions < 0 || n_e_corruptions > n) {
    throw DomainError("robust_recovery_trial: corruptions must lie in [0, n]");
  }
  if (k < 0 || k > d.cols()) throw DomainError("robust_recovery_trial: need 0 <= k <= N");
  const MeasurementMatrix b = identity_dictionary(n);
  const SeparationStats stats = separation_statistics(d, b);
  SeparationTrial sep =
      separation_trial(d, b, k, n_e_corruptions, noise_sigma, seed, stats, corruption_scale, options);

  // Re-derive the truth exactly as separation_trial drew it.
  Rng rng = Rng::stream(seed, "separation:truth");
  const VectorXd x = sparse_vector(rng, d.cols(), k, 1.0);

  TrialResult r;
  r.k = k;
  r.seed = seed;
  r.noise_sigma = noise_sigma;
  r.truth = SparseSignal<double>::from_dense(x);
  r.iterations = sep.result.solve.iterations;
  r.converged = sep.result.solve.converged;
  r.infeasible_epsilon = sep.result.solve.infeasible_epsilon;
  score_trial(r, x, sep.result.x_hat.to_dense());
  return r;
}

JointRipReport joint_rip_check(const MeasurementMatrix& d, const MeasurementMatrix& b, Index n_x,
                               Index n_e, Index trials, std::uint64_t seed, unsigned threads) {
  if (d.rows() != b.rows()) throw DimensionError("joint_rip_check: row mismatch");
  if (n_x < 1 || n_x > d.cols()) throw DomainError("joint_rip_check: need 1 <= n_x <= N_x");
  if (b.cols() == 0 ? n_e != 0 : (n_e < 1 || n_e > b.cols())) {
    throw DomainError("joint_rip_check: need 1 <= n_e <= N_e (n_e = 0 only for an empty B)");
  }
  if (trials < 1) throw DomainError("joint_rip_check: trials must be positive");

  JointRipReport rep;
  rep.stats = separation_statistics(d, b);
  rep.g_x = 2.0 * rep.stats.sigma_d * std::sqrt(static_cast<double>(n_x - 1));
  rep.g_e = n_e > 0 ? 2.0 * rep.stats.sigma_b * std::sqrt(static_cast<double>(n_e - 1)) : 0.0;
  rep.g = std::max(rep.g_x, rep.g_e) + rep.stats.sigma_mu_m;
  rep.ratios.assign(static_cast<std::size_t>(trials), 0.0);
  std::vector<double> gaps(static_cast<std::size_t>(trials), 0.0);

  parallel_for(trials, threads, [&](Index t) {
    Rng rng = Rng::stream(seed, "joint-rip", static_cast<std::uint64_t>(t));
    VectorXd x;
    VectorXd e;
    do {
      x = sparse_vector(rng, d.cols(), n_x, 1.0);
      e = n_e > 0 ? sparse_vector(rng, b.cols(), n_e, 1.0) : VectorXd::Zero(b.cols());
    } while (x.squaredNorm() + e.squaredNorm() == 0.0);
    const VectorXd dx = d.data() * x;
    const VectorXd be = b.cols() > 0 ? VectorXd(b.data() * e) : VectorXd::Zero(d.rows());
    const double direct = (dx + be).squaredNorm();
    const double split = dx.squaredNorm() + be.squaredNorm() + 2.0 * dx.dot(be);
    rep.ratios[static_cast<std::size_t>(t)] = direct / (x.squaredNorm() + e.squaredNorm());
    gaps[static_cast<std::size_t>(t)] = std::abs(direct - split);
  });

  Index inside = 0;
  for (double r : rep.ratios) inside += in_band(r, rep.g) ? 1 : 0;
  rep.in_band_frequency = static_cast<double>(inside) / static_cast<double>(trials);
  for (double gap : gaps) rep.max_energy_identity_gap = std::max(rep.max_energy_identity_gap, gap);
  return rep;
}

}  // namespace cohaudit
