#pragma once

#include "cohaudit/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cohaudit {

/// Signed inner products ⟨d_i, d_j⟩ for every pair i < j, in lexicographic
/// pair order (0,1), (0,2), ..., (1,2), ...
template <typename Scalar>
struct CoherenceSample {
  std::vector<Scalar> values;
  Index rows = 0;  // n of the source matrix
  Index cols = 0;  // N of the source matrix

  Index count() const noexcept { return static_cast<Index>(values.size()); }
};

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  Index count = 0;
};

struct CoherenceProfile {
  double mutual_coherence = 0.0;  // max |μ_ij|
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
  std::vector<HistogramBin> histogram;
  Index sample_count = 0;
  Index rows = 0;
  Index cols = 0;
};

struct CrossCoherenceProfile {
  double mu_m = 0.0;  // max |⟨d_i, b_j⟩|
  double sigma_mu_m = 0.0;
  double mean = 0.0;
  Index sample_count = 0;
};

struct NormalityThresholds {
  double max_abs_z_mean = 4.0;
  double max_abs_excess_kurtosis = 0.5;
  /// Values further than sqrt(2 ln count) + margin standard deviations from
  /// the mean count as outliers; a Gaussian sample essentially never does.
  double outlier_margin = 3.0;
};

struct FitReport {
  double z_mean = 0.0;
  double var_ratio = 0.0;  // σ̂²·n, ≈ 1 for the Gaussian ensemble
  double excess_kurtosis = 0.0;
  double max_abs_z = 0.0;
  double outlier_threshold = 0.0;
  bool degenerate_variance = false;
  bool outlier = false;
  bool pass = false;
};

/// Tolerance on column norms accepted as "normalized" by coherence routines.
inline constexpr double kNormalizedTolerance = 1e-9;

/// Columns above which whole-matrix operations stream Gram blocks instead of
/// materializing the N×N Gram matrix.
inline constexpr Index kDefaultStreamThreshold = 5000;

/// ⌈√count⌉ capped at 512 (and at least 1).
Index default_bins(Index count);

namespace detail {

template <typename Derived>
void require_normalized(const Eigen::MatrixBase<Derived>& m, const char* who) {
  using Scalar = typename Derived::Scalar;
  // 1e-9 in double; float rounding alone exceeds that, so widen to 100 ulp.
  const Scalar tol = std::max(Scalar(kNormalizedTolerance),
                              Scalar(100) * Eigen::NumTraits<Scalar>::epsilon());
  for (Index j = 0; j < m.cols(); ++j) {
    const Scalar dev = std::abs(m.col(j).norm() - Scalar(1));
    if (!(dev <= tol)) {
      throw PreconditionError(std::string(who) + ": column " + std::to_string(j) +
                              " is not unit-norm (normalize_columns first)");
    }
  }
}

}  // namespace detail

/// Visits the strict upper triangle of MᵀM in lexicographic pair order.
///
/// `visit(i, first_j, values)` receives row i of the Gram matrix restricted
/// to columns first_j = i+1, ..., N-1. At most `block_cols` Gram rows are
/// held in memory at a time; block_cols >= N computes the Gram in one product.
template <typename Derived, typename Visitor>
void for_each_coherence_row(const Eigen::MatrixBase<Derived>& m, Index block_cols,
                            Visitor&& visit) {
  using Scalar = typename Derived::Scalar;
  const Index n_cols = m.cols();
  block_cols = std::max<Index>(1, block_cols);
  Matrix<Scalar> gram;
  for (Index b0 = 0; b0 < n_cols; b0 += block_cols) {
    const Index width = std::min(block_cols, n_cols - b0);
    gram.noalias() = m.middleCols(b0, width).transpose() * m.rightCols(n_cols - b0);
    for (Index r = 0; r < width; ++r) {
      const Index i = b0 + r;
      const Index len = n_cols - i - 1;
      if (len > 0) visit(i, i + 1, gram.row(r).segment(i - b0 + 1, len));
    }
  }
}

template <typename Derived>
Index stream_block_cols(const Eigen::MatrixBase<Derived>& m, Index stream_threshold) {
  if (m.cols() <= stream_threshold) return std::max<Index>(1, m.cols());
  // Roughly 4M Gram entries per block.
  return std::max<Index>(1, (Index{1} << 22) / std::max<Index>(1, m.cols()));
}

template <typename Derived>
CoherenceSample<typename Derived::Scalar> coherence_sample(
    const Eigen::MatrixBase<Derived>& m, Index stream_threshold = kDefaultStreamThreshold) {
  using Scalar = typename Derived::Scalar;
  detail::require_normalized(m, "coherence_sample");
  CoherenceSample<Scalar> sample;
  sample.rows = m.rows();
  sample.cols = m.cols();
  sample.values.reserve(static_cast<std::size_t>(m.cols() * (m.cols() - 1) / 2));
  for_each_coherence_row(m, stream_block_cols(m, stream_threshold),
                         [&](Index, Index, const auto& row) {
                           for (Index t = 0; t < row.size(); ++t) sample.values.push_back(row(t));
                         });
  return sample;
}

template <typename Scalar>
CoherenceSample<Scalar> coherence_sample(const BasicMeasurementMatrix<Scalar>& m,
                                         Index stream_threshold = kDefaultStreamThreshold) {
  return coherence_sample(m.data(), stream_threshold);
}

/// Moments and histogram of a coherence sample. `bins` = 0 selects
/// default_bins(count).
template <typename Scalar>
CoherenceProfile profile(const CoherenceSample<Scalar>& sample, Index bins = 0);

/// Same statistics as profile(coherence_sample(m)) computed in two streaming
/// passes, never holding more than one Gram block.
CoherenceProfile profile_streaming(const MatrixXd& m, Index bins = 0,
                                   Index stream_threshold = kDefaultStreamThreshold);

/// profile() of the full sample, streaming automatically above the threshold.
CoherenceProfile profile_matrix(const MeasurementMatrix& m, Index bins = 0,
                                Index stream_threshold = kDefaultStreamThreshold);

template <typename Scalar>
FitReport normality_check(const CoherenceSample<Scalar>& sample,
                          const NormalityThresholds& thresholds = {});

/// All N_x·N_e inner products between the columns of d and b.
template <typename DerivedD, typename DerivedB>
CrossCoherenceProfile cross_coherence(const Eigen::MatrixBase<DerivedD>& d,
                                      const Eigen::MatrixBase<DerivedB>& b) {
  if (d.rows() != b.rows()) {
    throw DimensionError("cross_coherence: row mismatch " + std::to_string(d.rows()) + " vs " +
                         std::to_string(b.rows()));
  }
  if (d.cols() == 0 || b.cols() == 0) {
    throw InsufficientDataError("cross_coherence: both dictionaries need columns");
  }
  detail::require_normalized(d, "cross_coherence");
  detail::require_normalized(b, "cross_coherence");
  const Eigen::MatrixXd products = (d.transpose() * b).template cast<double>();
  CrossCoherenceProfile out;
  out.sample_count = products.size();
  out.mu_m = products.cwiseAbs().maxCoeff();
  out.mean = products.mean();
  out.sigma_mu_m = std::sqrt((products.array() - out.mean).square().mean());
  return out;
}

inline CrossCoherenceProfile cross_coherence(const MeasurementMatrix& d,
                                             const MeasurementMatrix& b) {
  return cross_coherence(d.data(), b.data());
}

/// Mutual coherence μ(M) = max_{i≠j} |⟨d_i, d_j⟩|.
template <typename Derived>
typename Derived::Scalar mutual_coherence(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  detail::require_normalized(m, "mutual_coherence");
  Scalar best(0);
  for_each_coherence_row(m, stream_block_cols(m, kDefaultStreamThreshold),
                         [&](Index, Index, const auto& row) {
                           best = std::max(best, row.cwiseAbs().maxCoeff());
                         });
  return best;
}

}  // namespace cohaudit
