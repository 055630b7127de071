#pragma once

#include "cohaudit/ensembles.hpp"
#include "cohaudit/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <set>
#include <string_view>

namespace cohaudit {

enum class CoefficientModel { gaussian, rademacher };

std::string_view to_string(CoefficientModel m);
CoefficientModel coefficient_model_from_string(std::string_view name);

/// ‖D x_k‖² / ‖x_k‖² over random k-sparse vectors.
struct RatioSample {
  std::vector<double> values;
  Index k = 0;
  Index trials = 0;
  std::uint64_t seed = 0;
};

/// ‖D_kᵀD_k − I‖₂ over random k-column supports.
struct SpectralSample {
  std::vector<double> values;
  Index k = 0;
  Index trials = 0;
  std::uint64_t seed = 0;
};

struct TailCheckRow {
  double t = 0.0;
  double empirical = 0.0;  // fraction of the sample exceeding t
  double bound = 0.0;
  double slack = 0.0;      // 2·√(bound(1−bound)/trials) + 1/trials
  bool ok = false;
};

/// Largest supported k for the dense symmetric eigensolver path.
inline constexpr Index kDenseSpectralLimit = 512;
// Ratios within this distance of the band edge count as inside.
inline constexpr double kBandRoundingSlack = 1e-12;

inline bool in_band(double r, double g) {
  return std::abs(r - 1.0) <= g + kBandRoundingSlack;
}

namespace detail {

inline void check_support(const IndexList& support, Index n_cols, const char* who) {
  std::set<Index> seen;
  for (Index i : support) {
    if (i < 0 || i >= n_cols) {
      throw DomainError(std::string(who) + ": column index " + std::to_string(i) +
                        " out of range");
    }
    if (!seen.insert(i).second) {
      throw DomainError(std::string(who) + ": duplicate column index " + std::to_string(i));
    }
  }
}

}  // namespace detail

/// Largest |eigenvalue| of a symmetric matrix by power iteration
/// (relative tolerance `tol`, at most `max_iter` steps).
template <typename Derived>
typename Derived::Scalar symmetric_norm_power(const Eigen::MatrixBase<Derived>& a,
                                              typename Derived::Scalar tol = 1e-8,
                                              Index max_iter = 10000) {
  using Scalar = typename Derived::Scalar;
  const Index n = a.rows();
  Vector<Scalar> v(n);
  for (Index i = 0; i < n; ++i) v(i) = Scalar(1) + Scalar(i % 7) / Scalar(16);
  v.normalize();
  Scalar estimate(0);
  for (Index it = 0; it < max_iter; ++it) {
    // Iterate on A² so that ±λ eigenpairs do not make the iteration oscillate.
    Vector<Scalar> w = a * (a * v);
    const Scalar norm = w.norm();
    if (norm == Scalar(0)) return Scalar(0);
    const Scalar next = std::sqrt(norm);
    v = w / norm;
    if (std::abs(next - estimate) <= tol * next) return next;
    estimate = next;
  }
  return estimate;
}

/// ‖D_Sᵀ D_S − I‖₂ for the columns listed in `support`.
template <typename Derived>
typename Derived::Scalar spectral_deviation(const Eigen::MatrixBase<Derived>& m,
                                            const IndexList& support) {
  using Scalar = typename Derived::Scalar;
  detail::check_support(support, m.cols(), "spectral_deviation");
  const auto k = static_cast<Index>(support.size());
  if (k == 0) return Scalar(0);
  Matrix<Scalar> cols(m.rows(), k);
  for (Index t = 0; t < k; ++t) cols.col(t) = m.col(support[static_cast<std::size_t>(t)]);
  Matrix<Scalar> dev = cols.transpose() * cols;
  dev.diagonal().array() -= Scalar(1);
  if (k <= kDenseSpectralLimit) {
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(dev, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
  }
  return symmetric_norm_power(dev);
}

RatioSample sample_ratios(const MeasurementMatrix& m, Index k, Index trials, std::uint64_t seed,
                          CoefficientModel model = CoefficientModel::gaussian,
                          unsigned threads = 1);

/// Fraction of ratios inside [1 − g, 1 + g].
double band_frequency(const RatioSample& sample, double g);

SpectralSample sample_spectral(const MeasurementMatrix& m, Index k, Index trials,
                               std::uint64_t seed, unsigned threads = 1);

using TailBoundFn = std::function<double(double)>;

/// Empirical Pr(|r − 1| > t) against bound(t) for each t in the grid.
std::vector<TailCheckRow> tail_check(const RatioSample& sample, const std::vector<double>& t_grid,
                                     const TailBoundFn& bound);
/// Empirical Pr(value > t) against bound(t).
std::vector<TailCheckRow> tail_check(const SpectralSample& sample,
                                     const std::vector<double>& t_grid, const TailBoundFn& bound);

/// ‖D x‖² for a sparse x evaluated two ways: directly, and as
/// ‖x‖² + Σ_{i≠j} μ_ij x_i x_j from the pairwise coherences.
struct QuadraticFormPair {
  double direct = 0.0;
  double via_coherence = 0.0;
};

QuadraticFormPair quadratic_form_two_ways(const MeasurementMatrix& m, const IndexList& support,
                                          const VectorXd& coefficients);

/// Draws a k-sparse coefficient vector restricted to its support.
void draw_sparse(Rng& rng, Index n_cols, Index k, CoefficientModel model, IndexList& support,
                 VectorXd& values);

}  // namespace cohaudit
