#pragma once

#include "cohaudit/core.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace cohaudit {

enum class Ensemble { gaussian, bernoulli, partial_fourier, custom };

std::string_view to_string(Ensemble e);
/// Parses "gaussian", "bernoulli", "partial_fourier" (or "partial-fourier").
Ensemble ensemble_from_string(std::string_view name);

/// A dense real n×N dictionary together with where it came from.
///
/// Immutable after construction. Entries are checked to be finite. A matrix
/// with zero columns is allowed and stands for an empty dictionary (the
/// degenerate B of a separation problem); everything that needs column pairs
/// rejects it.
template <typename Scalar>
class BasicMeasurementMatrix {
 public:
  using MatrixType = Matrix<Scalar>;

  explicit BasicMeasurementMatrix(MatrixType data, Ensemble tag = Ensemble::custom,
                                  std::optional<std::uint64_t> seed = std::nullopt)
      : data_(std::move(data)), tag_(tag), seed_(seed) {
    if (data_.rows() < 1) throw DimensionError("measurement matrix needs at least one row");
    if (!data_.allFinite()) throw DomainError("measurement matrix has non-finite entries");
  }

  Index rows() const noexcept { return data_.rows(); }
  Index cols() const noexcept { return data_.cols(); }
  const MatrixType& data() const noexcept { return data_; }
  auto col(Index j) const { return data_.col(j); }
  Ensemble ensemble() const noexcept { return tag_; }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }

  /// Largest deviation of any column norm from 1 (0 for an empty dictionary).
  Scalar max_norm_deviation() const {
    if (cols() == 0) return Scalar(0);
    return (data_.colwise().norm().array() - Scalar(1)).abs().maxCoeff();
  }

 private:
  MatrixType data_;
  Ensemble tag_;
  std::optional<std::uint64_t> seed_;
};

using MeasurementMatrix = BasicMeasurementMatrix<double>;

struct EnsembleSpec {
  Ensemble ensemble = Ensemble::gaussian;
  Index rows = 0;
  Index cols = 0;
  std::uint64_t seed = 0;
};

/// Divides every column by its Euclidean norm.
///
/// Columns already within 64 ulp of unit norm are left untouched, which makes
/// the operation exactly idempotent.
template <typename Derived>
Matrix<typename Derived::Scalar> normalize_columns(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out = m;
  const Scalar keep = Scalar(64) * Eigen::NumTraits<Scalar>::epsilon();
  for (Index j = 0; j < out.cols(); ++j) {
    const Scalar norm = out.col(j).norm();
    if (!(norm > Scalar(0))) {
      throw DegenerateColumnError(j, "column " + std::to_string(j) + " has zero norm");
    }
    if (std::abs(norm - Scalar(1)) > keep) out.col(j) /= norm;
  }
  return out;
}

template <typename Scalar>
BasicMeasurementMatrix<Scalar> normalize_columns(const BasicMeasurementMatrix<Scalar>& m) {
  return BasicMeasurementMatrix<Scalar>(normalize_columns(m.data()), m.ensemble(), m.seed());
}

/// Entries of the ensemble before column normalization (gaussian: N(0, 1/n);
/// bernoulli: ±1/√n; partial_fourier: selected rows of the real harmonic basis).
MatrixXd generate_raw(const EnsembleSpec& spec);

/// generate_raw followed by column normalization. Pure function of `spec`.
MeasurementMatrix generate(const EnsembleSpec& spec);

/// Orthonormal real Fourier basis of size N×N. Row 0 is the constant
/// 1/√N; rows 2f-1, 2f hold √(2/N)·cos and √(2/N)·sin at frequency f;
/// for even N the last row is the alternating Nyquist row (-1)^j/√N.
MatrixXd real_fourier_basis(Index size);

/// n×n identity (the "spikes" dictionary).
MeasurementMatrix identity_dictionary(Index n);

/// n×n dictionary whose columns are the real Fourier sinusoids.
MeasurementMatrix fourier_dictionary(Index n);

}  // namespace cohaudit
