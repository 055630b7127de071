#include "cohaudit/ensembles.hpp"

#include "cohaudit/rng.hpp"

#include <cmath>
#include <numbers>

namespace cohaudit {

std::string_view to_string(Ensemble e) {
  switch (e) {
    case Ensemble::gaussian: return "gaussian";
    case Ensemble::bernoulli: return "bernoulli";
    case Ensemble::partial_fourier: return "partial_fourier";
    case Ensemble::custom: return "custom";
  }
  return "custom";
}

Ensemble ensemble_from_string(std::string_view name) {
  if (name == "gaussian") return Ensemble::gaussian;
  if (name == "bernoulli") return Ensemble::bernoulli;
  if (name == "partial_fourier" || name == "partial-fourier") return Ensemble::partial_fourier;
  throw DomainError("unknown ensemble '" + std::string(name) + "'");
}

MatrixXd real_fourier_basis(Index size) {
  if (size < 1) throw DimensionError("real_fourier_basis: size must be positive");
  const double n = static_cast<double>(size);
  MatrixXd h(size, size);
  h.row(0).setConstant(1.0 / std::sqrt(n));
  const double amp = std::sqrt(2.0 / n);
  Index row = 1;
  for (Index f = 1; f <= (size - 1) / 2; ++f) {
    for (Index j = 0; j < size; ++j) {
      // Reduce f*j mod N first so the phase argument stays small and exact.
      const double phase = 2.0 * std::numbers::pi * static_cast<double>((f * j) % size) / n;
      h(row, j) = amp * std::cos(phase);
      h(row + 1, j) = amp * std::sin(phase);
    }
    row += 2;
  }
  if (size % 2 == 0) {
    for (Index j = 0; j < size; ++j) h(row, j) = (j % 2 == 0 ? 1.0 : -1.0) / std::sqrt(n);
  }
  return h;
}

MatrixXd generate_raw(const EnsembleSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) {
    throw DimensionError("ensemble dimensions must be positive, got " + std::to_string(spec.rows) +
                         "x" + std::to_string(spec.cols));
  }
  const Index n = spec.rows;
  const Index N = spec.cols;
  switch (spec.ensemble) {
    case Ensemble::gaussian: {
      Rng rng = Rng::stream(spec.seed, "ensemble:gaussian");
      const double scale = 1.0 / std::sqrt(static_cast<double>(n));
      MatrixXd m(n, N);
      for (Index j = 0; j < N; ++j)
        for (Index i = 0; i < n; ++i) m(i, j) = scale * rng.normal();
      return m;
    }
    case Ensemble::bernoulli: {
      Rng rng = Rng::stream(spec.seed, "ensemble:bernoulli");
      const double scale = 1.0 / std::sqrt(static_cast<double>(n));
      MatrixXd m(n, N);
      for (Index j = 0; j < N; ++j)
        for (Index i = 0; i < n; ++i) m(i, j) = scale * rng.rademacher();
      return m;
    }
    case Ensemble::partial_fourier: {
      if (n > N) {
        throw UnsupportedError("partial_fourier needs rows <= cols, got " + std::to_string(n) +
                               "x" + std::to_string(N));
      }
      Rng rng = Rng::stream(spec.seed, "ensemble:partial_fourier");
      const IndexList picked = rng.sample_without_replacement(N, n);
      const MatrixXd basis = real_fourier_basis(N);
      MatrixXd m(n, N);
      for (Index i = 0; i < n; ++i) m.row(i) = basis.row(picked[static_cast<std::size_t>(i)]);
      return m;
    }
    case Ensemble::custom: break;
  }
  throw UnsupportedError("cannot generate a custom ensemble");
}

MeasurementMatrix generate(const EnsembleSpec& spec) {
  return MeasurementMatrix(normalize_columns(generate_raw(spec)), spec.ensemble, spec.seed);
}

MeasurementMatrix identity_dictionary(Index n) {
  if (n < 1) throw DimensionError("identity_dictionary: n must be positive");
  return MeasurementMatrix(MatrixXd::Identity(n, n));
}

MeasurementMatrix fourier_dictionary(Index n) {
  return MeasurementMatrix(normalize_columns(real_fourier_basis(n).transpose()));
}

}  // namespace cohaudit
