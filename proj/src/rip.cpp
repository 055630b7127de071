#include "cohaudit/rip.hpp"

#include "cohaudit/parallel.hpp"
#include "cohaudit/rng.hpp"

#include <cmath>

namespace cohaudit {

std::string_view to_string(CoefficientModel m) {
  return m == CoefficientModel::gaussian ? "gaussian" : "rademacher";
}

CoefficientModel coefficient_model_from_string(std::string_view name) {
  if (name == "gaussian") return CoefficientModel::gaussian;
  if (name == "rademacher") return CoefficientModel::rademacher;
  throw DomainError("unknown coefficient model '" + std::string(name) + "'");
}

void draw_sparse(Rng& rng, Index n_cols, Index k, CoefficientModel model, IndexList& support,
                 VectorXd& values) {
  support = rng.sample_without_replacement(n_cols, k);
  values.resize(k);
  for (Index t = 0; t < k; ++t) {
    values(t) = model == CoefficientModel::gaussian ? rng.normal() : rng.rademacher();
  }
}

namespace {

void check_sampling_args(const MeasurementMatrix& m, Index k, Index trials, const char* who) {
  if (k < 1 || k > m.cols()) {
    throw DomainError(std::string(who) + ": need 1 <= k <= N, got k=" + std::to_string(k));
  }
  if (trials < 1) throw DomainError(std::string(who) + ": trials must be positive");
}

}  // namespace

RatioSample sample_ratios(const MeasurementMatrix& m, Index k, Index trials, std::uint64_t seed,
                          CoefficientModel model, unsigned threads) {
  check_sampling_args(m, k, trials, "sample_ratios");
  RatioSample out{std::vector<double>(static_cast<std::size_t>(trials)), k, trials, seed};
  parallel_for(trials, threads, [&](Index t) {
    Rng rng = Rng::stream(seed, "rip:ratio", static_cast<std::uint64_t>(t));
    IndexList support;
    VectorXd x;
    do {
      draw_sparse(rng, m.cols(), k, model, support, x);
    } while (x.squaredNorm() == 0.0);
    VectorXd dx = VectorXd::Zero(m.rows());
    for (Index i = 0; i < k; ++i) dx += x(i) * m.col(support[static_cast<std::size_t>(i)]);
    out.values[static_cast<std::size_t>(t)] = dx.squaredNorm() / x.squaredNorm();
  });
  return out;
}

double band_frequency(const RatioSample& sample, double g) {
  if (g < 0.0) throw DomainError("band_frequency: g must be non-negative");
  if (sample.values.empty()) return 0.0;
  Index inside = 0;
  for (double r : sample.values) inside += in_band(r, g) ? 1 : 0;
  return static_cast<double>(inside) / static_cast<double>(sample.values.size());
}

SpectralSample sample_spectral(const MeasurementMatrix& m, Index k, Index trials,
                               std::uint64_t seed, unsigned threads) {
  check_sampling_args(m, k, trials, "sample_spectral");
  SpectralSample out{std::vector<double>(static_cast<std::size_t>(trials)), k, trials, seed};
  parallel_for(trials, threads, [&](Index t) {
    Rng rng = Rng::stream(seed, "rip:spectral", static_cast<std::uint64_t>(t));
    const IndexList support = rng.sample_without_replacement(m.cols(), k);
    out.values[static_cast<std::size_t>(t)] = spectral_deviation(m.data(), support);
  });
  return out;
}

namespace {

template <typename Exceeds>
std::vector<TailCheckRow> tail_rows(const std::vector<double>& values,
                                    const std::vector<double>& t_grid, const TailBoundFn& bound,
                                    Exceeds exceeds) {
  if (values.empty() || t_grid.empty()) {
    throw InsufficientDataError("tail_check needs a nonempty sample and grid");
  }
  const double trials = static_cast<double>(values.size());
  std::vector<TailCheckRow> rows;
  for (double t : t_grid) {
    Index over = 0;
    for (double v : values) over += exceeds(v, t) ? 1 : 0;
    TailCheckRow row;
    row.t = t;
    row.empirical = static_cast<double>(over) / trials;
    row.bound = std::clamp(bound(t), 0.0, 1.0);
    row.slack = 2.0 * std::sqrt(row.bound * (1.0 - row.bound) / trials) + 1.0 / trials;
    row.ok = row.empirical <= row.bound + row.slack;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::vector<TailCheckRow> tail_check(const RatioSample& sample, const std::vector<double>& t_grid,
                                     const TailBoundFn& bound) {
  return tail_rows(sample.values, t_grid, bound,
                   [](double r, double t) { return !in_band(r, t); });
}

std::vector<TailCheckRow> tail_check(const SpectralSample& sample,
                                     const std::vector<double>& t_grid,
                                     const TailBoundFn& bound) {
  return tail_rows(sample.values, t_grid, bound, [](double v, double t) { return v > t; });
}

QuadraticFormPair quadratic_form_two_ways(const MeasurementMatrix& m, const IndexList& support,
                                          const VectorXd& coefficients) {
  detail::check_support(support, m.cols(), "quadratic_form_two_ways");
  const auto k = static_cast<Index>(support.size());
  if (coefficients.size() != k) {
    throw DimensionError("quadratic_form_two_ways: one coefficient per support index");
  }
  VectorXd dx = VectorXd::Zero(m.rows());
  for (Index i = 0; i < k; ++i) dx += coefficients(i) * m.col(support[static_cast<std::size_t>(i)]);
  double cross = 0.0;
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) {
      if (i == j) continue;
      const double mu = m.col(support[static_cast<std::size_t>(i)])
                            .dot(m.col(support[static_cast<std::size_t>(j)]));
      cross += mu * coefficients(i) * coefficients(j);
    }
  }
  // Diagonal terms use ⟨d_i, d_i⟩ = 1 (unit-norm columns).
  return {dx.squaredNorm(), coefficients.squaredNorm() + cross};
}

}  // namespace cohaudit
