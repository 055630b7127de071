#include "cohaudit/coherence.hpp"

#include <cmath>
#include <limits>

namespace cohaudit {

namespace {

struct FirstPass {
  Index count = 0;
  double sum = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double max_abs = 0.0;

  void add(double v) {
    ++count;
    sum += v;
    min = std::min(min, v);
    max = std::max(max, v);
    max_abs = std::max(max_abs, std::abs(v));
  }
};

class Histogrammer {
 public:
  Histogrammer(double lo, double hi, Index bins) : lo_(lo), hi_(hi), counts_(bins, 0) {
    width_ = (hi - lo) / static_cast<double>(bins);
  }

  void add(double v) {
    Index b = static_cast<Index>(counts_.size()) - 1;
    if (width_ > 0.0 && v < hi_) {
      b = std::min(b, static_cast<Index>(std::floor((v - lo_) / width_)));
      b = std::max<Index>(b, 0);
    }
    ++counts_[static_cast<std::size_t>(b)];
  }

  std::vector<HistogramBin> bins() const {
    std::vector<HistogramBin> out;
    const auto n = static_cast<Index>(counts_.size());
    for (Index b = 0; b < n; ++b) {
      const double lower = lo_ + width_ * static_cast<double>(b);
      const double upper = b + 1 == n ? hi_ : lo_ + width_ * static_cast<double>(b + 1);
      out.push_back({lower, upper, counts_[static_cast<std::size_t>(b)]});
    }
    return out;
  }

 private:
  double lo_;
  double hi_;
  double width_ = 0.0;
  std::vector<Index> counts_;
};

CoherenceProfile finish(const FirstPass& first, double centered_sq, const Histogrammer& hist,
                        Index rows, Index cols) {
  CoherenceProfile p;
  p.sample_count = first.count;
  p.mutual_coherence = first.max_abs;
  p.mean = first.sum / static_cast<double>(first.count);
  p.std = std::sqrt(centered_sq / static_cast<double>(first.count));
  p.min = first.min;
  p.max = first.max;
  p.histogram = hist.bins();
  p.rows = rows;
  p.cols = cols;
  return p;
}

}  // namespace

Index default_bins(Index count) {
  const auto root = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(count))));
  return std::clamp<Index>(root, 1, 512);
}

template <typename Scalar>
CoherenceProfile profile(const CoherenceSample<Scalar>& sample, Index bins) {
  if (sample.values.empty()) {
    throw InsufficientDataError("coherence profile needs at least two columns");
  }
  if (bins < 0) throw DomainError("profile: bins must be positive");
  if (bins == 0) bins = default_bins(sample.count());
  FirstPass first;
  for (Scalar v : sample.values) first.add(static_cast<double>(v));
  const double mean = first.sum / static_cast<double>(first.count);
  Histogrammer hist(first.min, first.max, bins);
  double centered_sq = 0.0;
  for (Scalar v : sample.values) {
    const double d = static_cast<double>(v) - mean;
    centered_sq += d * d;
    hist.add(static_cast<double>(v));
  }
  return finish(first, centered_sq, hist, sample.rows, sample.cols);
}

CoherenceProfile profile_streaming(const MatrixXd& m, Index bins, Index stream_threshold) {
  detail::require_normalized(m, "profile_streaming");
  if (m.cols() < 2) throw InsufficientDataError("coherence profile needs at least two columns");
  const Index block = stream_block_cols(m, stream_threshold);
  FirstPass first;
  for_each_coherence_row(m, block, [&](Index, Index, const auto& row) {
    for (Index t = 0; t < row.size(); ++t) first.add(row(t));
  });
  if (bins == 0) bins = default_bins(first.count);
  const double mean = first.sum / static_cast<double>(first.count);
  Histogrammer hist(first.min, first.max, bins);
  double centered_sq = 0.0;
  for_each_coherence_row(m, block, [&](Index, Index, const auto& row) {
    for (Index t = 0; t < row.size(); ++t) {
      const double d = row(t) - mean;
      centered_sq += d * d;
      hist.add(row(t));
    }
  });
  return finish(first, centered_sq, hist, m.rows(), m.cols());
}

CoherenceProfile profile_matrix(const MeasurementMatrix& m, Index bins, Index stream_threshold) {
  if (m.cols() > stream_threshold) return profile_streaming(m.data(), bins, stream_threshold);
  return profile(coherence_sample(m, stream_threshold), bins);
}

template <typename Scalar>
FitReport normality_check(const CoherenceSample<Scalar>& sample,
                          const NormalityThresholds& thresholds) {
  const Index count = sample.count();
  if (count < 100) {
    throw InsufficientDataError("normality_check needs at least 100 coherence values, got " +
                                std::to_string(count));
  }
  const double c = static_cast<double>(count);
  double sum = 0.0;
  for (Scalar v : sample.values) sum += static_cast<double>(v);
  const double mean = sum / c;
  double m2 = 0.0;
  double m4 = 0.0;
  double max_dev = 0.0;
  for (Scalar v : sample.values) {
    const double d = static_cast<double>(v) - mean;
    m2 += d * d;
    m4 += d * d * d * d;
    max_dev = std::max(max_dev, std::abs(d));
  }
  m2 /= c;
  m4 /= c;

  FitReport r;
  r.outlier_threshold = std::sqrt(2.0 * std::log(c)) + thresholds.outlier_margin;
  r.var_ratio = m2 * static_cast<double>(sample.rows);
  if (!(m2 > 0.0)) {
    r.degenerate_variance = true;
    r.pass = false;
    return r;
  }
  const double sd = std::sqrt(m2);
  r.z_mean = mean / (sd / std::sqrt(c));
  r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  r.max_abs_z = max_dev / sd;
  r.outlier = r.max_abs_z > r.outlier_threshold;
  r.pass = std::abs(r.z_mean) <= thresholds.max_abs_z_mean &&
           std::abs(r.excess_kurtosis) <= thresholds.max_abs_excess_kurtosis && !r.outlier;
  return r;
}

template CoherenceProfile profile(const CoherenceSample<double>&, Index);
template CoherenceProfile profile(const CoherenceSample<float>&, Index);
template FitReport normality_check(const CoherenceSample<double>&, const NormalityThresholds&);
template FitReport normality_check(const CoherenceSample<float>&, const NormalityThresholds&);

}  // namespace cohaudit
