#include <doctest.h>

#include "cohaudit/coherence.hpp"
#include "cohaudit/ensembles.hpp"
#include "cohaudit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace cohaudit;

namespace {

// Direct O(N²) oracle: explicit dot products in lexicographic pair order.
std::vector<double> pairwise_dots(const MatrixXd& m) {
  std::vector<double> out;
  for (Index i = 0; i < m.cols(); ++i) {
    for (Index j = i + 1; j < m.cols(); ++j) {
      double s = 0.0;
      for (Index r = 0; r < m.rows(); ++r) s += m(r, i) * m(r, j);
      out.push_back(s);
    }
  }
  return out;
}

std::vector<double> sorted_abs(std::vector<double> v) {
  for (double& x : v) x = std::abs(x);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("identity has zero coherence") {
  const auto s = coherence_sample(identity_dictionary(3));
  CHECK(s.values == std::vector<double>{0, 0, 0});
  const auto p = profile(s);
  CHECK(p.mutual_coherence == 0.0);
  CHECK(p.mean == 0.0);
  CHECK(p.std == 0.0);
}

TEST_CASE("small example in pair order") {
  MatrixXd m(2, 3);
  const double h = 1.0 / std::sqrt(2.0);
  m << 1, 0, h, 0, 1, h;
  const auto s = coherence_sample(m);
  REQUIRE(s.count() == 3);
  CHECK(s.values[0] == doctest::Approx(0.0));
  CHECK(s.values[1] == doctest::Approx(h));
  CHECK(s.values[2] == doctest::Approx(h));
}

TEST_CASE("sample matches the direct inner-product oracle") {
  const auto m = generate({Ensemble::gaussian, 30, 50, 2});
  const auto s = coherence_sample(m);
  const auto oracle = pairwise_dots(m.data());
  REQUIRE(s.count() == 50 * 49 / 2);
  for (std::size_t t = 0; t < oracle.size(); ++t) CHECK(s.values[t] == doctest::Approx(oracle[t]).epsilon(1e-12));
  for (double v : s.values) CHECK(std::abs(v) <= 1.0 + 1e-12);
  CHECK(mutual_coherence(m.data()) == sorted_abs(s.values).back());
}

TEST_CASE("unnormalized input is rejected") {
  MatrixXd m = MatrixXd::Identity(3, 3);
  m(0, 0) = 2.0;
  CHECK_THROWS_AS(coherence_sample(m), PreconditionError);
  CHECK_THROWS_AS(mutual_coherence(m), PreconditionError);
}

TEST_CASE("profile statistics against a hand oracle") {
  CoherenceSample<double> s{{-0.5, 0.1, 0.2, 0.6}, 2, 4};
  const auto p = profile(s, 4);
  CHECK(p.mutual_coherence == doctest::Approx(0.6));
  CHECK(p.mean == doctest::Approx(0.1));
  // population variance: (0.36 + 0 + 0.01 + 0.25)/4
  CHECK(p.std == doctest::Approx(std::sqrt(0.62 / 4)));
  CHECK(p.min == -0.5);
  CHECK(p.max == 0.6);
  REQUIRE(p.histogram.size() == 4);
  CHECK(p.histogram.back().count == 1);  // max lands in the last bin
  Index total = 0;
  for (const auto& b : p.histogram) total += b.count;
  CHECK(total == 4);
  CHECK_THROWS_AS(profile(CoherenceSample<double>{{}, 1, 1}), InsufficientDataError);
}

TEST_CASE("default bins follow the square-root rule with a cap") {
  CHECK(default_bins(1) == 1);
  CHECK(default_bins(100) == 10);
  CHECK(default_bins(101) == 11);
  CHECK(default_bins(10'000'000) == 512);
}

TEST_CASE("profile invariants on a random matrix") {
  const auto m = generate({Ensemble::gaussian, 40, 120, 8});
  const auto p = profile_matrix(m);
  CHECK(p.sample_count == 120 * 119 / 2);
  Index total = 0;
  for (const auto& b : p.histogram) total += b.count;
  CHECK(total == p.sample_count);
  CHECK(std::abs(p.mean) <= p.mutual_coherence);
  CHECK(p.std <= p.mutual_coherence);
}

TEST_CASE("streaming profile agrees with the materialized one") {
  const auto m = generate({Ensemble::gaussian, 20, 300, 4});
  const auto full = profile(coherence_sample(m), 17);
  const auto streamed = profile_streaming(m.data(), 17, 10);
  CHECK(streamed.sample_count == full.sample_count);
  CHECK(std::abs(streamed.mutual_coherence - full.mutual_coherence) < 1e-12);
  CHECK(std::abs(streamed.mean - full.mean) < 1e-12);
  CHECK(std::abs(streamed.std - full.std) < 1e-12);
  REQUIRE(streamed.histogram.size() == full.histogram.size());
  for (std::size_t b = 0; b < full.histogram.size(); ++b) {
    CHECK(streamed.histogram[b].count == full.histogram[b].count);
  }
}

TEST_CASE("column permutation and negation invariants") {
  const auto m = generate({Ensemble::gaussian, 25, 60, 6});
  const auto base = coherence_sample(m);
  Rng rng(3);
  std::vector<Index> perm(60);
  std::iota(perm.begin(), perm.end(), 0);
  for (Index i = 59; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
  MatrixXd permuted(25, 60);
  for (Index j = 0; j < 60; ++j) permuted.col(j) = m.data().col(perm[j]);
  const auto ps = coherence_sample(permuted);
  const auto a = sorted_abs(base.values);
  const auto b = sorted_abs(ps.values);
  for (std::size_t t = 0; t < a.size(); ++t) CHECK(std::abs(a[t] - b[t]) < 1e-15);
  CHECK(std::abs(profile(ps).mean - profile(base).mean) < 1e-15);

  MatrixXd negated = m.data();
  negated.col(17) *= -1.0;
  const auto ns = coherence_sample(negated);
  Index flipped = 0;
  for (std::size_t t = 0; t < base.values.size(); ++t) {
    if (base.values[t] != 0.0 && ns.values[t] == -base.values[t]) ++flipped;
    else CHECK(ns.values[t] == base.values[t]);
  }
  CHECK(flipped == 59);
  CHECK(profile(ns).mutual_coherence == profile(base).mutual_coherence);
}

TEST_CASE("orthonormal columns have zero coherence") {
  const auto f = fourier_dictionary(16);
  CHECK(mutual_coherence(f.data()) < 1e-12);
}

TEST_CASE("coherence in single precision") {
  const auto m = generate({Ensemble::gaussian, 30, 60, 1});
  const Eigen::MatrixXf mf = normalize_columns(Eigen::MatrixXf(m.data().cast<float>()));
  const auto pf = profile(coherence_sample(mf));
  const auto pd = profile(coherence_sample(m));
  CHECK(pf.mutual_coherence == doctest::Approx(pd.mutual_coherence).epsilon(1e-5));
  CHECK(pf.std == doctest::Approx(pd.std).epsilon(1e-5));
}

TEST_CASE("gaussian 100x500 coherence std is close to 1/sqrt(n)") {
  double mean_sigma = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    mean_sigma += profile_matrix(generate({Ensemble::gaussian, 100, 500, seed})).std / 5.0;
  }
  CHECK(mean_sigma == doctest::Approx(0.1).epsilon(0.1));
}

TEST_CASE("normality check") {
  SUBCASE("gaussian ensemble passes") {
    const auto s = coherence_sample(generate({Ensemble::gaussian, 200, 400, 3}));
    const auto fit = normality_check(s);
    CHECK(fit.pass);
    CHECK(fit.var_ratio >= 0.8);
    CHECK(fit.var_ratio <= 1.2);
    CHECK_FALSE(fit.degenerate_variance);
  }
  SUBCASE("a repeated column fails") {
    MatrixXd m = generate({Ensemble::gaussian, 200, 400, 3}).data();
    m.col(5) = m.col(0);
    const auto fit = normality_check(coherence_sample(m));
    CHECK_FALSE(fit.pass);
    CHECK(fit.outlier);
  }
  SUBCASE("constant sample is degenerate") {
    CoherenceSample<double> s{std::vector<double>(200, 0.0), 10, 21};
    const auto fit = normality_check(s);
    CHECK(fit.degenerate_variance);
    CHECK_FALSE(fit.pass);
  }
  SUBCASE("too few values") {
    CoherenceSample<double> s{std::vector<double>(50, 0.1), 10, 11};
    CHECK_THROWS_AS(normality_check(s), InsufficientDataError);
  }
}

TEST_CASE("cross coherence") {
  const auto id = identity_dictionary(3);
  const auto c = cross_coherence(id, id);
  CHECK(c.mu_m == doctest::Approx(1.0));
  CHECK(c.mean == doctest::Approx(1.0 / 3));
  CHECK(c.sample_count == 9);

  const auto spikes = identity_dictionary(64);
  const auto sines = fourier_dictionary(64);
  const auto sf = cross_coherence(spikes, sines);
  CHECK(sf.mu_m == doctest::Approx(std::sqrt(2.0 / 64)).epsilon(0.15));
  CHECK(sf.sample_count == 64 * 64);

  CHECK_THROWS_AS(cross_coherence(identity_dictionary(3), identity_dictionary(4)), DimensionError);
}
