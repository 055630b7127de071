#include <doctest.h>

#include "cohaudit/bounds.hpp"
#include "cohaudit/rng.hpp"

#include <cmath>

using namespace cohaudit;

TEST_CASE("sparsity thresholds for the 200x400 gaussian example") {
  const auto r = sparsity_bounds(0.3124, 0.0707);
  CHECK(r.worst_case_floor == 2);
  CHECK(r.heuristic_floor == 4);
  CHECK(r.bernstein_floor == 25);
  CHECK(r.operator_floor == 3);
  CHECK(r.bpdn_stable_floor == 23);
  CHECK(r.operator_k == doctest::Approx(3.536).epsilon(1e-3));
  CHECK(r.bpdn_stable_k == doctest::Approx(23.2).epsilon(1e-2));
}

TEST_CASE("duplicate columns only guarantee k = 1") {
  const auto r = sparsity_bounds(1.0, 0.5);
  CHECK(r.worst_case_k == 1.0);
  CHECK(r.worst_case_floor == 1);
}

TEST_CASE("closed form at sigma = 1/sqrt(n)") {
  for (int n : {16, 50, 100, 200, 256, 500, 1000, 4096}) {
    CAPTURE(n);
    const auto r = sparsity_bounds(0.5, 1.0 / std::sqrt(static_cast<double>(n)));
    CHECK(r.bernstein_floor == (4 + n) / 8);  // ⌊(1 + n/4)/2⌋
    CHECK(r.bpdn_stable_floor == 1 + n / 9);
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(sparsity_bounds(0.0, 0.1), DomainError);
  CHECK_THROWS_AS(sparsity_bounds(0.2, 0.0), DomainError);
  CHECK_THROWS_AS(sparsity_bounds(1.5, 0.1), DomainError);
  CHECK_THROWS_AS(pairwise_tail_bound(0, 0.1), DomainError);
  CHECK_THROWS_AS(quadratic_form_tail_bound(0.0, 3, 0.1, 1.0), DomainError);
  CHECK_THROWS_AS(quadratic_form_tail_bound(0.1, 1, 0.1, 1.0), DomainError);
  CHECK_THROWS_AS(operator_tail_bound(0.1, 3, 0.0), DomainError);
  CHECK_THROWS_AS(separation_condition(0.1, 0.1, 0.1, 0, 1), DomainError);
}

TEST_CASE("pairwise tail bound values") {
  CHECK(pairwise_tail_bound(6, 0.1) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
  CHECK(pairwise_tail_bound(2, 0.1) == doctest::Approx(1.0));
  CHECK(pairwise_tail_bound(2, 1.0) == doctest::Approx(1.0 - std::exp(-0.5)));
  CHECK(pairwise_tail_bound(1, 0.3) == 1.0);
}

TEST_CASE("tail bounds hand values") {
  // 2 exp(−t²/(2σ²(k−1)‖x‖⁴)) with t = 0.3, σ = 0.1, k = 5, ‖x‖ = 1 → 2e^{-1.125}
  CHECK(quadratic_form_tail_bound(0.3, 5, 0.1, 1.0) == doctest::Approx(2 * std::exp(-1.125)));
  CHECK(quadratic_form_tail_bound(0.01, 5, 0.1, 1.0) == 1.0);
  // (k(k−1)/2) exp(−t²/(2k(k−1)σ²)) with t = 1, σ = 0.1, k = 3 → 3e^{-50/6}
  CHECK(operator_tail_bound(1.0, 3, 0.1) == doctest::Approx(3 * std::exp(-50.0 / 6)));
}

TEST_CASE("rip width") {
  CHECK(rip_width(1, 0.1, RipVariant::bernstein).g == 0.0);
  CHECK(rip_width(1, 0.1, RipVariant::operator_bernstein).g == 0.0);
  CHECK(rip_width(10, 0.1, RipVariant::bernstein).g == doctest::Approx(0.6));
  CHECK(rip_width(4, 0.1, RipVariant::operator_bernstein).g == doctest::Approx(0.2 * std::sqrt(12.0)));
}

TEST_CASE("stable recovery feasibility") {
  const double s = 1.0 / std::sqrt(200.0);
  CHECK(stable_recovery_feasible(22, s));
  CHECK_FALSE(stable_recovery_feasible(23, s));
  CHECK(stable_recovery_feasible(1, 0.9));
}

TEST_CASE("separation condition arithmetic") {
  const auto c = separation_condition(0.1, 0.05, 0.08, 4, 9);
  CHECK(c.g_x == doctest::Approx(0.2 * std::sqrt(3.0)));
  CHECK(c.g_e == doctest::Approx(0.1 * std::sqrt(8.0)));
  CHECK(c.w == 13);
  CHECK(c.g_joint == doctest::Approx(c.g_x + 0.08));
  CHECK(c.margin == doctest::Approx(1.0 - c.g_joint - 0.08 * std::sqrt(13.0)));
  CHECK(c.ok == (c.margin > 0));
  CHECK(c.g_joint_scaled == doctest::Approx(c.g_x + 0.08 * 6.0));

  // No second dictionary: only the single-dictionary width remains.
  const auto single = separation_condition(0.1, 0.0, 0.0, 5, 1);
  CHECK(single.margin == doctest::Approx(1.0 - 0.2 * 2.0));
}

TEST_CASE("property: bounds decrease in their coherence input") {
  Rng rng(2024);
  for (int rep = 0; rep < 2000; ++rep) {
    const double a = 1e-3 + (1.0 - 1e-3) * rng.uniform();
    const double b = 1e-3 + (1.0 - 1e-3) * rng.uniform();
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    if (lo == hi) continue;
    const auto rl = sparsity_bounds(lo, lo);
    const auto rh = sparsity_bounds(hi, hi);
    CHECK(rl.worst_case_k > rh.worst_case_k);
    CHECK(rl.heuristic_k > rh.heuristic_k);
    CHECK(rl.bernstein_k > rh.bernstein_k);
    CHECK(rl.operator_k > rh.operator_k);
    CHECK(rl.bpdn_stable_k > rh.bpdn_stable_k);
    CHECK(rl.bernstein_floor >= rh.bernstein_floor);
    if (lo <= 0.5) CHECK(rl.bernstein_k >= rl.heuristic_k);
  }
}

TEST_CASE("property: tails lie in [0,1] and decrease in t") {
  Rng rng(77);
  for (int rep = 0; rep < 2000; ++rep) {
    const Index k = 2 + static_cast<Index>(rng.uniform_index(40));
    const double sigma = 0.01 + 0.5 * rng.uniform();
    const double t1 = 1e-3 + 2.0 * rng.uniform();
    const double t2 = t1 + 1e-3 + rng.uniform();
    const double q1 = quadratic_form_tail_bound(t1, k, sigma, 1.0);
    const double q2 = quadratic_form_tail_bound(t2, k, sigma, 1.0);
    const double o1 = operator_tail_bound(t1, k, sigma);
    const double o2 = operator_tail_bound(t2, k, sigma);
    const double p = pairwise_tail_bound(k, sigma);
    for (double v : {q1, q2, o1, o2, p}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(q2 <= q1);
    CHECK(o2 <= o1);
  }
}

TEST_CASE("bounds in single precision") {
  const auto r = sparsity_bounds(0.3124f, 0.0707f);
  CHECK(r.bernstein_floor == 25);
  CHECK(r.bpdn_stable_floor == 23);
}
