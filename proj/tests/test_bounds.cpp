// Copyright 2026 The msd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "msd/bounds.hpp"
#include "msd/simlab.hpp"

using namespace msd;

TEST_CASE("theorem parameters match high-precision reference values") {
  // References computed independently with 30-digit arithmetic.
  const auto p = theorem_params(1000, 10, 200, 0.05, 1.0, 1.0);
  REQUIRE(p.alpha ==
          Catch::Approx(0.173081838260228533818300872066).epsilon(1e-14));

  const auto q = theorem_params(1000, 10, 100, 0.99, 1.0, 1.0);
  REQUIRE(q.alpha ==
          Catch::Approx(0.014177683769573534385962513193).epsilon(1e-14));

  // beta = 2 exactly when mu_y = 1 and delta = e^-2.
  const auto b = theorem_params(1000, 10, 100, std::exp(-2.0), 1.0, 1.0);
  REQUIRE(b.beta == Catch::Approx(2.0).epsilon(1e-15));
  // beta does not depend on m.
  const auto b2 = theorem_params(1000, 10, 100000, std::exp(-2.0), 1.0, 1.0);
  REQUIRE(b2.beta == b.beta);
}

TEST_CASE("alpha and gamma vanish as m grows") {
  double prev_alpha = 1e300, prev_gamma = 1e300;
  for (Index m : {100, 1000, 10000, 1000000}) {
    const auto p = theorem_params(10000000, 10, m, 0.05, 1.5, 5.0);
    REQUIRE(p.alpha < prev_alpha);
    REQUIRE(p.gamma < prev_gamma);
    prev_alpha = p.alpha;
    prev_gamma = p.gamma;
  }
  REQUIRE(prev_alpha < 0.02);
  REQUIRE(prev_gamma < 0.03);
}

TEST_CASE("theorem parameter preconditions") {
  REQUIRE_THROWS_AS(theorem_params(10, 2, 5, 0.0, 1.0, 1.0),
                    InvalidParameter);
  REQUIRE_THROWS_AS(theorem_params(10, 2, 5, 1.0, 1.0, 1.0),
                    InvalidParameter);
  REQUIRE_THROWS_AS(theorem_params(10, 2, 5, 0.1, 0.5, 1.0),
                    InvalidParameter);
  REQUIRE_THROWS_AS(theorem_params(10, 2, 5, 0.1, 6.0, 1.0),
                    InvalidParameter);  // mu_s > n/r
  REQUIRE_THROWS_AS(theorem_params(10, 2, 5, 0.1, 1.0, 11.0),
                    InvalidParameter);  // mu_y > n
  REQUIRE_THROWS_AS(theorem_params(10, 2, 0, 0.1, 1.0, 1.0),
                    InvalidParameter);
  // Roundoff slack: computed coherences may undershoot 1 by machine noise.
  REQUIRE_NOTHROW(theorem_params(10, 2, 5, 0.1, 1.0 - 1e-12, 1.0 - 1e-12));
}

TEST_CASE("min_samples matches hand-checked values") {
  REQUIRE(min_samples(50, 1.0, 0.1) == 922);
  // delta = 2/e makes the log equal exactly 1, so the bound is 8/3.
  REQUIRE(min_samples(1, 1.0, 2.0 * std::exp(-1.0)) == 3);
}

TEST_CASE("min_samples is monotone in its arguments") {
  Index prev = 0;
  for (Index r : {1, 2, 5, 20, 100}) {
    const Index m = min_samples(r, 1.0, 0.1);
    REQUIRE(m >= prev);
    prev = m;
  }
  prev = 0;
  for (double mu : {1.0, 1.5, 2.0, 8.0}) {
    const Index m = min_samples(10, mu, 0.1);
    REQUIRE(m >= prev);
    prev = m;
  }
  prev = 0;
  for (double delta : {0.5, 0.1, 0.01, 0.001}) {
    const Index m = min_samples(10, 1.0, delta);
    REQUIRE(m >= prev);
    prev = m;
  }
}

TEST_CASE("min_samples is the gamma < 1 threshold") {
  const Index r = 20;
  const double mu_s = 1.7, delta = 0.05;
  const Index m_min = min_samples(r, mu_s, delta);
  REQUIRE(theorem_params(100000, r, m_min, delta, mu_s, 1.0).gamma <= 1.0);
  REQUIRE(theorem_params(100000, r, m_min - 1, delta, mu_s, 1.0).gamma > 1.0);
}

TEST_CASE("sandwich matches the high-precision reference evaluation") {
  // Fig. 1(a)-style parameters.
  const auto p = theorem_params(10000, 50, 2000, 0.05, 1.5, 13.6);
  REQUIRE(p.alpha ==
          Catch::Approx(0.744372649495228414081968620618).epsilon(1e-14));
  REQUIRE(p.beta ==
          Catch::Approx(9.02684429026382148447187181377).epsilon(1e-14));
  REQUIRE(p.gamma ==
          Catch::Approx(0.871831546776215385732675887541).epsilon(1e-14));
  const auto bound = sandwich(p, 1.0);
  REQUIRE(bound.lower ==
          Catch::Approx(-5.83200746310544750142052389635).epsilon(1e-13));
  REQUIRE(bound.upper ==
          Catch::Approx(0.348874529899045682816393724124).epsilon(1e-13));
  REQUIRE(bound.confidence == Catch::Approx(0.8).epsilon(1e-15));
  REQUIRE(bound.lower_valid);
}

TEST_CASE("sandwich collapses to zero at zero full residual") {
  const auto p = theorem_params(1000, 10, 500, 0.05, 1.2, 3.0);
  const auto bound = sandwich(p, 0.0);
  REQUIRE(bound.lower == 0.0);
  REQUIRE(bound.upper == 0.0);
}

TEST_CASE("sandwich limit with vanishing constants is (m - r mu)/n") {
  // Direct construction: alpha = beta = gamma = 0.
  const TheoremParams p{10000, 50, 2000, 0.05, 1.5, 13.6, 0.0, 0.0, 0.0};
  const auto bound = sandwich(p, 1.0);
  REQUIRE(bound.lower ==
          Catch::Approx((2000.0 - 50.0 * 1.5) / 10000.0).epsilon(1e-15));
  REQUIRE(bound.upper == Catch::Approx(2000.0 / 10000.0).epsilon(1e-15));
}

TEST_CASE("sandwich lower never exceeds upper when gamma < 1") {
  for (Index m : {600, 1000, 5000, 100000}) {
    for (double mu_y : {1.0, 4.0, 12.0}) {
      const auto p = theorem_params(100000, 10, m, 0.05, 1.5, mu_y);
      if (p.gamma >= 1.0) continue;
      const auto bound = sandwich(p, 2.7);
      REQUIRE(bound.lower <= bound.upper);
    }
  }
}

TEST_CASE("proof-display form squares the alpha factors") {
  const auto p = theorem_params(10000, 50, 5000, 0.05, 1.5, 2.0);
  const auto stmt = sandwich(p, 1.0, BoundForm::statement);
  const auto proof = sandwich(p, 1.0, BoundForm::proof_display);
  REQUIRE(proof.upper ==
          Catch::Approx((1.0 + p.alpha) * stmt.upper).epsilon(1e-14));
  REQUIRE(proof.upper > stmt.upper);
  REQUIRE(proof.lower < stmt.lower);
}

TEST_CASE("gamma at or above one raises unless explicitly allowed") {
  const auto p = theorem_params(100, 50, 51, 0.05, 1.5, 3.0);
  REQUIRE(p.gamma >= 1.0);
  REQUIRE_THROWS_AS(sandwich(p, 1.0), GammaTooLarge);
  const auto upper_only = sandwich(p, 1.0, BoundForm::statement, true);
  REQUIRE_FALSE(upper_only.lower_valid);
  REQUIRE(std::isinf(upper_only.lower));
  REQUIRE(upper_only.upper ==
          Catch::Approx((1.0 + p.alpha) * 51.0 / 100.0).epsilon(1e-14));
}

TEST_CASE("negative full residual is rejected") {
  const auto p = theorem_params(1000, 10, 500, 0.05, 1.2, 3.0);
  REQUIRE_THROWS_AS(sandwich(p, -1.0), InvalidParameter);
}

// --- Lemma validators -------------------------------------------------------

namespace {

struct LemmaFixture {
  SubspaceBasis basis;
  Vector y;
};

LemmaFixture make_fixture(Index n, Index r, SeedSpec seed) {
  auto basis = gen_gaussian_basis(n, r, seed);
  auto y = gen_perp_vector(basis, {seed.seed, seed.stream + 1});
  return {std::move(basis), std::move(y)};
}

}  // namespace

TEST_CASE("validators reject empty trial budgets") {
  const auto fx = make_fixture(50, 3, {900, 0});
  REQUIRE_THROWS_AS(validate_lemma1(fx.basis, fx.y, 20, 0.1, 0, {1, 0}),
                    InvalidParameter);
  REQUIRE_THROWS_AS(validate_lemma2(fx.basis, fx.y, 20, 0.1, 0, {1, 0}),
                    InvalidParameter);
  REQUIRE_THROWS_AS(validate_lemma3(fx.basis, 2000, 0.1, 0, {1, 0}),
                    InvalidParameter);
  REQUIRE_THROWS_AS(
      validate_lemma1(fx.basis, Vector::Zero(50), 20, 0.1, 10, {1, 0}),
      ZeroVector);
}

TEST_CASE("validators are deterministic in the seed") {
  const auto fx = make_fixture(100, 4, {901, 0});
  const auto a = validate_lemma2(fx.basis, fx.y, 60, 0.1, 50, {77, 3});
  const auto b = validate_lemma2(fx.basis, fx.y, 60, 0.1, 50, {77, 3});
  REQUIRE(a.failures == b.failures);
  REQUIRE(a.empirical_rate == b.empirical_rate);
  REQUIRE(a.certified_rate == 0.1);
}

TEST_CASE("lemma 1 never fails for a flat vector with a huge sample budget") {
  // mu(y) = 1 makes alpha tiny at large m; the bound then holds trivially.
  const Index n = 64;
  const auto basis = SubspaceBasis::from_orthonormal(
      Matrix::Identity(n, n).leftCols(2));
  Vector y = Vector::Zero(n);
  for (Index i = 2; i < n; ++i) {
    y(i) = 1.0;  // flat on the complement of S
  }
  const auto report = validate_lemma1(basis, y, 20000, 0.05, 1000, {55, 0});
  REQUIRE(report.failures == 0);
  REQUIRE(report.certified_rate == Catch::Approx(0.1));
}

TEST_CASE("lemma 1 empirical failure rate stays within its certificate") {
  const auto fx = make_fixture(400, 8, {902, 0});
  const double delta = 0.1;
  const Index trials = 600;
  const auto report =
      validate_lemma1(fx.basis, fx.y, 300, delta, trials, {903, 0});
  const double cert = report.certified_rate;
  const double slack =
      3.0 * std::sqrt(cert * (1.0 - cert) / static_cast<double>(trials));
  REQUIRE(report.empirical_rate <= cert + slack);
  REQUIRE(report.lemma_id == 1);
  REQUIRE(report.trials == trials);
}

TEST_CASE("lemma 2 empirical failure rate stays within its certificate") {
  const auto fx = make_fixture(400, 8, {904, 0});
  const double delta = 0.1;
  const Index trials = 600;
  const auto report =
      validate_lemma2(fx.basis, fx.y, 300, delta, trials, {905, 0});
  const double slack =
      3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(trials));
  REQUIRE(report.empirical_rate <= delta + slack);
  REQUIRE(report.certified_rate == delta);
}

TEST_CASE("lemma 2 degenerate full-space check") {
  // With U = I the restricted gram of distinct rows is a 0/1 diagonal, and
  // |U_omega^T y_omega|^2 = |y_omega|^2.
  const Index n = 16;
  const auto basis = SubspaceBasis::from_orthonormal(Matrix::Identity(n, n));
  Rng rng({906, 0});
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    y(i) = rng.normal();
  }
  const auto omega = sample_without_replacement(n, 7, {907, 0});
  const auto rb = restrict_basis(basis, omega);
  const Vector y_omega = restrict_vector(y, omega);
  REQUIRE((rb.matrix().transpose() * y_omega).squaredNorm() ==
          Catch::Approx(y_omega.squaredNorm()).epsilon(1e-14));
  // The validator runs on the same degenerate geometry.
  const auto report = validate_lemma2(basis, y, 8, 0.2, 200, {908, 0});
  REQUIRE(report.trials == 200);
}

TEST_CASE("lemma 3 empirical failure rate stays within its certificate") {
  const auto fx = make_fixture(400, 8, {909, 0});
  const double delta = 0.1;
  const double mu_s = subspace_coherence(fx.basis).mu;
  const Index m = 2 * min_samples(8, mu_s, delta);
  const Index trials = 400;
  const auto report = validate_lemma3(fx.basis, m, delta, trials, {910, 0});
  const double slack =
      3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(trials));
  REQUIRE(report.empirical_rate <= delta + slack);
}

TEST_CASE("lemma 3 rejects sample sizes with gamma >= 1") {
  const auto fx = make_fixture(100, 10, {911, 0});
  REQUIRE_THROWS_AS(validate_lemma3(fx.basis, 10, 0.05, 100, {912, 0}),
                    GammaTooLarge);
}

TEST_CASE("lemma 3 axis-aligned structure and singular-draw accounting") {
  // U = [e0 e1] in R^4: the restricted gram is diagonal with the draw
  // counts of rows 0 and 1, so lambda_min is the smaller count.
  const auto basis = SubspaceBasis::from_orthonormal(
      Matrix::Identity(4, 2));
  const SampleIndexSet omega({0, 1, 1, 0, 1}, SampleMode::with_replacement, 4);
  const auto rb = restrict_basis(basis, omega);
  const Matrix gram = rb.matrix().transpose() * rb.matrix();
  REQUIRE(gram(0, 0) == 2.0);
  REQUIRE(gram(1, 1) == 3.0);
  REQUIRE(gram(0, 1) == 0.0);

  // A draw that misses a basis row makes the gram singular; the validator
  // must count it as a failure. With U = [e0] in R^2 and m = 9 draws, a
  // miss happens once in 2^9 trials on average.
  const auto line = SubspaceBasis::from_orthonormal(
      Matrix::Identity(2, 1));
  const double mu_s = subspace_coherence(line).mu;
  REQUIRE(mu_s == 2.0);
  const Index m = min_samples(1, mu_s, 0.4);
  const auto report = validate_lemma3(line, m, 0.4, 5000, {913, 0});
  REQUIRE(report.failures >= 1);  // singular draws observed and flagged
  REQUIRE(report.empirical_rate <= 0.4);
}
