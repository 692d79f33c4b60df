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

#pragma once

#include <cmath>
#include <limits>

#include "msd/coherence.hpp"
#include "msd/errors.hpp"
#include "msd/estimator.hpp"
#include "msd/sampling.hpp"
#include "msd/vecspace.hpp"

namespace msd {

// Parameter bundle of the concentration theorem. Natural logarithms
// throughout: the underlying tail bounds are exp-based.
//
//   alpha = sqrt(2 mu_y^2 log(1/delta) / m)
//   beta  = sqrt(2 mu_y   log(1/delta))
//   gamma = sqrt(8 r mu_s log(2r/delta) / (3m))
struct TheoremParams {
  Index n;
  Index r;
  Index m;
  double delta;
  double mu_s;
  double mu_y;
  double alpha;
  double beta;
  double gamma;
};

namespace detail {
// Coherence values computed from real bases can undershoot their exact
// bounds by roundoff; permit that much and no more.
inline constexpr double kCoherenceSlack = 1e-9;
}  // namespace detail

inline TheoremParams theorem_params(Index n, Index r, Index m, double delta,
                                    double mu_s, double mu_y) {
  if (n < 1 || r < 1 || r > n) {
    throw InvalidParameter("theorem_params: need 1 <= r <= n");
  }
  if (m < 1) {
    throw InvalidParameter("theorem_params: need m >= 1");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidParameter("theorem_params: delta must lie in (0, 1)");
  }
  const double mu_s_max = static_cast<double>(n) / static_cast<double>(r);
  if (mu_s < 1.0 - detail::kCoherenceSlack ||
      mu_s > mu_s_max * (1.0 + detail::kCoherenceSlack)) {
    throw InvalidParameter("theorem_params: mu_s must lie in [1, n/r]");
  }
  if (mu_y < 1.0 - detail::kCoherenceSlack ||
      mu_y > static_cast<double>(n) * (1.0 + detail::kCoherenceSlack)) {
    throw InvalidParameter("theorem_params: mu_y must lie in [1, n]");
  }
  const double log_inv_delta = std::log(1.0 / delta);
  const double md = static_cast<double>(m);
  const double alpha = std::sqrt(2.0 * mu_y * mu_y * log_inv_delta / md);
  const double beta = std::sqrt(2.0 * mu_y * log_inv_delta);
  const double gamma = std::sqrt(8.0 * static_cast<double>(r) * mu_s *
                                 std::log(2.0 * static_cast<double>(r) / delta) /
                                 (3.0 * md));
  return TheoremParams{n, r, m, delta, mu_s, mu_y, alpha, beta, gamma};
}

// Smallest m with m >= (8/3) r mu_s log(2r/delta), the theorem's sample
// complexity (equivalently, the smallest m giving gamma <= 1).
inline Index min_samples(Index r, double mu_s, double delta) {
  if (r < 1) {
    throw InvalidParameter("min_samples: need r >= 1");
  }
  if (mu_s < 1.0 - detail::kCoherenceSlack) {
    throw InvalidParameter("min_samples: mu_s must be at least 1");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidParameter("min_samples: delta must lie in (0, 1)");
  }
  const double rhs = 8.0 / 3.0 * static_cast<double>(r) * mu_s *
                     std::log(2.0 * static_cast<double>(r) / delta);
  return static_cast<Index>(std::ceil(rhs));
}

// The theorem statement carries (1 +/- alpha) factors while the proof's
// closing display carries (1 +/- alpha)^2; the two are not reconciled in the
// source material, so both are available. `statement` is the default.
enum class BoundForm { statement, proof_display };

// High-probability two-sided bound on t = |v_omega - P_{S_omega} v_omega|^2
// in terms of the full residual |v - P_S v|^2:
//
//   lower = [m(1-alpha) - r mu_s (1+beta)^2 / (1-gamma)] / n * full
//   upper = (1+alpha) (m/n) * full
//
// The lower bound may be negative; it is not clamped. Holds with
// probability at least 1 - 4 delta.
struct SandwichBound {
  double lower;
  double upper;
  double full_residual;
  double confidence;  // 1 - 4 delta
  bool lower_valid;   // false only when gamma >= 1 was explicitly allowed
};

inline SandwichBound sandwich(const TheoremParams& p, double full_residual,
                              BoundForm form = BoundForm::statement,
                              bool allow_vacuous_lower = false) {
  if (full_residual < 0.0) {
    throw InvalidParameter("sandwich: full residual must be nonnegative");
  }
  const double md = static_cast<double>(p.m);
  const double nd = static_cast<double>(p.n);
  const double up_factor = form == BoundForm::statement
                               ? 1.0 + p.alpha
                               : (1.0 + p.alpha) * (1.0 + p.alpha);
  const double upper = up_factor * md / nd * full_residual;
  const double confidence = 1.0 - 4.0 * p.delta;
  if (p.gamma >= 1.0) {
    if (!allow_vacuous_lower) {
      throw GammaTooLarge(
          "sandwich: gamma >= 1 makes the lower bound vacuous; pass "
          "allow_vacuous_lower to get the upper bound alone");
    }
    return SandwichBound{-std::numeric_limits<double>::infinity(), upper,
                         full_residual, confidence, false};
  }
  const double lo_factor = form == BoundForm::statement
                               ? 1.0 - p.alpha
                               : (1.0 - p.alpha) * (1.0 - p.alpha);
  const double lower =
      (md * lo_factor - static_cast<double>(p.r) * p.mu_s *
                            (1.0 + p.beta) * (1.0 + p.beta) / (1.0 - p.gamma)) /
      nd * full_residual;
  return SandwichBound{lower, upper, full_residual, confidence, true};
}

// Empirical failure counts for the three supporting concentration lemmas,
// measured over independent with-replacement index draws.
struct LemmaValidationReport {
  int lemma_id;
  Index trials;
  Index failures;
  double empirical_rate;
  double certified_rate;  // 2 delta for lemma 1, delta for lemmas 2 and 3
};

namespace detail {
inline void check_validator_args(const SubspaceBasis& basis, Index m,
                                 double delta, Index trials) {
  if (trials < 1) {
    throw InvalidParameter("lemma validation: trials must be positive");
  }
  if (m < 1) {
    throw InvalidParameter("lemma validation: m must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidParameter("lemma validation: delta must lie in (0, 1)");
  }
  (void)basis;
}

inline void check_validator_vector(const SubspaceBasis& basis,
                                   const Vector& y) {
  if (y.size() != basis.ambient_dim()) {
    throw DimensionMismatch("lemma validation: vector length must match n");
  }
  if (y.squaredNorm() == 0.0) {
    throw ZeroVector("lemma validation: y must be nonzero");
  }
}
}  // namespace detail

// Lemma 1: (1-alpha)(m/n)|y|^2 <= |y_omega|^2 <= (1+alpha)(m/n)|y|^2 with
// probability >= 1 - 2 delta. Trial t uses stream seed.stream + t.
inline LemmaValidationReport validate_lemma1(const SubspaceBasis& basis,
                                             const Vector& y, Index m,
                                             double delta, Index trials,
                                             SeedSpec seed) {
  detail::check_validator_args(basis, m, delta, trials);
  detail::check_validator_vector(basis, y);
  const Index n = basis.ambient_dim();
  const TheoremParams p =
      theorem_params(n, basis.dim(), m, delta, subspace_coherence(basis).mu,
                     vector_coherence(y).mu);
  const double energy = y.squaredNorm();
  const double scale = static_cast<double>(m) / static_cast<double>(n) * energy;
  const double lo = (1.0 - p.alpha) * scale;
  const double hi = (1.0 + p.alpha) * scale;
  Index failures = 0;
  for (Index t = 0; t < trials; ++t) {
    const auto omega =
        sample_with_replacement(n, m, SeedSpec{seed.seed, seed.stream + static_cast<std::uint64_t>(t)});
    const double observed = restrict_vector(y, omega).squaredNorm();
    if (observed < lo || observed > hi) {
      ++failures;
    }
  }
  return LemmaValidationReport{1, trials, failures,
                               static_cast<double>(failures) /
                                   static_cast<double>(trials),
                               2.0 * delta};
}

// Lemma 2: |U_omega^T y_omega|^2 <= (beta+1)^2 (m/n)(r mu_s / n)|y|^2 with
// probability >= 1 - delta.
inline LemmaValidationReport validate_lemma2(const SubspaceBasis& basis,
                                             const Vector& y, Index m,
                                             double delta, Index trials,
                                             SeedSpec seed) {
  detail::check_validator_args(basis, m, delta, trials);
  detail::check_validator_vector(basis, y);
  const Index n = basis.ambient_dim();
  const Index r = basis.dim();
  const TheoremParams p = theorem_params(
      n, r, m, delta, subspace_coherence(basis).mu, vector_coherence(y).mu);
  const double bound = (p.beta + 1.0) * (p.beta + 1.0) *
                       (static_cast<double>(m) / static_cast<double>(n)) *
                       (static_cast<double>(r) * p.mu_s /
                        static_cast<double>(n)) *
                       y.squaredNorm();
  Index failures = 0;
  for (Index t = 0; t < trials; ++t) {
    const auto omega =
        sample_with_replacement(n, m, SeedSpec{seed.seed, seed.stream + static_cast<std::uint64_t>(t)});
    const RestrictedBasis rb = restrict_basis(basis, omega);
    const Vector y_omega = restrict_vector(y, omega);
    const double observed =
        (rb.matrix().transpose() * y_omega).squaredNorm();
    if (observed > bound) {
      ++failures;
    }
  }
  return LemmaValidationReport{2, trials, failures,
                               static_cast<double>(failures) /
                                   static_cast<double>(trials),
                               delta};
}

// Lemma 3: |(U_omega^T U_omega)^{-1}| <= n / ((1-gamma) m) with probability
// >= 1 - delta, checked through the equivalent contrapositive
// lambda_min(U_omega^T U_omega) >= (1-gamma) m/n. A singular normal matrix
// (lambda_min = 0) counts as a failure.
inline LemmaValidationReport validate_lemma3(const SubspaceBasis& basis,
                                             Index m, double delta,
                                             Index trials, SeedSpec seed) {
  detail::check_validator_args(basis, m, delta, trials);
  const Index n = basis.ambient_dim();
  const Index r = basis.dim();
  // mu_y is irrelevant to this lemma; any legal value works.
  const TheoremParams p =
      theorem_params(n, r, m, delta, subspace_coherence(basis).mu, 1.0);
  if (p.gamma >= 1.0) {
    throw GammaTooLarge("validate_lemma3: gamma >= 1; raise m to at least "
                        "min_samples(r, mu_s, delta)");
  }
  const double floor_value =
      (1.0 - p.gamma) * static_cast<double>(m) / static_cast<double>(n);
  Index failures = 0;
  for (Index t = 0; t < trials; ++t) {
    const auto omega =
        sample_with_replacement(n, m, SeedSpec{seed.seed, seed.stream + static_cast<std::uint64_t>(t)});
    const RestrictedBasis rb = restrict_basis(basis, omega);
    const Matrix gram = rb.matrix().transpose() * rb.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram,
                                              Eigen::EigenvaluesOnly);
    const double lambda_min = eig.eigenvalues()(0);
    if (lambda_min < floor_value) {
      ++failures;
    }
  }
  return LemmaValidationReport{3, trials, failures,
                               static_cast<double>(failures) /
                                   static_cast<double>(trials),
                               delta};
}

}  // namespace msd
