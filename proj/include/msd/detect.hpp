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
#include <cstdint>
#include <limits>
#include <optional>

#include "msd/errors.hpp"
#include "msd/estimator.hpp"
#include "msd/vecspace.hpp"

namespace msd {

// ---------------------------------------------------------------------------
// Chi-square machinery. Series / continued-fraction evaluation of the
// regularized incomplete gamma function, in the usual split at x = a + 1.
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr int kGammaMaxIter = 600;

// Lower regularized gamma by power series; converges fast for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double denom = a;
  for (int i = 0; i < kGammaMaxIter; ++i) {
    denom += 1.0;
    term *= x / denom;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) {
      break;
    }
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma by modified Lentz continued fraction; converges
// fast for x >= a + 1.
inline double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kGammaMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-17) {
      break;
    }
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

// P(a, x), the regularized lower incomplete gamma function.
inline double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) {
    throw InvalidParameter("regularized_gamma_p: need a > 0");
  }
  if (x < 0.0) {
    throw InvalidParameter("regularized_gamma_p: need x >= 0");
  }
  if (x == 0.0) {
    return 0.0;
  }
  return x < a + 1.0 ? detail::gamma_p_series(a, x)
                     : 1.0 - detail::gamma_q_continued_fraction(a, x);
}

// Q(a, x) = 1 - P(a, x), evaluated on the side that avoids cancellation.
inline double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) {
    throw InvalidParameter("regularized_gamma_q: need a > 0");
  }
  if (x < 0.0) {
    throw InvalidParameter("regularized_gamma_q: need x >= 0");
  }
  if (x == 0.0) {
    return 1.0;
  }
  return x < a + 1.0 ? 1.0 - detail::gamma_p_series(a, x)
                     : detail::gamma_q_continued_fraction(a, x);
}

inline double chi2_cdf(double x, int dof) {
  if (dof < 1) {
    throw InvalidParameter("chi2_cdf: need dof >= 1");
  }
  if (x <= 0.0) {
    return 0.0;
  }
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

inline double chi2_sf(double x, int dof) {
  if (dof < 1) {
    throw InvalidParameter("chi2_sf: need dof >= 1");
  }
  if (x <= 0.0) {
    return 1.0;
  }
  return regularized_gamma_q(0.5 * dof, 0.5 * x);
}

inline double chi2_pdf(double x, int dof) {
  if (dof < 1) {
    throw InvalidParameter("chi2_pdf: need dof >= 1");
  }
  if (x <= 0.0) {
    return 0.0;
  }
  const double half = 0.5 * dof;
  return std::exp((half - 1.0) * std::log(x) - 0.5 * x - half * std::log(2.0) -
                  std::lgamma(half));
}

// Quantile of the central chi-square law: the x with CDF(x) = p, found by
// bracketing plus bisection and a Newton polish, to |CDF(x) - p| <= 1e-10.
inline double chi2_quantile(double p, int dof) {
  if (dof < 1) {
    throw InvalidParameter("chi2_quantile: need dof >= 1");
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidParameter("chi2_quantile: p must lie in (0, 1)");
  }
  constexpr double tol = 1e-10;
  double lo = 0.0;
  double hi = dof + 10.0 * std::sqrt(2.0 * dof) + 10.0;
  while (chi2_cdf(hi, dof) < p) {
    hi *= 2.0;
    if (hi > 1e300) {
      throw InvalidParameter("chi2_quantile: bracket expansion failed");
    }
  }
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double cdf = chi2_cdf(x, dof);
    if (std::abs(cdf - p) <= tol) {
      return x;
    }
    if (cdf < p) {
      lo = x;
    } else {
      hi = x;
    }
    // Newton step from the current iterate, falling back to bisection
    // whenever it leaves the bracket or the density vanishes.
    const double pdf = chi2_pdf(x, dof);
    double next = pdf > 0.0 ? x - (cdf - p) / pdf : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    if (next == x) {
      break;
    }
    x = next;
  }
  return x;
}

// Survival function of the noncentral chi-square law via the Poisson
// mixture sum_j Poisson(j; nc/2) * CentralChi2SF(x; dof + 2j). Terms are
// accumulated outward from the modal Poisson weight until the remaining
// tail mass is below 1e-12. At nc = 0 this is exactly the central SF.
inline double noncentral_chi2_sf(double x, int dof, double noncentrality) {
  if (dof < 1) {
    throw InvalidParameter("noncentral_chi2_sf: need dof >= 1");
  }
  if (noncentrality < 0.0) {
    throw InvalidParameter("noncentral_chi2_sf: need noncentrality >= 0");
  }
  if (x < 0.0) {
    throw InvalidParameter("noncentral_chi2_sf: need x >= 0");
  }
  if (noncentrality == 0.0) {
    return chi2_sf(x, dof);
  }
  if (x == 0.0) {
    return 1.0;
  }
  constexpr double tail = 1e-12;
  const double lambda = 0.5 * noncentrality;
  const auto mode = static_cast<std::int64_t>(lambda);
  const double log_w_mode =
      static_cast<double>(mode) * std::log(lambda) - lambda -
      std::lgamma(static_cast<double>(mode) + 1.0);
  const double w_mode = std::exp(log_w_mode);

  double sum = w_mode * chi2_sf(x, dof + 2 * static_cast<int>(mode));
  double weight_seen = w_mode;

  // Downward from the mode.
  double w = w_mode;
  for (std::int64_t j = mode; j >= 1; --j) {
    w *= static_cast<double>(j) / lambda;
    sum += w * chi2_sf(x, dof + 2 * static_cast<int>(j - 1));
    weight_seen += w;
    if (w < tail * 1e-3) {
      break;
    }
  }
  // Upward from the mode until the Poisson tail is negligible.
  w = w_mode;
  for (std::int64_t j = mode + 1; weight_seen < 1.0 - tail; ++j) {
    w *= lambda / static_cast<double>(j);
    sum += w * chi2_sf(x, dof + 2 * static_cast<int>(j));
    weight_seen += w;
    if (j > mode + 100000) {
      throw InvalidParameter("noncentral_chi2_sf: series failed to converge");
    }
  }
  return std::min(sum, 1.0);
}

// P_D for a threshold test on a noncentral chi-square statistic. Monotone
// nondecreasing in the noncentrality parameter.
inline double detection_probability(double noncentrality, int dof,
                                    double eta) {
  if (eta < 0.0) {
    throw InvalidParameter("detection_probability: need eta >= 0");
  }
  return noncentral_chi2_sf(eta, dof, noncentrality);
}

// ---------------------------------------------------------------------------
// Hypothesis tests.
// ---------------------------------------------------------------------------

enum class Hypothesis { H0, H1 };

inline const char* to_string(Hypothesis h) {
  return h == Hypothesis::H0 ? "H0" : "H1";
}

// Degrees of freedom for the noisy test threshold. The default counts the
// residual dimensions m - rank(U_omega); `fixed` pins an explicit value
// (e.g. r) for comparison.
struct DofPolicy {
  enum class Kind { residual_rank, fixed };
  Kind kind = Kind::residual_rank;
  Index fixed_dof = 0;

  static DofPolicy residual_rank() { return DofPolicy{}; }
  static DofPolicy fixed(Index k) {
    if (k < 1) {
      throw InvalidParameter("DofPolicy::fixed: need dof >= 1");
    }
    return DofPolicy{Kind::fixed, k};
  }
};

struct TestConfig {
  double lambda_fa = 0.05;   // target false-alarm probability
  double noise_sigma = 0.0;  // noise standard deviation; 0 means noiseless
  DofPolicy dof_policy{};
};

struct DetectionOutcome {
  double statistic;
  double threshold;
  Hypothesis decision;  // H1 iff statistic > threshold
  Index dof;
  std::optional<double> noncentrality;
};

// Scale-relative numerical zero for the noiseless threshold: in-subspace
// vectors produce machine-scale residuals, never exact zeros.
inline constexpr double kNoiselessTolerance = 1e-9;

inline DetectionOutcome noiseless_test(const SubspaceBasis& basis,
                                       const Vector& v,
                                       const SampleIndexSet& omega) {
  detail::check_triple(basis, v, omega, "noiseless_test");
  const Vector v_omega = restrict_vector(v, omega);
  const RestrictedFit fit =
      least_squares_fit(restrict_basis(basis, omega), v_omega);
  const double statistic = (v_omega - fit.fitted).squaredNorm();
  const double threshold = kNoiselessTolerance * v_omega.squaredNorm();
  return DetectionOutcome{
      statistic, threshold,
      statistic > threshold ? Hypothesis::H1 : Hypothesis::H0,
      omega.size() - fit.rank, std::nullopt};
}

// Core of the noisy test, starting from an already-restricted observation
// vector. The measurement model adds one noise draw per observation, so
// harnesses that sample with replacement feed this form directly.
inline DetectionOutcome noisy_test_restricted(const RestrictedBasis& rb,
                                              const Vector& v_omega,
                                              const TestConfig& cfg) {
  if (!(cfg.noise_sigma > 0.0)) {
    throw InvalidParameter("noisy_test: need noise_sigma > 0");
  }
  if (!(cfg.lambda_fa > 0.0 && cfg.lambda_fa < 1.0)) {
    throw InvalidParameter("noisy_test: lambda must lie in (0, 1)");
  }
  const RestrictedFit fit = least_squares_fit(rb, v_omega);
  const double statistic = (v_omega - fit.fitted).squaredNorm();
  const Index dof = cfg.dof_policy.kind == DofPolicy::Kind::residual_rank
                        ? rb.sample_size() - fit.rank
                        : cfg.dof_policy.fixed_dof;
  if (dof < 1) {
    throw InvalidParameter(
        "noisy_test: residual has no degrees of freedom (m <= rank)");
  }
  const double threshold =
      cfg.noise_sigma * cfg.noise_sigma *
      chi2_quantile(1.0 - cfg.lambda_fa, static_cast<int>(dof));
  return DetectionOutcome{
      statistic, threshold,
      statistic > threshold ? Hypothesis::H1 : Hypothesis::H0, dof,
      std::nullopt};
}

// t(v~_omega) = |v~_omega - P_{S_omega} v~_omega|^2 against the threshold
// eta_lambda = sigma^2 * Chi2Quantile(1 - lambda, dof). The caller supplies
// the noisy vector.
inline DetectionOutcome noisy_test(const SubspaceBasis& basis,
                                   const Vector& v_with_noise,
                                   const SampleIndexSet& omega,
                                   const TestConfig& cfg) {
  detail::check_triple(basis, v_with_noise, omega, "noisy_test");
  return noisy_test_restricted(restrict_basis(basis, omega),
                               restrict_vector(v_with_noise, omega), cfg);
}

}  // namespace msd
