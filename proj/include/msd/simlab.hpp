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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>
#include <utility>
#include <vector>

#include "msd/coherence.hpp"
#include "msd/detect.hpp"
#include "msd/errors.hpp"
#include "msd/estimator.hpp"
#include "msd/sampling.hpp"
#include "msd/vecspace.hpp"

namespace msd {

// Stream-id layout inside one experiment. Trial t at grid row i draws from
// stream base + i * 2^32 + t; generator streams live far above at 2^62 so
// the two ranges cannot collide.
inline constexpr std::uint64_t kStreamBasis = std::uint64_t{1} << 62;
inline constexpr std::uint64_t kStreamVector = (std::uint64_t{1} << 62) + 1;
inline constexpr std::uint64_t kStreamVectorAlt = (std::uint64_t{1} << 62) + 2;

inline constexpr std::uint64_t trial_stream(std::uint64_t row,
                                            std::uint64_t trial) {
  return (row << 32) + trial;
}

enum class BasisKind { gaussian, fourier, coherent };
enum class VectorKind { in_perp, in_subspace };

inline const char* to_string(BasisKind k) {
  switch (k) {
    case BasisKind::gaussian: return "gaussian";
    case BasisKind::fourier: return "fourier";
    default: return "coherent";
  }
}

inline const char* to_string(VectorKind k) {
  return k == VectorKind::in_perp ? "in_perp" : "in_subspace";
}

struct ExperimentConfig {
  Index n = 0;
  Index r = 0;
  BasisKind basis_kind = BasisKind::gaussian;
  double spike = 0.0;  // coherent basis only
  std::vector<Index> m_grid;
  Index trials_per_m = 100;
  SampleMode sampling_mode = SampleMode::without_replacement;
  SeedSpec seed{};
  VectorKind vector_kind = VectorKind::in_perp;

  void validate() const {
    if (n < 1 || r < 1 || r > n) {
      throw InvalidParameter("ExperimentConfig: need 1 <= r <= n");
    }
    if (basis_kind == BasisKind::coherent && spike < 0.0) {
      throw InvalidParameter("ExperimentConfig: spike must be nonnegative");
    }
    if (m_grid.empty()) {
      throw InvalidParameter("ExperimentConfig: m_grid must be nonempty");
    }
    for (size_t i = 0; i < m_grid.size(); ++i) {
      if (m_grid[i] < 1) {
        throw InvalidParameter("ExperimentConfig: every m must be positive");
      }
      if (i > 0 && m_grid[i] <= m_grid[i - 1]) {
        throw InvalidParameter(
            "ExperimentConfig: m_grid must be strictly increasing");
      }
      if (sampling_mode == SampleMode::without_replacement && m_grid[i] > n) {
        throw InvalidParameter(
            "ExperimentConfig: m exceeds n under without-replacement "
            "sampling");
      }
    }
    if (trials_per_m < 1) {
      throw InvalidParameter("ExperimentConfig: trials_per_m must be >= 1");
    }
    if (vector_kind == VectorKind::in_perp && r == n) {
      throw InvalidParameter(
          "ExperimentConfig: in_perp vector requires r < n");
    }
  }
};

// Per-m residual statistics over repeated index draws.
struct TrialSummary {
  Index m;
  double min;
  double mean;
  double max;
  double mu_s;
  double mu_y;  // coherence of the experiment vector
};

namespace detail {

// Runs body(0..count-1) on up to `threads` workers. Each index owns its
// output slot, so results are identical for every thread count.
template <typename F>
inline void parallel_for(Index count, int threads, F&& body) {
  if (threads <= 1 || count <= 1) {
    for (Index i = 0; i < count; ++i) {
      body(i);
    }
    return;
  }
  const int workers =
      static_cast<int>(std::min<Index>(threads, count));
  std::atomic<Index> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&] {
    try {
      for (Index i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        body(i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) {
        first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers) - 1);
  for (int w = 1; w < workers; ++w) {
    pool.emplace_back(run);
  }
  run();
  for (auto& t : pool) {
    t.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

}  // namespace detail

// Orthonormalized standard-Gaussian matrix. Rank deficiency has probability
// zero; one redraw is attempted before giving up.
inline SubspaceBasis gen_gaussian_basis(Index n, Index r, SeedSpec seed) {
  if (n < 1 || r < 1 || r > n) {
    throw InvalidParameter("gen_gaussian_basis: need 1 <= r <= n");
  }
  Rng rng(seed);
  for (int attempt = 0;; ++attempt) {
    Matrix raw(n, r);
    for (Index j = 0; j < r; ++j) {
      for (Index i = 0; i < n; ++i) {
        raw(i, j) = rng.normal();
      }
    }
    try {
      return SubspaceBasis::orthonormalize(raw);
    } catch (const RankDeficient&) {
      if (attempt >= 1) {
        throw;
      }
    }
  }
}

// Frequencies whose realified columns total exactly r: frequency 0 and (for
// even n) n/2 contribute one flat column each; every other frequency k
// contributes the cosine/sine pair at k. Selecting whole pairs is what keeps
// every row norm equal, hence coherence exactly 1.
inline std::vector<Index> fourier_frequencies_for_rank(Index n, Index r) {
  if (n < 1 || r < 1 || r > n) {
    throw InvalidParameter("fourier_frequencies_for_rank: need 1 <= r <= n");
  }
  std::vector<Index> freqs;
  Index count = 0;
  bool used_zero = false;
  bool used_nyquist = false;
  if (r % 2 == 1) {
    freqs.push_back(0);
    used_zero = true;
    count = 1;
  }
  Index k = 1;
  const Index last_pair = (n - 1) / 2;  // largest k with a genuine pair
  while (count < r) {
    if (k <= last_pair && count + 2 <= r) {
      freqs.push_back(k++);
      count += 2;
    } else if (n % 2 == 0 && !used_nyquist) {
      freqs.push_back(n / 2);
      used_nyquist = true;
      count += 1;
    } else if (!used_zero) {
      freqs.push_back(0);
      used_zero = true;
      count += 1;
    } else {
      throw InvalidParameter(
          "fourier_frequencies_for_rank: cannot reach the requested rank");
    }
  }
  std::sort(freqs.begin(), freqs.end());
  return freqs;
}

// Real orthonormal basis drawn from the discrete Fourier family. Frequency
// 0 maps to the constant column, n/2 (even n) to the alternating-sign
// column, and any other k to the pair sqrt(2/n) cos(2 pi k j / n),
// sqrt(2/n) sin(2 pi k j / n). Phases are reduced modulo n in exact integer
// arithmetic before evaluating the trigonometric functions.
inline SubspaceBasis gen_fourier_basis(Index n,
                                       const std::vector<Index>& frequencies) {
  if (n < 1 || frequencies.empty()) {
    throw InvalidParameter("gen_fourier_basis: need n >= 1 and frequencies");
  }
  {
    std::vector<Index> sorted = frequencies;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw InvalidParameter("gen_fourier_basis: duplicate frequency");
    }
  }
  Index cols = 0;
  for (Index k : frequencies) {
    if (k < 0 || k > n / 2) {
      throw InvalidParameter("gen_fourier_basis: frequency " +
                             std::to_string(k) + " outside [0, n/2]");
    }
    cols += (k == 0 || 2 * k == n) ? 1 : 2;
  }
  if (cols > n) {
    throw InvalidParameter("gen_fourier_basis: more columns than dimensions");
  }
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  const double pair_scale = std::sqrt(2.0 / static_cast<double>(n));
  Matrix u(n, cols);
  Index c = 0;
  for (Index k : frequencies) {
    if (k == 0) {
      u.col(c++).setConstant(inv_sqrt_n);
    } else if (2 * k == n) {
      for (Index j = 0; j < n; ++j) {
        u(j, c) = (j % 2 == 0 ? inv_sqrt_n : -inv_sqrt_n);
      }
      ++c;
    } else {
      for (Index j = 0; j < n; ++j) {
        const double phase = 2.0 * std::numbers::pi *
                             static_cast<double>((j * k) % n) /
                             static_cast<double>(n);
        u(j, c) = pair_scale * std::cos(phase);
        u(j, c + 1) = pair_scale * std::sin(phase);
      }
      c += 2;
    }
  }
  return SubspaceBasis::from_orthonormal(std::move(u));
}

// Gaussian basis whose first r rows are amplified by (1 + spike) before
// orthonormalization; coherence grows with spike. spike = 0 reproduces
// gen_gaussian_basis draw for draw.
inline SubspaceBasis gen_coherent_basis(Index n, Index r, double spike,
                                        SeedSpec seed) {
  if (n < 1 || r < 1 || r > n) {
    throw InvalidParameter("gen_coherent_basis: need 1 <= r <= n");
  }
  if (spike < 0.0) {
    throw InvalidParameter("gen_coherent_basis: spike must be nonnegative");
  }
  Rng rng(seed);
  for (int attempt = 0;; ++attempt) {
    Matrix raw(n, r);
    for (Index j = 0; j < r; ++j) {
      for (Index i = 0; i < n; ++i) {
        raw(i, j) = rng.normal();
      }
    }
    raw.topRows(r) *= (1.0 + spike);
    try {
      return SubspaceBasis::orthonormalize(raw);
    } catch (const RankDeficient&) {
      if (attempt >= 1) {
        throw;
      }
    }
  }
}

// Bisection on the spike so the resulting coherence lands within
// rel_tol * target of the target. The map spike -> mu is evaluated at a
// fixed seed, where it is empirically monotone.
inline double calibrate_coherent_spike(Index n, Index r, double target_mu,
                                       SeedSpec seed, double rel_tol = 0.05,
                                       int max_iter = 48) {
  if (!(target_mu > 1.0) ||
      target_mu >= static_cast<double>(n) / static_cast<double>(r)) {
    throw InvalidParameter(
        "calibrate_coherent_spike: target must lie in (1, n/r)");
  }
  auto mu_at = [&](double s) {
    return subspace_coherence(gen_coherent_basis(n, r, s, seed)).mu;
  };
  double lo = 0.0;
  if (mu_at(lo) >= target_mu) {
    throw InvalidParameter(
        "calibrate_coherent_spike: target below the baseline coherence");
  }
  double hi = 1.0;
  int guard = 0;
  while (mu_at(hi) < target_mu) {
    hi *= 2.0;
    if (++guard > 50) {
      throw InvalidParameter("calibrate_coherent_spike: target unreachable");
    }
  }
  double mid = hi;
  for (int i = 0; i < max_iter; ++i) {
    mid = 0.5 * (lo + hi);
    const double mu = mu_at(mid);
    if (std::abs(mu - target_mu) <= rel_tol * target_mu) {
      return mid;
    }
    (mu < target_mu ? lo : hi) = mid;
  }
  return mid;
}

// Unit-norm vector in S-perp: a Gaussian draw with its S component removed.
inline Vector gen_perp_vector(const SubspaceBasis& basis, SeedSpec seed) {
  if (basis.dim() == basis.ambient_dim()) {
    throw DegenerateSubspace("gen_perp_vector: S-perp is trivial when r = n");
  }
  Rng rng(seed);
  for (;;) {
    Vector z(basis.ambient_dim());
    for (Index i = 0; i < z.size(); ++i) {
      z(i) = rng.normal();
    }
    Vector y = z - project_full(basis, z);
    const double norm = y.norm();
    if (norm > 1e-8) {
      return y / norm;
    }
  }
}

// Unit-norm random element of S.
inline Vector gen_subspace_vector(const SubspaceBasis& basis, SeedSpec seed) {
  Rng rng(seed);
  for (;;) {
    Vector coeffs(basis.dim());
    for (Index i = 0; i < coeffs.size(); ++i) {
      coeffs(i) = rng.normal();
    }
    Vector v = basis.matrix() * coeffs;
    const double norm = v.norm();
    if (norm > 1e-8) {
      return v / norm;
    }
  }
}

namespace detail {

inline SubspaceBasis make_basis(const ExperimentConfig& cfg) {
  const SeedSpec basis_seed{cfg.seed.seed, cfg.seed.stream + kStreamBasis};
  switch (cfg.basis_kind) {
    case BasisKind::gaussian:
      return gen_gaussian_basis(cfg.n, cfg.r, basis_seed);
    case BasisKind::fourier:
      return gen_fourier_basis(cfg.n,
                               fourier_frequencies_for_rank(cfg.n, cfg.r));
    default:
      return gen_coherent_basis(cfg.n, cfg.r, cfg.spike, basis_seed);
  }
}

inline Vector make_vector(const ExperimentConfig& cfg,
                          const SubspaceBasis& basis) {
  const SeedSpec vec_seed{cfg.seed.seed, cfg.seed.stream + kStreamVector};
  return cfg.vector_kind == VectorKind::in_perp
             ? gen_perp_vector(basis, vec_seed)
             : gen_subspace_vector(basis, vec_seed);
}

template <typename TrialFn>
inline std::vector<TrialSummary> run_sweep(const ExperimentConfig& cfg,
                                           int threads, double mu_s,
                                           double mu_v, TrialFn&& trial) {
  std::vector<TrialSummary> out;
  out.reserve(cfg.m_grid.size());
  std::vector<double> values(static_cast<size_t>(cfg.trials_per_m));
  for (size_t mi = 0; mi < cfg.m_grid.size(); ++mi) {
    const Index m = cfg.m_grid[mi];
    parallel_for(cfg.trials_per_m, threads, [&](Index t) {
      const SeedSpec s{cfg.seed.seed,
                       cfg.seed.stream +
                           trial_stream(static_cast<std::uint64_t>(mi),
                                        static_cast<std::uint64_t>(t))};
      values[static_cast<size_t>(t)] = trial(m, s);
    });
    // Aggregate in trial order so output bytes never depend on scheduling.
    double mn = values[0], mx = values[0], sum = 0.0;
    for (double v : values) {
      mn = std::min(mn, v);
      mx = std::max(mx, v);
      sum += v;
    }
    out.push_back(TrialSummary{m, mn,
                               sum / static_cast<double>(cfg.trials_per_m),
                               mx, mu_s, mu_v});
  }
  return out;
}

}  // namespace detail

// Residual-energy sweep over the m grid: `trials_per_m` independent index
// draws per m, summarized as min/mean/max.
inline std::vector<TrialSummary> run_residual_sweep(
    const ExperimentConfig& cfg, int threads = 1) {
  cfg.validate();
  if (cfg.vector_kind != VectorKind::in_perp) {
    throw InvalidParameter("run_residual_sweep: vector_kind must be in_perp");
  }
  const SubspaceBasis basis = detail::make_basis(cfg);
  const Vector v = detail::make_vector(cfg, basis);
  const double mu_s = subspace_coherence(basis).mu;
  const double mu_v = vector_coherence(v).mu;
  return detail::run_sweep(
      cfg, threads, mu_s, mu_v, [&](Index m, SeedSpec s) {
        const auto omega = sample_indices(cfg.sampling_mode, cfg.n, m, s);
        return residual_energy(basis, v, omega).t;
      });
}

// Zero-filling sweep with an in-subspace vector: the statistic that should
// be zero under H0 but is not.
inline std::vector<TrialSummary> run_zero_fill_sweep(
    const ExperimentConfig& cfg, int threads = 1) {
  cfg.validate();
  if (cfg.vector_kind != VectorKind::in_subspace) {
    throw InvalidParameter(
        "run_zero_fill_sweep: vector_kind must be in_subspace");
  }
  const SubspaceBasis basis = detail::make_basis(cfg);
  const Vector v = detail::make_vector(cfg, basis);
  const double mu_s = subspace_coherence(basis).mu;
  const double mu_v = vector_coherence(v).mu;
  return detail::run_sweep(
      cfg, threads, mu_s, mu_v, [&](Index m, SeedSpec s) {
        const auto omega = sample_indices(cfg.sampling_mode, cfg.n, m, s);
        return zero_fill_residual(basis, v, omega);
      });
}

struct RocPoint {
  double lambda;
  double p_fa;
  double p_d;
  Index trials_h0;
  Index trials_h1;
};

// Empirical operating points of the noisy test. H0 trials observe a unit
// in-subspace vector plus noise, H1 trials a vector with unit S-perp
// energy plus noise; per-observation noise follows the measurement model.
// The same trial statistics serve every lambda.
inline std::vector<RocPoint> run_roc(const ExperimentConfig& cfg,
                                     double noise_sigma,
                                     const std::vector<double>& lambda_grid,
                                     Index trials, int threads = 1) {
  cfg.validate();
  if (!(noise_sigma > 0.0)) {
    throw InvalidParameter("run_roc: need noise_sigma > 0");
  }
  if (lambda_grid.empty()) {
    throw InvalidParameter("run_roc: lambda grid must be nonempty");
  }
  for (double lambda : lambda_grid) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
      throw InvalidParameter("run_roc: every lambda must lie in (0, 1)");
    }
  }
  if (trials < 1) {
    throw InvalidParameter("run_roc: trials must be >= 1");
  }
  if (cfg.m_grid.size() != 1) {
    throw InvalidParameter("run_roc: config must carry exactly one m");
  }
  const Index m = cfg.m_grid[0];
  const SubspaceBasis basis = detail::make_basis(cfg);
  const Vector v_h0 = gen_subspace_vector(
      basis, SeedSpec{cfg.seed.seed, cfg.seed.stream + kStreamVector});
  const Vector v_h1 = gen_perp_vector(
      basis, SeedSpec{cfg.seed.seed, cfg.seed.stream + kStreamVectorAlt});

  struct TrialStat {
    double statistic;
    Index dof;
  };
  auto run_branch = [&](const Vector& v, std::uint64_t branch) {
    std::vector<TrialStat> stats(static_cast<size_t>(trials));
    detail::parallel_for(trials, threads, [&](Index t) {
      Rng rng(SeedSpec{cfg.seed.seed,
                       cfg.seed.stream +
                           trial_stream(branch, static_cast<std::uint64_t>(t))});
      const auto omega = sample_indices(cfg.sampling_mode, cfg.n, m, rng);
      Vector observed = restrict_vector(v, omega);
      for (Index i = 0; i < observed.size(); ++i) {
        observed(i) += noise_sigma * rng.normal();
      }
      const RestrictedFit fit =
          least_squares_fit(restrict_basis(basis, omega), observed);
      stats[static_cast<size_t>(t)] =
          TrialStat{(observed - fit.fitted).squaredNorm(),
                    omega.size() - fit.rank};
    });
    return stats;
  };
  const auto h0_stats = run_branch(v_h0, 0);
  const auto h1_stats = run_branch(v_h1, 1);

  const double sigma_sq = noise_sigma * noise_sigma;
  std::map<std::pair<double, Index>, double> threshold_cache;
  auto threshold_for = [&](double lambda, Index dof) {
    const auto key = std::make_pair(lambda, dof);
    auto it = threshold_cache.find(key);
    if (it == threshold_cache.end()) {
      if (dof < 1) {
        throw InvalidParameter("run_roc: m <= rank leaves no residual dof");
      }
      it = threshold_cache
               .emplace(key, sigma_sq * chi2_quantile(1.0 - lambda,
                                                      static_cast<int>(dof)))
               .first;
    }
    return it->second;
  };

  std::vector<RocPoint> out;
  out.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    Index fa = 0, det = 0;
    for (const auto& s : h0_stats) {
      if (s.statistic > threshold_for(lambda, s.dof)) ++fa;
    }
    for (const auto& s : h1_stats) {
      if (s.statistic > threshold_for(lambda, s.dof)) ++det;
    }
    out.push_back(RocPoint{lambda,
                           static_cast<double>(fa) / static_cast<double>(trials),
                           static_cast<double>(det) / static_cast<double>(trials),
                           trials, trials});
  }
  return out;
}

}  // namespace msd
