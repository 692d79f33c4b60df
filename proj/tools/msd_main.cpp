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

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msd/msd.hpp"

namespace {

using namespace msd;

// Loads a basis matrix; columns that are not already orthonormal are
// orthonormalized in place.
SubspaceBasis load_basis(const std::string& path) {
  Matrix raw = read_matrix_csv(path);
  try {
    return SubspaceBasis::from_orthonormal(raw);
  } catch (const InvalidParameter&) {
    return SubspaceBasis::orthonormalize(raw);
  }
}

struct OmegaOptions {
  std::string indices_path;
  Index m = 0;
  std::string mode = "without";
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  bool seed_given = false;
};

void add_omega_options(CLI::App* cmd, OmegaOptions& opts) {
  auto* indices = cmd->add_option("--indices", opts.indices_path,
                                  "Index list file (one 0-based row per line)");
  auto* m = cmd->add_option("--m", opts.m, "Number of sampled entries");
  cmd->add_option("--mode", opts.mode, "Sampling mode: with | without")
      ->check(CLI::IsMember({"with", "without"}));
  auto* seed =
      cmd->add_option("--seed", opts.seed, "Seed for the index draw")
          ->each([&](const std::string&) { opts.seed_given = true; });
  cmd->add_option("--stream", opts.stream, "Seed stream (default 0)");
  indices->excludes(m);
  m->needs(seed);
}

SampleIndexSet resolve_omega(const OmegaOptions& opts, Index n) {
  if (!opts.indices_path.empty()) {
    auto indices = read_index_list(opts.indices_path);
    std::vector<Index> sorted = indices;
    std::sort(sorted.begin(), sorted.end());
    const bool has_duplicates =
        std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
    return SampleIndexSet(std::move(indices),
                          has_duplicates ? SampleMode::with_replacement
                                         : SampleMode::without_replacement,
                          n);
  }
  if (opts.m < 1 || !opts.seed_given) {
    throw InvalidParameter(
        "either --indices or both --m and --seed must be given");
  }
  const SampleMode mode = opts.mode == "with"
                              ? SampleMode::with_replacement
                              : SampleMode::without_replacement;
  return sample_indices(mode, n, opts.m, SeedSpec{opts.seed, opts.stream});
}

int default_threads() {
  if (const char* env = std::getenv("MSD_THREADS")) {
    const int value = std::atoi(env);
    if (value >= 1) {
      return value;
    }
  }
  return 1;
}

void run_simulation(const SimulationPlan& plan, const std::string& command,
                    const std::string& out_path, int threads) {
  const auto start = std::chrono::steady_clock::now();
  std::string csv;
  switch (plan.kind) {
    case ExperimentKind::fig1:
      csv = render_sweep_csv(run_residual_sweep(plan.config, threads),
                             plan.config.trials_per_m,
                             plan.config.sampling_mode, plan.config.seed.seed);
      break;
    case ExperimentKind::fig2:
      csv = render_sweep_csv(run_zero_fill_sweep(plan.config, threads),
                             plan.config.trials_per_m,
                             plan.config.sampling_mode, plan.config.seed.seed);
      break;
    case ExperimentKind::roc:
      csv = render_roc_csv(run_roc(plan.config, plan.sigma, plan.lambda_grid,
                                   plan.config.trials_per_m, threads));
      break;
  }
  write_text_file(out_path, csv);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  RunManifest manifest;
  manifest.command = command;
  manifest.config_text = canonical_config_text(plan);
  manifest.out_path = out_path;
  manifest.threads = threads;
  manifest.duration_seconds = elapsed;
  write_manifest(manifest, manifest_path_for(out_path));
  std::cerr << command << ": wrote " << out_path << " ("
            << format_double_shortest(elapsed) << "s)\n";
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Matched subspace detection from incomplete observations"};
  app.require_subcommand(1);

  // --- coherence ---
  auto* coherence_cmd =
      app.add_subcommand("coherence", "Coherence of a basis (and a vector)");
  std::string coh_basis, coh_vector;
  coherence_cmd->add_option("--basis", coh_basis, "Basis CSV")->required();
  coherence_cmd->add_option("--vector", coh_vector, "Vector CSV");

  // --- estimate ---
  auto* estimate_cmd = app.add_subcommand(
      "estimate", "Projection residual energy from sampled entries");
  std::string est_basis, est_vector, est_kind = "residual";
  OmegaOptions est_omega;
  estimate_cmd->add_option("--basis", est_basis, "Basis CSV")->required();
  estimate_cmd->add_option("--vector", est_vector, "Vector CSV")->required();
  estimate_cmd
      ->add_option("--estimator", est_kind,
                   "Estimator: residual | zero-fill")
      ->check(CLI::IsMember({"residual", "zero-fill"}));
  add_omega_options(estimate_cmd, est_omega);

  // --- bounds ---
  auto* bounds_cmd = app.add_subcommand(
      "bounds", "Concentration-bound parameters and the sandwich interval");
  Index b_n = 0, b_r = 0, b_m = 0;
  double b_delta = 0.0, b_mu_s = 1.0, b_mu_y = 1.0, b_full = 1.0;
  std::string b_form = "statement";
  bool b_upper_only = false;
  bounds_cmd->add_option("--n", b_n, "Ambient dimension")->required();
  bounds_cmd->add_option("--r", b_r, "Subspace dimension")->required();
  bounds_cmd->add_option("--m", b_m, "Sample count")->required();
  bounds_cmd->add_option("--delta", b_delta, "Failure probability")
      ->required();
  bounds_cmd->add_option("--mu-s", b_mu_s, "Subspace coherence")->required();
  bounds_cmd->add_option("--mu-y", b_mu_y, "Residual-vector coherence")
      ->required();
  bounds_cmd->add_option("--full-residual", b_full,
                         "Full-data residual energy (default 1)");
  bounds_cmd
      ->add_option("--form", b_form,
                   "Bound form: statement | proof (squared factors)")
      ->check(CLI::IsMember({"statement", "proof"}));
  bounds_cmd->add_flag("--upper-only", b_upper_only,
                       "Allow gamma >= 1 and report the upper bound alone");

  // --- min-samples ---
  auto* min_samples_cmd =
      app.add_subcommand("min-samples", "Sample-complexity threshold");
  Index ms_r = 0;
  double ms_mu_s = 1.0, ms_delta = 0.0;
  min_samples_cmd->add_option("--r", ms_r, "Subspace dimension")->required();
  min_samples_cmd->add_option("--mu-s", ms_mu_s, "Subspace coherence")
      ->required();
  min_samples_cmd->add_option("--delta", ms_delta, "Failure probability")
      ->required();

  // --- validate-lemma ---
  auto* lemma_cmd = app.add_subcommand(
      "validate-lemma", "Monte Carlo check of a concentration lemma");
  int lemma_id = 0;
  Index l_n = 0, l_r = 0, l_m = 0, l_trials = 1000;
  double l_delta = 0.05;
  std::uint64_t l_seed = 0, l_stream = 0;
  std::string l_basis, l_vector;
  lemma_cmd->add_option("id", lemma_id, "Lemma id: 1 | 2 | 3")
      ->required()
      ->check(CLI::IsMember({1, 2, 3}));
  lemma_cmd->add_option("--n", l_n, "Ambient dimension (Gaussian basis)");
  lemma_cmd->add_option("--r", l_r, "Subspace dimension (Gaussian basis)");
  lemma_cmd->add_option("--m", l_m, "Samples per trial")->required();
  lemma_cmd->add_option("--delta", l_delta, "Failure probability");
  lemma_cmd->add_option("--trials", l_trials, "Trial count");
  lemma_cmd->add_option("--seed", l_seed, "Seed")->required();
  lemma_cmd->add_option("--stream", l_stream, "Seed stream (default 0)");
  lemma_cmd->add_option("--basis", l_basis,
                        "Basis CSV (instead of a generated Gaussian basis)");
  lemma_cmd->add_option("--vector", l_vector,
                        "S-perp vector CSV (instead of a generated one)");

  // --- detect ---
  auto* detect_cmd =
      app.add_subcommand("detect", "Hypothesis test on sampled entries");
  std::string d_basis, d_vector, d_policy = "residual";
  double d_sigma = 0.0, d_lambda = 0.05;
  OmegaOptions d_omega;
  detect_cmd->add_option("--basis", d_basis, "Basis CSV")->required();
  detect_cmd->add_option("--vector", d_vector, "Vector CSV")->required();
  detect_cmd->add_option("--sigma", d_sigma,
                         "Noise standard deviation (0 = noiseless test)");
  detect_cmd->add_option("--lambda", d_lambda,
                         "Target false-alarm probability");
  detect_cmd
      ->add_option("--dof-policy", d_policy,
                   "Threshold dof: residual (m - rank) | paper-r")
      ->check(CLI::IsMember({"residual", "paper-r"}));
  add_omega_options(detect_cmd, d_omega);

  // --- simulate ---
  auto* simulate_cmd =
      app.add_subcommand("simulate", "Run a configured experiment");
  simulate_cmd->require_subcommand(1);
  struct SimArgs {
    std::string config_path;
    std::string out_path;
    int threads = default_threads();
  };
  SimArgs sim;
  CLI::App* sim_kind_cmds[3];
  const ExperimentKind sim_kinds[3] = {ExperimentKind::fig1,
                                       ExperimentKind::fig2,
                                       ExperimentKind::roc};
  const char* sim_names[3] = {"fig1", "fig2", "roc"};
  const char* sim_desc[3] = {"Residual sweep (vector in S-perp)",
                             "Zero-filling sweep (vector in S)",
                             "Noisy-test operating points"};
  for (int i = 0; i < 3; ++i) {
    auto* cmd = simulate_cmd->add_subcommand(sim_names[i], sim_desc[i]);
    cmd->add_option("--config", sim.config_path, "Experiment config file")
        ->required();
    cmd->add_option("--out", sim.out_path, "Output CSV path")->required();
    cmd->add_option("--threads", sim.threads, "Worker pool size");
    sim_kind_cmds[i] = cmd;
  }

  // --- replay ---
  auto* replay_cmd =
      app.add_subcommand("replay", "Re-run a recorded manifest");
  std::string rp_manifest, rp_out;
  int rp_threads = 0;
  replay_cmd->add_option("--manifest", rp_manifest, "Manifest JSON path")
      ->required();
  replay_cmd->add_option("--out", rp_out,
                         "Output CSV path (default: the recorded path)");
  replay_cmd->add_option("--threads", rp_threads, "Worker pool size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the usage error
    return code == 0 ? 0 : 2;
  }

  if (coherence_cmd->parsed()) {
    const SubspaceBasis basis = load_basis(coh_basis);
    const CoherenceReport s = subspace_coherence(basis);
    std::cout << "mu_S " << format_double_shortest(s.mu) << "\n"
              << "argmax_S " << s.argmax_index << "\n";
    if (!coh_vector.empty()) {
      const CoherenceReport v = vector_coherence(read_vector_csv(coh_vector));
      std::cout << "mu_v " << format_double_shortest(v.mu) << "\n"
                << "argmax_v " << v.argmax_index << "\n";
    }
    return 0;
  }

  if (estimate_cmd->parsed()) {
    const SubspaceBasis basis = load_basis(est_basis);
    const Vector v = read_vector_csv(est_vector);
    const SampleIndexSet omega = resolve_omega(est_omega, basis.ambient_dim());
    if (est_kind == "zero-fill") {
      std::cout << "t0 " << format_double_shortest(
                               zero_fill_residual(basis, v, omega))
                << "\n";
    } else {
      const ResidualReport report = residual_energy(basis, v, omega);
      std::cout << "t " << format_double_shortest(report.t) << "\n"
                << "rescaled " << format_double_shortest(report.rescaled)
                << "\n";
    }
    return 0;
  }

  if (bounds_cmd->parsed()) {
    const TheoremParams params =
        theorem_params(b_n, b_r, b_m, b_delta, b_mu_s, b_mu_y);
    const BoundForm form = b_form == "statement" ? BoundForm::statement
                                                 : BoundForm::proof_display;
    const SandwichBound bound = sandwich(params, b_full, form, b_upper_only);
    std::cout << "alpha " << format_double_shortest(params.alpha) << "\n"
              << "beta " << format_double_shortest(params.beta) << "\n"
              << "gamma " << format_double_shortest(params.gamma) << "\n";
    if (bound.lower_valid) {
      std::cout << "lower " << format_double_shortest(bound.lower) << "\n";
    }
    std::cout << "upper " << format_double_shortest(bound.upper) << "\n"
              << "confidence " << format_double_shortest(bound.confidence)
              << "\n";
    return 0;
  }

  if (min_samples_cmd->parsed()) {
    std::cout << min_samples(ms_r, ms_mu_s, ms_delta) << "\n";
    return 0;
  }

  if (lemma_cmd->parsed()) {
    std::optional<SubspaceBasis> basis;
    if (!l_basis.empty()) {
      basis = load_basis(l_basis);
    } else {
      if (l_n < 1 || l_r < 1) {
        throw InvalidParameter(
            "validate-lemma: give --basis or both --n and --r");
      }
      basis = gen_gaussian_basis(l_n, l_r,
                                 SeedSpec{l_seed, l_stream + kStreamBasis});
    }
    LemmaValidationReport report{};
    const SeedSpec trial_seed{l_seed, l_stream};
    if (lemma_id == 3) {
      report = validate_lemma3(*basis, l_m, l_delta, l_trials, trial_seed);
    } else {
      const Vector y =
          l_vector.empty()
              ? gen_perp_vector(*basis,
                                SeedSpec{l_seed, l_stream + kStreamVector})
              : read_vector_csv(l_vector);
      report = lemma_id == 1
                   ? validate_lemma1(*basis, y, l_m, l_delta, l_trials,
                                     trial_seed)
                   : validate_lemma2(*basis, y, l_m, l_delta, l_trials,
                                     trial_seed);
    }
    std::cout << "lemma " << report.lemma_id << "\n"
              << "trials " << report.trials << "\n"
              << "failures " << report.failures << "\n"
              << "empirical_rate "
              << format_double_shortest(report.empirical_rate) << "\n"
              << "certified_rate "
              << format_double_shortest(report.certified_rate) << "\n";
    return 0;
  }

  if (detect_cmd->parsed()) {
    const SubspaceBasis basis = load_basis(d_basis);
    const Vector v = read_vector_csv(d_vector);
    const SampleIndexSet omega = resolve_omega(d_omega, basis.ambient_dim());
    DetectionOutcome outcome;
    if (d_sigma == 0.0) {
      outcome = noiseless_test(basis, v, omega);
    } else {
      TestConfig cfg;
      cfg.lambda_fa = d_lambda;
      cfg.noise_sigma = d_sigma;
      cfg.dof_policy = d_policy == "paper-r"
                           ? DofPolicy::fixed(basis.dim())
                           : DofPolicy::residual_rank();
      outcome = noisy_test(basis, v, omega, cfg);
    }
    std::cout << "statistic " << format_double_shortest(outcome.statistic)
              << "\n"
              << "threshold " << format_double_shortest(outcome.threshold)
              << "\n"
              << "decision " << to_string(outcome.decision) << "\n"
              << "dof " << outcome.dof << "\n";
    return 0;
  }

  if (simulate_cmd->parsed()) {
    for (int i = 0; i < 3; ++i) {
      if (sim_kind_cmds[i]->parsed()) {
        const SimulationPlan plan = load_plan(sim.config_path, sim_kinds[i]);
        run_simulation(plan, std::string("simulate ") + sim_names[i],
                       sim.out_path, sim.threads);
        return 0;
      }
    }
  }

  if (replay_cmd->parsed()) {
    const RunManifest recorded = read_manifest(rp_manifest);
    const SimulationPlan plan =
        parse_plan_text(recorded.config_text, rp_manifest);
    const std::string out = rp_out.empty() ? recorded.out_path : rp_out;
    const int threads = rp_threads >= 1 ? rp_threads : recorded.threads;
    run_simulation(plan, recorded.command, out, threads);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const msd::RankDeficient& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const msd::GammaTooLarge& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const msd::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const msd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
