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

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "msd/csv.hpp"
#include "msd/errors.hpp"
#include "msd/simlab.hpp"

namespace msd {

enum class ExperimentKind { fig1, fig2, roc };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::fig1: return "fig1";
    case ExperimentKind::fig2: return "fig2";
    default: return "roc";
  }
}

// A fully validated experiment description: the sweep/ROC configuration
// plus the ROC-only noise and false-alarm settings.
struct SimulationPlan {
  ExperimentKind kind = ExperimentKind::fig1;
  ExperimentConfig config;
  double sigma = 0.0;                // roc only
  std::vector<double> lambda_grid;   // roc only
};

namespace detail {

struct ConfigEntry {
  std::string value;
  size_t line;
};

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::map<std::string, ConfigEntry> tokenize_config(
    const std::string& text, const std::string& origin) {
  std::map<std::string, ConfigEntry> entries;
  std::istringstream stream(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string stripped = trim(line);
    if (stripped.empty()) {
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError(origin + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(origin + ":" + std::to_string(line_no) +
                       ": missing key before '='");
    }
    if (value.empty()) {
      throw ParseError(origin + ":" + std::to_string(line_no) +
                       ": missing value for key '" + key + "'");
    }
    if (!entries.emplace(key, ConfigEntry{value, line_no}).second) {
      throw ParseError(origin + ":" + std::to_string(line_no) +
                       ": duplicate key '" + key + "'");
    }
  }
  return entries;
}

inline long long parse_int_field(const std::string& value,
                                 const std::string& origin, size_t line,
                                 const std::string& key) {
  long long out = 0;
  const auto res =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    throw ParseError(origin + ":" + std::to_string(line) + ": key '" + key +
                     "' needs an integer, got '" + value + "'");
  }
  return out;
}

inline double parse_real_field(const std::string& value,
                               const std::string& origin, size_t line,
                               const std::string& key) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const double out = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ParseError(origin + ":" + std::to_string(line) + ": key '" + key +
                     "' needs a number, got '" + value + "'");
  }
  return out;
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream stream(value);
  while (std::getline(stream, field, ',')) {
    out.push_back(trim(field));
  }
  return out;
}

}  // namespace detail

// Parses the flat key/value experiment format:
//
//   # comment
//   experiment = fig1
//   n = 10000
//   r = 50
//   basis = gaussian        # gaussian | fourier | coherent
//   m_grid = 10,50,100
//   trials = 100            # default 100
//   mode = without          # default without
//   seed = 20260810         # required: no implicit randomness
//
// Unknown keys are a hard error. `spike` is accepted only with the
// coherent basis; `sigma` and `lambda_grid` only for roc runs.
inline SimulationPlan parse_plan_text(
    const std::string& text, const std::string& origin,
    std::optional<ExperimentKind> expected_kind = std::nullopt) {
  auto entries = detail::tokenize_config(text, origin);

  auto take = [&](const std::string& key) -> std::optional<detail::ConfigEntry> {
    auto it = entries.find(key);
    if (it == entries.end()) {
      return std::nullopt;
    }
    detail::ConfigEntry entry = it->second;
    entries.erase(it);
    return entry;
  };

  SimulationPlan plan;

  // Experiment kind: from the file if present, otherwise from the caller.
  if (auto e = take("experiment")) {
    if (e->value == "fig1") {
      plan.kind = ExperimentKind::fig1;
    } else if (e->value == "fig2") {
      plan.kind = ExperimentKind::fig2;
    } else if (e->value == "roc") {
      plan.kind = ExperimentKind::roc;
    } else {
      throw ParseError(origin + ":" + std::to_string(e->line) +
                       ": experiment must be fig1, fig2, or roc");
    }
    if (expected_kind && *expected_kind != plan.kind) {
      throw ParseError(origin + ": config declares experiment '" +
                       std::string(to_string(plan.kind)) +
                       "' but the command requested '" +
                       std::string(to_string(*expected_kind)) + "'");
    }
  } else if (expected_kind) {
    plan.kind = *expected_kind;
  } else {
    plan.kind = ExperimentKind::fig1;
  }

  ExperimentConfig& cfg = plan.config;

  auto require = [&](const std::string& key) -> detail::ConfigEntry {
    auto e = take(key);
    if (!e) {
      throw ParseError(origin + ": missing required key '" + key + "'");
    }
    return *e;
  };

  {
    const auto e = require("n");
    cfg.n = static_cast<Index>(
        detail::parse_int_field(e.value, origin, e.line, "n"));
  }
  {
    const auto e = require("r");
    cfg.r = static_cast<Index>(
        detail::parse_int_field(e.value, origin, e.line, "r"));
  }
  {
    const auto e = require("seed");
    cfg.seed.seed = static_cast<std::uint64_t>(
        detail::parse_int_field(e.value, origin, e.line, "seed"));
  }
  if (auto e = take("stream")) {
    cfg.seed.stream = static_cast<std::uint64_t>(
        detail::parse_int_field(e->value, origin, e->line, "stream"));
  }
  if (auto e = take("basis")) {
    if (e->value == "gaussian") {
      cfg.basis_kind = BasisKind::gaussian;
    } else if (e->value == "fourier") {
      cfg.basis_kind = BasisKind::fourier;
    } else if (e->value == "coherent") {
      cfg.basis_kind = BasisKind::coherent;
    } else {
      throw ParseError(origin + ":" + std::to_string(e->line) +
                       ": basis must be gaussian, fourier, or coherent");
    }
  }
  if (auto e = take("spike")) {
    if (cfg.basis_kind != BasisKind::coherent) {
      throw ParseError(origin + ":" + std::to_string(e->line) +
                       ": spike is only valid with basis = coherent");
    }
    cfg.spike = detail::parse_real_field(e->value, origin, e->line, "spike");
  } else if (cfg.basis_kind == BasisKind::coherent) {
    throw ParseError(origin + ": basis = coherent requires key 'spike'");
  }
  {
    const auto e = require("m_grid");
    for (const auto& item : detail::split_list(e.value)) {
      cfg.m_grid.push_back(static_cast<Index>(
          detail::parse_int_field(item, origin, e.line, "m_grid")));
    }
    for (size_t i = 1; i < cfg.m_grid.size(); ++i) {
      if (cfg.m_grid[i] <= cfg.m_grid[i - 1]) {
        throw ParseError(origin + ":" + std::to_string(e.line) +
                         ": m_grid must be strictly increasing");
      }
    }
  }
  if (auto e = take("trials")) {
    cfg.trials_per_m = static_cast<Index>(
        detail::parse_int_field(e->value, origin, e->line, "trials"));
  }
  if (auto e = take("mode")) {
    if (e->value == "with") {
      cfg.sampling_mode = SampleMode::with_replacement;
    } else if (e->value == "without") {
      cfg.sampling_mode = SampleMode::without_replacement;
    } else {
      throw ParseError(origin + ":" + std::to_string(e->line) +
                       ": mode must be 'with' or 'without'");
    }
  }

  // Vector kind: defaulted per experiment; fig1/fig2 pin theirs.
  cfg.vector_kind = plan.kind == ExperimentKind::fig2
                        ? VectorKind::in_subspace
                        : VectorKind::in_perp;
  if (auto e = take("vector")) {
    if (plan.kind == ExperimentKind::roc) {
      throw ParseError(origin + ":" + std::to_string(e->line) +
                       ": roc runs generate both hypothesis vectors; "
                       "'vector' is not a valid key");
    }
    VectorKind requested;
    if (e->value == "in_perp") {
      requested = VectorKind::in_perp;
    } else if (e->value == "in_subspace") {
      requested = VectorKind::in_subspace;
    } else {
      throw ParseError(origin + ":" + std::to_string(e->line) +
                       ": vector must be in_perp or in_subspace");
    }
    if (requested != cfg.vector_kind) {
      throw ParseError(origin + ":" + std::to_string(e->line) + ": " +
                       std::string(to_string(plan.kind)) +
                       " requires vector = " +
                       std::string(to_string(cfg.vector_kind)));
    }
  }

  if (plan.kind == ExperimentKind::roc) {
    {
      const auto e = require("sigma");
      plan.sigma = detail::parse_real_field(e.value, origin, e.line, "sigma");
      if (!(plan.sigma > 0.0)) {
        throw ParseError(origin + ":" + std::to_string(e.line) +
                         ": sigma must be positive");
      }
    }
    {
      const auto e = require("lambda_grid");
      for (const auto& item : detail::split_list(e.value)) {
        plan.lambda_grid.push_back(
            detail::parse_real_field(item, origin, e.line, "lambda_grid"));
      }
      for (double lambda : plan.lambda_grid) {
        if (!(lambda > 0.0 && lambda < 1.0)) {
          throw ParseError(origin + ":" + std::to_string(e.line) +
                           ": every lambda must lie in (0, 1)");
        }
      }
    }
    if (cfg.m_grid.size() != 1) {
      throw ParseError(origin +
                       ": roc runs take exactly one m in m_grid");
    }
  }

  if (!entries.empty()) {
    const auto& [key, entry] = *entries.begin();
    throw ParseError(origin + ":" + std::to_string(entry.line) +
                     ": unknown key '" + key + "'");
  }

  try {
    cfg.validate();
  } catch (const InvalidParameter& e) {
    throw ParseError(origin + ": " + e.what());
  }
  return plan;
}

inline SimulationPlan load_plan(
    const std::string& path,
    std::optional<ExperimentKind> expected_kind = std::nullopt) {
  return parse_plan_text(read_text_file(path), path, expected_kind);
}

// The sweep configuration alone, for callers that drive experiments
// directly.
inline ExperimentConfig load_config(const std::string& path) {
  return load_plan(path).config;
}

// Deterministic round-trippable rendering of a plan; parsing it back gives
// the same plan. Manifests embed this text.
inline std::string canonical_config_text(const SimulationPlan& plan) {
  std::string out;
  const ExperimentConfig& cfg = plan.config;
  out += "experiment = " + std::string(to_string(plan.kind)) + "\n";
  out += "n = " + std::to_string(cfg.n) + "\n";
  out += "r = " + std::to_string(cfg.r) + "\n";
  out += "basis = " + std::string(to_string(cfg.basis_kind)) + "\n";
  if (cfg.basis_kind == BasisKind::coherent) {
    out += "spike = " + format_double_shortest(cfg.spike) + "\n";
  }
  out += "m_grid = ";
  for (size_t i = 0; i < cfg.m_grid.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(cfg.m_grid[i]);
  }
  out += "\n";
  out += "trials = " + std::to_string(cfg.trials_per_m) + "\n";
  out += "mode = " + std::string(to_string(cfg.sampling_mode)) + "\n";
  out += "seed = " + std::to_string(cfg.seed.seed) + "\n";
  out += "stream = " + std::to_string(cfg.seed.stream) + "\n";
  if (plan.kind != ExperimentKind::roc) {
    out += "vector = " + std::string(to_string(cfg.vector_kind)) + "\n";
  } else {
    out += "sigma = " + format_double_shortest(plan.sigma) + "\n";
    out += "lambda_grid = ";
    for (size_t i = 0; i < plan.lambda_grid.size(); ++i) {
      if (i) out += ',';
      out += format_double_shortest(plan.lambda_grid[i]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace msd
