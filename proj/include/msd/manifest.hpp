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

#include <string>

#include <json.hpp>

#include "msd/csv.hpp"
#include "msd/errors.hpp"

namespace msd {

#ifndef MSD_VERSION
#define MSD_VERSION "0.0.0"
#endif

// Everything needed to reproduce a result file byte for byte: the command,
// the full experiment description, and the seed (inside the config text).
// Duration is informational only.
struct RunManifest {
  std::string command;              // e.g. "simulate fig1"
  std::string version = MSD_VERSION;
  std::string config_text;          // canonical flat key/value form
  std::string out_path;
  int threads = 1;
  double duration_seconds = 0.0;
};

inline std::string manifest_path_for(const std::string& out_path) {
  return out_path + ".manifest.json";
}

inline void write_manifest(const RunManifest& manifest,
                           const std::string& path) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["version"] = manifest.version;
  j["config"] = manifest.config_text;
  j["out"] = manifest.out_path;
  j["threads"] = manifest.threads;
  j["duration_seconds"] = manifest.duration_seconds;
  write_text_file(path, j.dump(2) + "\n");
}

inline RunManifest read_manifest(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.config_text = j.at("config").get<std::string>();
    m.out_path = j.at("out").get<std::string>();
    m.threads = j.value("threads", 1);
    m.duration_seconds = j.value("duration_seconds", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return m;
}

}  // namespace msd
