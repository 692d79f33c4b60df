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
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "msd/errors.hpp"
#include "msd/simlab.hpp"
#include "msd/vecspace.hpp"

namespace msd {

// Shortest decimal string that round-trips to the same double.
inline std::string format_double_shortest(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// Fixed 17-significant-digit rendering used in result CSVs.
inline std::string format_double_17(double x) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf, static_cast<size_t>(len));
}

namespace detail {

inline double parse_double(const std::string& field, const std::string& path,
                           size_t line_no) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ParseError(path + ":" + std::to_string(line_no) +
                     ": not a number: '" + field + "'");
  }
  return value;
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    // Trim surrounding spaces.
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos
                      ? std::string{}
                      : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

}  // namespace detail

// Matrix CSV: one row per line, comma-separated decimal, no header.
inline Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto fields = detail::split_fields(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      row.push_back(detail::parse_double(f, path, line_no));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": ragged row (expected " +
                       std::to_string(rows.front().size()) + " fields, got " +
                       std::to_string(row.size()) + ")");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw ParseError(path + ": empty matrix");
  }
  Matrix out(static_cast<Index>(rows.size()),
             static_cast<Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows.front().size(); ++j) {
      out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return out;
}

// Vectors are single-column matrix files.
inline Vector read_vector_csv(const std::string& path) {
  const Matrix m = read_matrix_csv(path);
  if (m.cols() != 1) {
    throw ParseError(path + ": expected a single-column vector file, got " +
                     std::to_string(m.cols()) + " columns");
  }
  return m.col(0);
}

inline void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path);
  }
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double_17(m(i, j));
    }
    out << '\n';
  }
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

inline void write_vector_csv(const std::string& path, const Vector& v) {
  write_matrix_csv(path, v);
}

// Index list files carry one integer per line.
inline std::vector<Index> read_index_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::vector<Index> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    long long value = 0;
    const auto res =
        std::from_chars(line.data(), line.data() + line.size(), value);
    if (res.ec != std::errc{} || res.ptr != line.data() + line.size()) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": not an integer: '" + line + "'");
    }
    out.push_back(static_cast<Index>(value));
  }
  if (out.empty()) {
    throw ParseError(path + ": empty index list");
  }
  return out;
}

// Sweep results: m,min,mean,max,mu_S,mu_y,trials,mode,seed.
inline std::string render_sweep_csv(const std::vector<TrialSummary>& rows,
                                    Index trials, SampleMode mode,
                                    std::uint64_t seed) {
  std::string out = "m,min,mean,max,mu_S,mu_y,trials,mode,seed\n";
  for (const auto& row : rows) {
    out += std::to_string(row.m);
    out += ',';
    out += format_double_17(row.min);
    out += ',';
    out += format_double_17(row.mean);
    out += ',';
    out += format_double_17(row.max);
    out += ',';
    out += format_double_17(row.mu_s);
    out += ',';
    out += format_double_17(row.mu_y);
    out += ',';
    out += std::to_string(trials);
    out += ',';
    out += to_string(mode);
    out += ',';
    out += std::to_string(seed);
    out += '\n';
  }
  return out;
}

// ROC results: lambda,p_fa,p_d,trials_h0,trials_h1.
inline std::string render_roc_csv(const std::vector<RocPoint>& rows) {
  std::string out = "lambda,p_fa,p_d,trials_h0,trials_h1\n";
  for (const auto& row : rows) {
    out += format_double_17(row.lambda);
    out += ',';
    out += format_double_17(row.p_fa);
    out += ',';
    out += format_double_17(row.p_d);
    out += ',';
    out += std::to_string(row.trials_h0);
    out += ',';
    out += std::to_string(row.trials_h1);
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::string& path,
                            const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path);
  }
  out << contents;
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace msd
