//
// Copyright 2026 The dpem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// CSV result files. UTF-8, LF line endings, numbers as %.10e.
//
//   experiments:     sweep_param,sweep_value,rep,iteration,error_l2,error_l2_signfree
//   classification:  s_hat,epsilon,rep,misclassification_rate

#ifndef DPEM_HARNESS_RESULTS_IO_HPP_
#define DPEM_HARNESS_RESULTS_IO_HPP_

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpem/errors.hpp"
#include "dpem/harness/classification.hpp"
#include "dpem/harness/experiment.hpp"

namespace dpem::harness {

inline constexpr const char* kExperimentHeader =
    "sweep_param,sweep_value,rep,iteration,error_l2,error_l2_signfree";
inline constexpr const char* kClassificationHeader = "s_hat,epsilon,rep,misclassification_rate";

inline std::string FormatNumber(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10e", v);
  return buf;
}

inline double ParseNumber(const std::string& field) {
  if (field == "inf") return kInfinity;
  if (field == "-inf") return -kInfinity;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + field + "'");
  }
  if (used != field.size()) throw ParseError("not a number: '" + field + "'");
  return v;
}

inline std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string ExperimentCsv(const AggregateResult& result) {
  std::string out = std::string(kExperimentHeader) + "\n";
  for (const CellResult& cell : result.cells) {
    for (std::size_t rep = 0; rep < cell.reps.size(); ++rep) {
      const RepResult& r = cell.reps[rep];
      for (std::size_t t = 0; t < r.errors.size(); ++t) {
        out += result.sweep_param + "," + FormatNumber(cell.params.sweep_value) + "," +
               std::to_string(rep) + "," + std::to_string(t) + "," + FormatNumber(r.errors[t]) +
               "," + FormatNumber(r.errors_signfree.at(t)) + "\n";
      }
    }
  }
  return out;
}

inline std::string ClassificationCsv(const ClassificationReport& report) {
  std::string out = std::string(kClassificationHeader) + "\n";
  for (std::size_t rep = 0; rep < report.per_rep.size(); ++rep) {
    out += std::to_string(report.s_hat) + "," + FormatNumber(report.epsilon) + "," +
           std::to_string(rep) + "," + FormatNumber(report.per_rep[rep]) + "\n";
  }
  return out;
}

inline void WriteTextFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << contents;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline void write_results(const AggregateResult& result, const std::string& path) {
  WriteTextFile(path, ExperimentCsv(result));
}

inline void write_results(const ClassificationReport& report, const std::string& path) {
  WriteTextFile(path, ClassificationCsv(report));
}

// Rebuilds an AggregateResult (errors, sweep values, aggregates) from CSV
// text produced by ExperimentCsv. Cell parameters other than sweep_value are
// not stored in the file and stay default.
inline AggregateResult ParseExperimentCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kExperimentHeader) {
    throw ParseError("experiment CSV: unexpected header");
  }
  AggregateResult result;
  std::map<double, std::size_t> cell_index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = SplitCsvLine(line);
    if (f.size() != 6) {
      throw ParseError("experiment CSV line " + std::to_string(line_no) + ": expected 6 fields");
    }
    if (result.sweep_param.empty()) result.sweep_param = f[0];
    const double value = ParseNumber(f[1]);
    const auto rep = static_cast<std::size_t>(ParseNumber(f[2]));
    const auto iter = static_cast<std::size_t>(ParseNumber(f[3]));
    auto [it, inserted] = cell_index.emplace(value, result.cells.size());
    if (inserted) {
      result.cells.emplace_back();
      result.cells.back().params.sweep_value = value;
    }
    CellResult& cell = result.cells[it->second];
    if (cell.reps.size() <= rep) cell.reps.resize(rep + 1);
    RepResult& r = cell.reps[rep];
    if (r.errors.size() != iter) {
      throw ParseError("experiment CSV line " + std::to_string(line_no) +
                       ": iterations out of order");
    }
    r.errors.push_back(ParseNumber(f[4]));
    r.errors_signfree.push_back(ParseNumber(f[5]));
  }
  for (auto& cell : result.cells) Aggregate(cell);
  return result;
}

}  // namespace dpem::harness

#endif  // DPEM_HARNESS_RESULTS_IO_HPP_
