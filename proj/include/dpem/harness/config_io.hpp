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

// JSON configuration files. Keys are flat and dot-separated
// ("sweep.name", "fixed.n"); nested objects are accepted and flattened to the
// same names first. Unknown keys are rejected. The string "inf" is accepted
// for epsilon and T.

#ifndef DPEM_HARNESS_CONFIG_IO_HPP_
#define DPEM_HARNESS_CONFIG_IO_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "dpem/em_engine.hpp"
#include "dpem/errors.hpp"
#include "dpem/harness/experiment.hpp"
#include "dpem/mechanisms.hpp"
#include "dpem/models.hpp"

namespace dpem::harness {

using Json = nlohmann::json;
using FlatConfig = std::map<std::string, Json>;

namespace detail {

inline void Flatten(const Json& node, const std::string& prefix, FlatConfig& out) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      Flatten(*it, key, out);
    } else if (!out.emplace(key, *it).second) {
      throw ValidationError(key, "given more than once");
    }
  }
}

class Reader {
 public:
  Reader(FlatConfig flat, std::set<std::string> allowed) : flat_(std::move(flat)) {
    for (const auto& [key, value] : flat_) {
      if (!allowed.count(key)) throw ValidationError(key, "unknown key");
    }
  }

  bool has(const std::string& key) const { return flat_.count(key) > 0; }

  const Json& raw(const std::string& key) const {
    auto it = flat_.find(key);
    if (it == flat_.end()) throw ValidationError(key, "required key is missing");
    return it->second;
  }

  double number(const std::string& key) const {
    const Json& v = raw(key);
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "+inf")) {
      return kInfinity;
    }
    if (!v.is_number()) throw ValidationError(key, "expected a number");
    return v.get<double>();
  }

  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::size_t count(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      throw ValidationError(key, "expected a positive integer");
    }
    return static_cast<std::size_t>(v.get<long long>());
  }

  std::size_t count_or(const std::string& key, std::size_t fallback) const {
    return has(key) ? count(key) : fallback;
  }

  std::string text(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_string()) throw ValidationError(key, "expected a string");
    return v.get<std::string>();
  }

  std::uint64_t seed(const std::string& key) const {
    const Json& v = raw(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) {
      return static_cast<std::uint64_t>(v.get<long long>());
    }
    throw ValidationError(key, "expected a non-negative integer");
  }

 private:
  FlatConfig flat_;
};

inline Json ParseJsonText(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError("config", std::string("malformed JSON: ") + e.what());
  }
}

inline FlatConfig FlattenRoot(const Json& root) {
  if (!root.is_object()) throw ValidationError("config", "top level must be a JSON object");
  if (root.contains("sweep") && !root["sweep"].is_object()) {
    throw ValidationError("sweep", "exactly one swept parameter is allowed");
  }
  FlatConfig flat;
  Flatten(root, "", flat);
  return flat;
}

}  // namespace detail

inline std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline ExperimentConfig ParseExperimentConfig(const std::string& json_text) {
  const Json root = detail::ParseJsonText(json_text);
  const detail::Reader r(
      detail::FlattenRoot(root),
      {"model", "regime", "sweep.name", "sweep.values", "master_seed", "fixed.n", "fixed.d",
       "fixed.s_star", "fixed.epsilon", "fixed.delta_rule", "fixed.delta", "fixed.sigma",
       "fixed.eta", "fixed.reps", "fixed.missing_prob", "fixed.T", "fixed.c_T", "fixed.N0",
       "fixed.c_N", "fixed.s_hat", "fixed.s_hat_factor"});

  ExperimentConfig c;
  const auto model = ParseModelKind(r.text("model"));
  if (!model) throw ValidationError("model", "expected one of gmm, mor, rmc");
  c.model = *model;

  const std::string regime = r.text("regime");
  if (regime == "high_dim") {
    c.regime = Regime::kHighDim;
  } else if (regime == "low_dim") {
    c.regime = Regime::kLowDim;
  } else {
    throw ValidationError("regime", "expected high_dim or low_dim");
  }

  const Json& name = r.raw("sweep.name");
  if (!name.is_string()) throw ValidationError("sweep", "exactly one swept parameter is allowed");
  const auto sweep = ParseSweepParam(name.get<std::string>());
  if (!sweep) throw ValidationError("sweep.name", "expected one of n, s_star, epsilon, d");
  c.sweep = *sweep;
  const Json& values = r.raw("sweep.values");
  if (!values.is_array() || values.empty()) {
    throw ValidationError("sweep.values", "expected a non-empty array");
  }
  for (const Json& v : values) {
    if (v.is_string() && v.get<std::string>() == "inf") {
      c.sweep_values.push_back(kInfinity);
    } else if (v.is_number()) {
      c.sweep_values.push_back(v.get<double>());
    } else {
      throw ValidationError("sweep.values", "expected numbers");
    }
  }

  c.master_seed = r.seed("master_seed");
  c.n = (c.sweep == SweepParam::kN && !r.has("fixed.n")) ? 1 : r.count("fixed.n");
  c.d = (c.sweep == SweepParam::kD && !r.has("fixed.d")) ? 1 : r.count("fixed.d");
  if (r.has("fixed.s_star")) {
    c.s_star = r.count("fixed.s_star");
  } else if (c.sweep == SweepParam::kSStar) {
    c.s_star = 1;
  } else if (c.regime == Regime::kLowDim) {
    c.s_star_equals_d = true;
    c.s_star = c.d;
  } else {
    r.count("fixed.s_star");  // reports the missing key
  }
  c.epsilon = c.sweep == SweepParam::kEpsilon ? r.number_or("fixed.epsilon", 1.0)
                                              : r.number("fixed.epsilon");

  const std::string delta_rule = r.has("fixed.delta_rule") ? r.text("fixed.delta_rule") : "half_n";
  if (delta_rule == "half_n") {
    c.delta_rule = DeltaRule::kHalfN;
  } else if (delta_rule == "explicit") {
    c.delta_rule = DeltaRule::kExplicit;
    c.delta = r.number("fixed.delta");
  } else {
    throw ValidationError("fixed.delta_rule", "expected half_n or explicit");
  }

  c.sigma = r.number("fixed.sigma");
  c.eta = r.number("fixed.eta");
  c.reps = r.count("fixed.reps");
  c.missing_prob = r.number_or("fixed.missing_prob", c.missing_prob);
  if (r.has("fixed.T")) c.T = r.number("fixed.T");
  c.c_T = r.number_or("fixed.c_T", c.c_T);
  if (r.has("fixed.N0")) c.N0 = r.count("fixed.N0");
  c.c_N = r.number_or("fixed.c_N", c.c_N);
  if (r.has("fixed.s_hat")) c.s_hat = r.count("fixed.s_hat");
  c.s_hat_factor = r.number_or("fixed.s_hat_factor", c.s_hat_factor);
  return c;
}

inline ExperimentConfig LoadExperimentConfig(const std::string& path) {
  return ParseExperimentConfig(ReadTextFile(path));
}

}  // namespace dpem::harness

#endif  // DPEM_HARNESS_CONFIG_IO_HPP_
