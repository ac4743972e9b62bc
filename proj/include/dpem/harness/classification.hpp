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

// Two-class classification with a privately estimated Gaussian-mixture
// center: points are assigned to whichever of +beta, -beta is closer.
//
// Each repetition standardizes the attributes, balances the classes by
// dropping random members of the larger one, centers the data, splits it
// 70/30, fits beta on the training part with run_high_dim and reports the
// test misclassification rate.

#ifndef DPEM_HARNESS_CLASSIFICATION_HPP_
#define DPEM_HARNESS_CLASSIFICATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dpem/em_engine.hpp"
#include "dpem/errors.hpp"
#include "dpem/harness/parallel.hpp"
#include "dpem/mechanisms.hpp"
#include "dpem/models.hpp"
#include "dpem/oracle.hpp"
#include "dpem/vector_ops.hpp"

namespace dpem::harness {

struct LabeledData {
  std::vector<std::string> feature_names;
  std::vector<Vector> features;
  std::vector<std::string> labels;
};

struct ClassificationParams {
  std::size_t s_hat = 10;
  double epsilon = 0.5;             // +inf runs the non-private (silent noise) path
  std::optional<double> delta;      // default 1/(2 n_train)
  double eta = 0.5;
  std::size_t iters = 50;           // N0
  std::optional<double> T;          // default c_T * sigma * sqrt(ln n_used)
  double c_T = 2.0;
  double sigma = 1.0;               // mixture noise level on standardized features
  double train_fraction = 0.7;
};

struct ClassificationReport {
  double misclassification_rate = 0.0;  // mean over repetitions
  double std_error = 0.0;               // standard deviation over repetitions
  std::size_t reps = 0;
  std::size_t s_hat = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::vector<double> per_rep;
};

namespace detail {

inline std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(Trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Column-wise z-scores; constant columns become zero.
inline std::vector<Vector> Standardize(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  const std::size_t d = rows.front().size();
  const double n = static_cast<double>(rows.size());
  Vector mean(d, 0.0);
  Vector sd(d, 0.0);
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += r[j] / n;
  }
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < d; ++j) sd[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
  }
  for (auto& s : sd) s = rows.size() > 1 ? std::sqrt(s / (n - 1.0)) : 0.0;
  std::vector<Vector> out(rows.size(), Vector(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out[i][j] = sd[j] > 0.0 ? (rows[i][j] - mean[j]) / sd[j] : 0.0;
    }
  }
  return out;
}

template <typename T>
void Shuffle(std::vector<T>& items, NoiseOracle& rng) {
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng.uniform_index(i)]);
}

// True when x is strictly closer to -beta than to +beta.
inline bool CloserToMinus(std::span<const double> x, std::span<const double> beta) {
  double plus = 0.0;
  double minus = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    plus += (x[j] - beta[j]) * (x[j] - beta[j]);
    minus += (x[j] + beta[j]) * (x[j] + beta[j]);
  }
  return minus < plus;
}

}  // namespace detail

// Headered CSV with one `label` column and numeric feature columns.
inline LabeledData ParseLabeledCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("data CSV is empty");
  const auto header = detail::SplitFields(line);
  const auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end()) throw ParseError("data CSV has no `label` column");
  const std::size_t label_col = static_cast<std::size_t>(label_it - header.begin());

  LabeledData data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col) data.feature_names.push_back(header[c]);
  }
  if (data.feature_names.empty()) throw ParseError("data CSV has no feature columns");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::Trim(line).empty()) continue;
    const auto fields = detail::SplitFields(line);
    if (fields.size() != header.size()) {
      throw ParseError("data CSV line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    Vector row;
    row.reserve(data.feature_names.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == label_col) continue;
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(fields[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != fields[c].size() || !std::isfinite(v)) {
        throw ParseError("data CSV line " + std::to_string(line_no) + ", column `" + header[c] +
                         "`: non-numeric value '" + fields[c] + "'");
      }
      row.push_back(v);
    }
    data.features.push_back(std::move(row));
    data.labels.push_back(fields[label_col]);
  }
  if (data.features.empty()) throw ParseError("data CSV has no rows");
  return data;
}

inline LabeledData LoadLabeledCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseLabeledCsv(buffer.str());
}

// Misclassification rate of one train/test repetition. `rng` drives class
// balancing and the split; `noise` drives the private estimator.
inline double ClassifyOnce(const std::vector<Vector>& standardized,
                           const std::vector<int>& classes, const ClassificationParams& params,
                           NoiseOracle& rng, NoiseOracle& noise, double* delta_used = nullptr) {
  const std::size_t d = standardized.front().size();
  std::vector<std::size_t> members[2];
  for (std::size_t i = 0; i < classes.size(); ++i) members[classes[i]].push_back(i);
  const std::size_t keep = std::min(members[0].size(), members[1].size());
  std::vector<std::size_t> chosen;
  for (auto& m : members) {
    detail::Shuffle(m, rng);
    m.resize(keep);
    chosen.insert(chosen.end(), m.begin(), m.end());
  }
  std::sort(chosen.begin(), chosen.end());

  Vector center(d, 0.0);
  for (std::size_t i : chosen) {
    for (std::size_t j = 0; j < d; ++j) center[j] += standardized[i][j];
  }
  for (auto& c : center) c /= static_cast<double>(chosen.size());

  detail::Shuffle(chosen, rng);
  const auto n_train = static_cast<std::size_t>(
      std::floor(params.train_fraction * static_cast<double>(chosen.size())));
  if (n_train < params.iters || n_train == chosen.size()) {
    throw std::invalid_argument("run_classification: " + std::to_string(chosen.size()) +
                                " balanced records are too few for iters=" +
                                std::to_string(params.iters));
  }

  auto centered = [&](std::size_t i) {
    Vector x = standardized[i];
    for (std::size_t j = 0; j < d; ++j) x[j] -= center[j];
    return x;
  };
  std::vector<GmmSample> train;
  std::vector<int> train_class;
  for (std::size_t k = 0; k < n_train; ++k) {
    train.push_back({centered(chosen[k])});
    train_class.push_back(classes[chosen[k]]);
  }

  ModelSpec spec;
  spec.kind = ModelKind::kGmm;
  spec.d = d;
  spec.sigma = params.sigma;

  EmConfig em;
  em.eta = params.eta;
  em.N0 = params.iters;
  em.s_hat = std::min(params.s_hat, d);
  em.regime = Regime::kHighDim;
  const std::size_t n_used = em.N0 * (n_train / em.N0);
  em.T = params.T.value_or(params.c_T * params.sigma *
                           std::sqrt(std::log(static_cast<double>(n_used))));
  const double delta = params.delta.value_or(1.0 / (2.0 * static_cast<double>(n_train)));
  em.budget = PrivacyBudget(params.epsilon, delta);
  if (delta_used) *delta_used = delta;

  // Uniform start 1/sqrt(d), hard-thresholded to s_hat coordinates.
  const ParamVector uniform(d, 1.0 / std::sqrt(static_cast<double>(d)));
  const ParamVector beta0 = oracle::exact_top_k(uniform, em.s_hat).values;
  const Trajectory traj = run_high_dim<GmmModel>(spec, train, em, beta0, noise);
  const ParamVector& beta = traj.final_beta();

  // Orient: class 0 <-> +beta unless the flipped assignment fits training better.
  std::size_t agree = 0;
  for (std::size_t k = 0; k < train.size(); ++k) {
    agree += (detail::CloserToMinus(train[k].y, beta) ? 1 : 0) == train_class[k];
  }
  const bool flip = 2 * agree < train.size();

  std::size_t wrong = 0;
  const std::size_t n_test = chosen.size() - n_train;
  for (std::size_t k = n_train; k < chosen.size(); ++k) {
    const Vector x = centered(chosen[k]);
    const int predicted = (detail::CloserToMinus(x, beta) ? 1 : 0) ^ (flip ? 1 : 0);
    wrong += predicted != classes[chosen[k]];
  }
  return static_cast<double>(wrong) / static_cast<double>(n_test);
}

inline ClassificationReport run_classification(const LabeledData& data,
                                               const ClassificationParams& params,
                                               std::size_t reps, std::uint64_t master_seed,
                                               std::size_t jobs = 1) {
  if (data.features.empty()) throw std::invalid_argument("run_classification: no data");
  if (data.features.size() != data.labels.size()) {
    throw std::invalid_argument("run_classification: features/labels length mismatch");
  }
  if (reps < 1) throw ValidationError("reps", "must be >= 1");
  if (params.iters < 1) throw ValidationError("iters", "must be >= 1");
  if (params.s_hat < 1) throw ValidationError("s_hat", "must be >= 1");
  if (!(params.epsilon > 0.0)) throw ValidationError("epsilon", "must be > 0");
  if (!(params.train_fraction > 0.0 && params.train_fraction < 1.0)) {
    throw ValidationError("train_fraction", "must lie in (0,1)");
  }
  const std::set<std::string> distinct(data.labels.begin(), data.labels.end());
  if (distinct.size() != 2) {
    throw ValidationError("label", "expected exactly two classes, found " +
                                       std::to_string(distinct.size()));
  }
  const std::string& first = *distinct.begin();
  std::vector<int> classes;
  classes.reserve(data.labels.size());
  for (const auto& l : data.labels) classes.push_back(l == first ? 0 : 1);
  const std::vector<Vector> standardized = detail::Standardize(data.features);

  ClassificationReport report;
  report.reps = reps;
  report.s_hat = params.s_hat;
  report.epsilon = params.epsilon;
  report.per_rep.assign(reps, 0.0);
  std::vector<double> deltas(reps, 0.0);
  const bool silent = !std::isfinite(params.epsilon);
  ParallelFor(reps, jobs, [&](std::size_t rep) {
    NoiseOracle rng(DeriveSeed(master_seed, rep, 1));
    NoiseOracle noise(DeriveSeed(master_seed, rep, 2),
                      silent ? NoiseOracle::Mode::kSilent : NoiseOracle::Mode::kLive);
    report.per_rep[rep] = ClassifyOnce(standardized, classes, params, rng, noise, &deltas[rep]);
  });
  report.delta = deltas.front();

  double sum = 0.0;
  for (double r : report.per_rep) sum += r;
  report.misclassification_rate = sum / static_cast<double>(reps);
  double ss = 0.0;
  for (double r : report.per_rep) {
    ss += (r - report.misclassification_rate) * (r - report.misclassification_rate);
  }
  report.std_error = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) : 0.0;
  return report;
}

// Flat JSON: s_hat, epsilon, delta, eta, iters, T, c_T, sigma,
// train_fraction, reps, master_seed. Unknown keys are rejected.
struct ClassificationConfig {
  ClassificationParams params;
  std::size_t reps = 50;
  std::uint64_t master_seed = 1;
};

inline ClassificationConfig ParseClassificationConfig(const std::string& json_text) {
  using Json = nlohmann::json;
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ValidationError("config", std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("config", "top level must be a JSON object");
  static const std::set<std::string> kAllowed = {"s_hat", "epsilon", "delta", "eta",
                                                 "iters", "T",       "c_T",   "sigma",
                                                 "train_fraction", "reps", "master_seed"};
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (!kAllowed.count(it.key())) throw ValidationError(it.key(), "unknown key");
  }
  auto number = [&](const char* key, double fallback) {
    if (!root.contains(key)) return fallback;
    const Json& v = root[key];
    if (v.is_string() && v.get<std::string>() == "inf") return kInfinity;
    if (!v.is_number()) throw ValidationError(key, "expected a number");
    return v.get<double>();
  };
  auto count = [&](const char* key, std::size_t fallback) -> std::size_t {
    if (!root.contains(key)) return fallback;
    const Json& v = root[key];
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      throw ValidationError(key, "expected a positive integer");
    }
    return static_cast<std::size_t>(v.get<long long>());
  };

  ClassificationConfig c;
  c.params.s_hat = count("s_hat", c.params.s_hat);
  c.params.epsilon = number("epsilon", c.params.epsilon);
  if (root.contains("delta")) c.params.delta = number("delta", 0.0);
  c.params.eta = number("eta", c.params.eta);
  c.params.iters = count("iters", c.params.iters);
  if (root.contains("T")) c.params.T = number("T", 0.0);
  c.params.c_T = number("c_T", c.params.c_T);
  c.params.sigma = number("sigma", c.params.sigma);
  c.params.train_fraction = number("train_fraction", c.params.train_fraction);
  c.reps = count("reps", c.reps);
  if (root.contains("master_seed")) {
    const Json& v = root["master_seed"];
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw ValidationError("master_seed", "expected a non-negative integer");
    }
    c.master_seed = v.get<std::uint64_t>();
  }
  if (!(c.params.epsilon > 0.0)) throw ValidationError("epsilon", "must be > 0");
  if (c.params.delta && !(*c.params.delta > 0.0 && *c.params.delta < 1.0)) {
    throw ValidationError("delta", "must lie in (0,1)");
  }
  if (!(c.params.sigma > 0.0)) throw ValidationError("sigma", "must be > 0");
  if (c.params.T && !(*c.params.T > 0.0)) throw ValidationError("T", "must be > 0");
  return c;
}

}  // namespace dpem::harness

#endif  // DPEM_HARNESS_CLASSIFICATION_HPP_
