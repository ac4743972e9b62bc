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

// Simulation runner: one swept parameter, several repetitions per sweep value,
// per-iteration error aggregation.

#ifndef DPEM_HARNESS_EXPERIMENT_HPP_
#define DPEM_HARNESS_EXPERIMENT_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dpem/em_engine.hpp"
#include "dpem/errors.hpp"
#include "dpem/harness/parallel.hpp"
#include "dpem/mechanisms.hpp"
#include "dpem/models.hpp"
#include "dpem/oracle.hpp"
#include "dpem/vector_ops.hpp"

namespace dpem::harness {

enum class SweepParam { kN, kSStar, kEpsilon, kD };
enum class DeltaRule { kHalfN, kExplicit };

inline std::string_view ToString(SweepParam p) {
  switch (p) {
    case SweepParam::kN:
      return "n";
    case SweepParam::kSStar:
      return "s_star";
    case SweepParam::kEpsilon:
      return "epsilon";
    case SweepParam::kD:
      return "d";
  }
  return "?";
}

inline std::optional<SweepParam> ParseSweepParam(std::string_view name) {
  if (name == "n") return SweepParam::kN;
  if (name == "s_star") return SweepParam::kSStar;
  if (name == "epsilon") return SweepParam::kEpsilon;
  if (name == "d") return SweepParam::kD;
  return std::nullopt;
}

// Which driver a run uses. kBaseline is full-data non-private gradient EM.
enum class Runner { kPrivate, kBaseline };

struct ExperimentConfig {
  ModelKind model = ModelKind::kGmm;
  Regime regime = Regime::kHighDim;
  SweepParam sweep = SweepParam::kN;
  std::vector<double> sweep_values;

  std::size_t n = 4000;
  std::size_t d = 200;
  std::size_t s_star = 10;
  bool s_star_equals_d = false;  // dense beta*, every coordinate 1/sqrt(d)
  double epsilon = 0.5;
  DeltaRule delta_rule = DeltaRule::kHalfN;
  double delta = 0.0;  // used when delta_rule == kExplicit
  double sigma = 0.5;
  double eta = 0.5;
  double missing_prob = 0.2;

  // Unset means "derive from n": T = c_T * sigma * sqrt(ln n_used),
  // N0 = max(5, ceil(c_N * ln n)), s_hat = ceil(s_hat_factor * s_star).
  std::optional<double> T;
  double c_T = 2.0;
  std::optional<std::size_t> N0;
  double c_N = 1.0;
  std::optional<std::size_t> s_hat;
  double s_hat_factor = 1.0;

  std::size_t reps = 20;
  std::uint64_t master_seed = 1;
  bool silent_noise = false;
};

// Fully resolved parameters of one sweep cell.
struct CellParams {
  double sweep_value = 0.0;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t s_star = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::size_t N0 = 0;
  std::size_t n_used = 0;
  double T = 0.0;
  std::size_t s_hat = 0;
};

struct RepResult {
  std::vector<double> errors;           // per iteration 0..N0
  std::vector<double> errors_signfree;  // per iteration 0..N0
  double final_error() const { return errors.back(); }
};

struct CellResult {
  CellParams params;
  std::vector<RepResult> reps;
  std::vector<double> mean;    // per iteration, of errors
  std::vector<double> stddev;  // per iteration, sample standard deviation

  double mean_final_error() const { return mean.back(); }
};

struct AggregateResult {
  std::string sweep_param;
  std::vector<CellResult> cells;
};

inline std::size_t DefaultN0(std::size_t n, double c_N) {
  const double raw = std::ceil(c_N * std::log(static_cast<double>(n)));
  return std::max<std::size_t>(5, static_cast<std::size_t>(raw));
}

inline double DefaultT(double c_T, double sigma, std::size_t n_used) {
  return c_T * sigma * std::sqrt(std::log(static_cast<double>(n_used)));
}

inline std::size_t ToCount(double value, const char* key) {
  if (!(value >= 1.0) || value != std::floor(value) || value > 1e12) {
    throw ValidationError(key, "expected a positive integer, got " + std::to_string(value));
  }
  return static_cast<std::size_t>(value);
}

inline CellParams ResolveCell(const ExperimentConfig& config, double sweep_value) {
  CellParams p;
  p.sweep_value = sweep_value;
  p.n = config.n;
  p.d = config.d;
  p.s_star = config.s_star;
  p.epsilon = config.epsilon;
  switch (config.sweep) {
    case SweepParam::kN:
      p.n = ToCount(sweep_value, "sweep.values");
      break;
    case SweepParam::kD:
      p.d = ToCount(sweep_value, "sweep.values");
      break;
    case SweepParam::kSStar:
      p.s_star = ToCount(sweep_value, "sweep.values");
      break;
    case SweepParam::kEpsilon:
      p.epsilon = sweep_value;
      break;
  }
  if (config.s_star_equals_d) p.s_star = p.d;
  if (!(p.epsilon > 0.0)) throw ValidationError("fixed.epsilon", "must be > 0");
  if (p.s_star < 1 || p.s_star > p.d) {
    throw ValidationError("fixed.s_star", "must lie in [1, d]");
  }
  p.delta = config.delta_rule == DeltaRule::kHalfN ? 1.0 / (2.0 * static_cast<double>(p.n))
                                                  : config.delta;
  if (!(p.delta > 0.0 && p.delta < 1.0)) throw ValidationError("fixed.delta", "must lie in (0,1)");
  p.N0 = config.N0.value_or(DefaultN0(p.n, config.c_N));
  if (p.N0 < 1 || p.N0 > p.n) throw ValidationError("fixed.N0", "must lie in [1, n]");
  p.n_used = p.N0 * (p.n / p.N0);
  p.T = config.T.value_or(DefaultT(config.c_T, config.sigma, p.n_used));
  if (!(p.T > 0.0)) throw ValidationError("fixed.T", "must be > 0");
  if (!std::isfinite(p.T) && !config.silent_noise) {
    throw ValidationError("fixed.T", "T = inf requires silent noise");
  }
  p.s_hat = config.s_hat.value_or(static_cast<std::size_t>(
      std::ceil(config.s_hat_factor * static_cast<double>(p.s_star) - 1e-9)));
  p.s_hat = std::clamp<std::size_t>(p.s_hat, 1, p.d);
  return p;
}

inline std::uint64_t RepSeed(std::uint64_t master_seed, double sweep_value, std::size_t rep) {
  return DeriveSeed(master_seed, std::bit_cast<std::uint64_t>(sweep_value), rep);
}

// Structural validation beyond what the parser checks. Throws ValidationError.
inline void ValidateConfig(const ExperimentConfig& config) {
  if (config.sweep_values.empty()) throw ValidationError("sweep.values", "must be non-empty");
  if (config.reps < 1) throw ValidationError("fixed.reps", "must be >= 1");
  if (config.d < 1) throw ValidationError("fixed.d", "must be >= 1");
  if (config.n < 1) throw ValidationError("fixed.n", "must be >= 1");
  if (!(config.sigma > 0.0) || !std::isfinite(config.sigma)) {
    throw ValidationError("fixed.sigma", "must be positive and finite");
  }
  if (!(config.eta >= 0.0) || !std::isfinite(config.eta)) {
    throw ValidationError("fixed.eta", "must be finite and >= 0");
  }
  if (config.model == ModelKind::kRmc &&
      !(config.missing_prob >= 0.0 && config.missing_prob < 1.0)) {
    throw ValidationError("fixed.missing_prob", "must lie in [0,1)");
  }
  if (!(config.c_T > 0.0)) throw ValidationError("fixed.c_T", "must be > 0");
  if (!(config.c_N > 0.0)) throw ValidationError("fixed.c_N", "must be > 0");
  if (!(config.s_hat_factor > 0.0)) throw ValidationError("fixed.s_hat_factor", "must be > 0");
  std::unordered_set<double> seen_values;
  for (double v : config.sweep_values) {
    if (!seen_values.insert(v).second) {
      throw ValidationError("sweep.values", "duplicate value " + std::to_string(v));
    }
    const CellParams cell = ResolveCell(config, v);
    if (config.silent_noise && std::isfinite(cell.epsilon)) {
      throw ValidationError("fixed.epsilon",
                            "silent noise is only permitted when epsilon is inf");
    }
  }
  if (config.reps <= 1'000'000) {
    std::unordered_set<std::uint64_t> seeds;
    for (double v : config.sweep_values) {
      for (std::size_t r = 0; r < config.reps; ++r) {
        if (!seeds.insert(RepSeed(config.master_seed, v, r)).second) {
          throw ValidationError("master_seed", "per-repetition seed collision");
        }
      }
    }
  }
}

// First s_star coordinates equal 1/sqrt(s_star), the rest zero.
inline ParamVector SparseUnitBeta(std::size_t d, std::size_t s_star) {
  ParamVector beta(d, 0.0);
  const double value = 1.0 / std::sqrt(static_cast<double>(s_star));
  for (std::size_t j = 0; j < s_star && j < d; ++j) beta[j] = value;
  return beta;
}

// beta* plus a uniformly oriented perturbation of length ||beta*||/8; in the
// high-dimensional regime the result is hard-thresholded to s_hat entries.
inline ParamVector DefaultInitialBeta(const ParamVector& true_beta, Regime regime,
                                      std::size_t s_hat, NoiseOracle& oracle) {
  Vector direction(true_beta.size());
  for (auto& u : direction) u = oracle.standard_normal();
  const double norm = Norm2(direction);
  const double radius = Norm2(true_beta) / 8.0;
  ParamVector beta = true_beta;
  if (norm > 0.0) {
    for (std::size_t j = 0; j < beta.size(); ++j) beta[j] += radius * direction[j] / norm;
  }
  if (regime == Regime::kHighDim) beta = oracle::exact_top_k(beta, s_hat).values;
  return beta;
}

namespace detail {

template <typename Model>
RepResult RunOneRep(const ExperimentConfig& config, const CellParams& cell, std::size_t rep,
                    Runner runner) {
  const std::uint64_t seed = RepSeed(config.master_seed, cell.sweep_value, rep);
  NoiseOracle data_oracle(DeriveSeed(seed, 1));
  NoiseOracle init_oracle(DeriveSeed(seed, 3));
  NoiseOracle noise_oracle(DeriveSeed(seed, 2), config.silent_noise ? NoiseOracle::Mode::kSilent
                                                                     : NoiseOracle::Mode::kLive);
  ModelSpec spec;
  spec.kind = Model::kKind;
  spec.d = cell.d;
  spec.sigma = config.sigma;
  spec.missing_prob = config.missing_prob;
  spec.true_beta = SparseUnitBeta(cell.d, cell.s_star);
  const auto data = Model::Generate(spec, cell.n, data_oracle);
  const ParamVector beta0 = DefaultInitialBeta(spec.true_beta, config.regime, cell.s_hat,
                                               init_oracle);

  EmConfig em;
  em.eta = config.eta;
  em.T = cell.T;
  em.N0 = cell.N0;
  em.s_hat = cell.s_hat;
  em.budget = PrivacyBudget(cell.epsilon, cell.delta);
  em.regime = config.regime;

  const std::span<const typename Model::Sample> view(data);
  Trajectory traj;
  if (runner == Runner::kBaseline) {
    traj = oracle::nonprivate_em(view, spec.sigma, em, beta0, spec.true_beta);
  } else if (config.regime == Regime::kHighDim) {
    traj = run_high_dim<Model>(spec, view, em, beta0, noise_oracle, spec.true_beta);
  } else {
    traj = run_low_dim<Model>(spec, view, em, beta0, noise_oracle, spec.true_beta);
  }
  return RepResult{std::move(traj.errors), std::move(traj.errors_signfree)};
}

inline RepResult RunRep(const ExperimentConfig& config, const CellParams& cell, std::size_t rep,
                        Runner runner) {
  switch (config.model) {
    case ModelKind::kGmm:
      return RunOneRep<GmmModel>(config, cell, rep, runner);
    case ModelKind::kMor:
      return RunOneRep<MorModel>(config, cell, rep, runner);
    case ModelKind::kRmc:
      return RunOneRep<RmcModel>(config, cell, rep, runner);
  }
  throw std::logic_error("unknown model kind");
}

}  // namespace detail

// Per-iteration mean and sample standard deviation over repetitions.
inline void Aggregate(CellResult& cell) {
  cell.mean.clear();
  cell.stddev.clear();
  if (cell.reps.empty()) return;
  const std::size_t iters = cell.reps.front().errors.size();
  const double count = static_cast<double>(cell.reps.size());
  for (std::size_t t = 0; t < iters; ++t) {
    double sum = 0.0;
    for (const auto& r : cell.reps) sum += r.errors.at(t);
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto& r : cell.reps) ss += (r.errors[t] - mean) * (r.errors[t] - mean);
    cell.mean.push_back(mean);
    cell.stddev.push_back(cell.reps.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0);
  }
}

inline AggregateResult run_experiment(const ExperimentConfig& config,
                                      Runner runner = Runner::kPrivate, std::size_t jobs = 1) {
  ValidateConfig(config);
  AggregateResult result;
  result.sweep_param = std::string(ToString(config.sweep));
  for (double v : config.sweep_values) {
    CellResult cell;
    cell.params = ResolveCell(config, v);
    cell.reps.resize(config.reps);
    result.cells.push_back(std::move(cell));
  }
  const std::size_t total = result.cells.size() * config.reps;
  ParallelFor(total, jobs, [&](std::size_t task) {
    CellResult& cell = result.cells[task / config.reps];
    const std::size_t rep = task % config.reps;
    try {
      cell.reps[rep] = detail::RunRep(config, cell.params, rep, runner);
    } catch (const std::exception& e) {
      throw std::runtime_error(result.sweep_param + "=" + std::to_string(cell.params.sweep_value) +
                               ", rep " + std::to_string(rep) + ": " + e.what());
    }
  });
  for (auto& cell : result.cells) Aggregate(cell);
  return result;
}

}  // namespace dpem::harness

#endif  // DPEM_HARNESS_EXPERIMENT_HPP_
